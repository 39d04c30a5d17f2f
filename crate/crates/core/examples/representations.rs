//! Irreducible representations as Verma quotients, tensor products and
//! spaces of singular vectors.

use gaudin::liealg::{RootData, Weight};
use gaudin::repmod::{Representation, TensorRep};

fn main() {
    let rd = RootData::type_a(2).unwrap();
    let adjoint = Representation::irreducible(&rd, &Weight::from_ints(&[1, 1])).unwrap();
    println!("adjoint of sl3: dim {}", adjoint.dim());
    for (w, m) in adjoint.weight_multiplicities() {
        println!("  weight {w}: multiplicity {m}");
    }
    let bracket = adjoint.e(0).commutator(adjoint.f(0)).sub(adjoint.h(0));
    println!("[e1, f1] = h1 holds exactly: {}", bracket.is_zero());

    let v = Representation::irreducible(&rd, &Weight::from_ints(&[1, 0])).unwrap();
    let t = TensorRep::new(vec![v.clone(), v.clone(), v]).unwrap();
    println!("C^3 ⊗ C^3 ⊗ C^3: dim {}", t.dim());
    for coords in [[3, 0], [1, 1], [0, 0]] {
        let mu = Weight::from_ints(&coords);
        println!("  singular vectors of weight {mu}: {}", t.singular_space(&mu).len());
    }
}
