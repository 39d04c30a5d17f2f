//! Gaudin Hamiltonians on a tensor product, their exact commutativity, and
//! the joint spectrum on a space of singular vectors.

use gaudin::gaudin::{all_hamiltonians, joint_spectrum, total_casimir, GaudinProblem, SpectrumConfig};
use gaudin::liealg::{RootData, Weight};
use gaudin::scalar::{int, rat};

fn main() {
    let p = GaudinProblem::new(
        RootData::type_a(1).unwrap(),
        vec![int(0), rat(1, 2), int(2), int(5)],
        vec![Weight::from_ints(&[1]); 4],
    )
    .unwrap();
    let t = p.tensor_irreducibles().unwrap();
    let hams = all_hamiltonians(&p, &t).unwrap();
    let commuting = hams.iter().all(|a| hams.iter().all(|b| a.commutator(b).is_zero()));
    println!("{} Hamiltonians on a space of dim {}; pairwise commuting: {commuting}", hams.len(), t.dim());
    println!("total Casimir has {} nonzero entries", total_casimir(&t).nnz());

    for m in [4, 2, 0] {
        let mu = Weight::from_ints(&[m]);
        let spec = joint_spectrum(&p, &t, &mu, &SpectrumConfig::default()).unwrap();
        println!("μ = {mu}: singular dim {}, max residual {:.1e}", spec.singular_dim, spec.max_residual());
        for e in &spec.entries {
            let vals: Vec<String> = e.eigenvalues.iter().map(|z| format!("{:+.6}", z.re)).collect();
            println!("  ({})", vals.join(", "));
        }
    }
}
