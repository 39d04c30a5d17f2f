//! Type A root data: Cartan matrix, Weyl group, the ρ-shifted action and the
//! classification of Bethe-vector weights by a dominant weight at infinity.

use gaudin::liealg::{RootData, Weight};

fn main() {
    let rd = RootData::type_a(2).unwrap();
    println!("sl3 Cartan matrix {:?}", rd.cartan());
    println!("ρ = {}", rd.rho());

    let lambda = Weight::from_ints(&[2, 1]);
    println!("λ = {lambda}: dim V_λ = {}, Casimir = {}", rd.weyl_dimension(&lambda), rd.casimir_value(&lambda));
    println!("dual weight -w0(λ) = {}", rd.dual_weight(&lambda));

    println!("shifted orbit of 0:");
    for w in rd.weyl_group() {
        println!("  {:>8} · 0 = {}", w.to_string(), rd.shifted_action(&w, &Weight::zero(2)));
    }

    for coords in [[1, 1], [-3, 0], [0, -1], [-2, 1]] {
        let mu = Weight::from_ints(&coords);
        match rd.classify_weight_at_infinity(&mu) {
            Some((lam, w)) => println!("μ = {mu}: λ_∞ = {lam}, w = {w}"),
            None => println!("μ = {mu}: μ + ρ lies on a wall"),
        }
    }
}
