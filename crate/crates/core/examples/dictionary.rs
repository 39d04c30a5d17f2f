//! End to end: solve the Bethe equations, build the oper, read eigenvalues
//! off its residues and compare with brute-force diagonalization.

use gaudin::bethe::{solution_weight, solve_bae, ColorAssignment, SolverConfig};
use gaudin::gaudin::{joint_spectrum, GaudinProblem, SpectrumConfig};
use gaudin::liealg::{RootData, Weight};
use gaudin::opers::{cartan_connection, miura_of_connection, oper_residues, predicted_eigenvalues};
use gaudin::ratfun::Point;
use gaudin::scalar::{int, rat};

fn main() {
    let rd = RootData::type_a(2).unwrap();
    let p = GaudinProblem::new(
        rd.clone(),
        vec![int(0), int(1), rat(-5, 2)],
        vec![Weight::from_ints(&[1, 0]), Weight::from_ints(&[0, 1]), Weight::from_ints(&[1, 1])],
    )
    .unwrap();
    let t = p.tensor_irreducibles().unwrap();
    let colors = ColorAssignment::new(2, vec![1, 2]).unwrap();
    let mu = solution_weight(&p, &colors);
    let (lam_inf, w) = rd.classify_weight_at_infinity(&mu).unwrap();
    println!("μ = {mu}, λ_∞ = {lam_inf} (w = {w}), Casimir at ∞ = {}", rd.casimir_value(&lam_inf));

    let oracle = joint_spectrum(&p, &t, &mu, &SpectrumConfig::default()).unwrap();
    for s in solve_bae(&p, &colors, &SolverConfig::default()).solutions {
        let theta = predicted_eigenvalues(&p, &s).unwrap();
        let oper = miura_of_connection(&cartan_connection(&p, &s).unwrap()).unwrap();
        let inf = oper_residues(&oper, &Point::Infinity).unwrap();
        let gap = oracle
            .entries
            .iter()
            .map(|e| e.eigenvalues.iter().zip(&theta).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        let shown: Vec<String> = theta.iter().map(|z| format!("{:+.8}", z.re)).collect();
        println!("eigenvalues from residues ({}), distance to oracle {gap:.1e}, ∞ double pole {:.8}", shown.join(", "), inf.double.re);
    }
}
