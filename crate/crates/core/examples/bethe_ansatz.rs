//! Multistart Newton solution of the Bethe Ansatz equations and the
//! corresponding Bethe vectors.

use gaudin::bethe::{bethe_vector, solve_bae, ColorAssignment, SolverConfig};
use gaudin::gaudin::GaudinProblem;
use gaudin::liealg::{RootData, Weight};
use gaudin::scalar::int;
use nalgebra::DVector;

fn main() {
    let p = GaudinProblem::new(RootData::type_a(1).unwrap(), vec![int(0), int(1), int(3)], vec![Weight::from_ints(&[2]); 3])
        .unwrap();
    let t = p.tensor_irreducibles().unwrap();
    let colors = ColorAssignment::new(1, vec![1, 1]).unwrap();
    let out = solve_bae(&p, &colors, &SolverConfig { seed: 1, ..SolverConfig::default() });
    println!("{} of {} starts converged; {} distinct solutions", out.converged, out.starts, out.solutions.len());
    let e = t.total_e(0).to_complex();
    for s in &out.solutions {
        let w: Vec<String> = s.w.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
        let phi = DVector::from_vec(bethe_vector(&p, s, &t).unwrap());
        println!(
            "  w = [{}]  residual {:.1e}  |Eφ|/|φ| = {:.1e}",
            w.join(", "),
            s.residual,
            (&e * &phi).norm() / phi.norm()
        );
    }
}
