use gaudin::bethe::{bethe_vector, solution_weight, solve_bae, ColorAssignment, SolverConfig};
use gaudin::gaudin::{all_hamiltonians, joint_spectrum, GaudinProblem, SpectrumConfig};
use gaudin::liealg::{RootData, Weight};
use gaudin::opers::{cartan_connection, miura_of_connection, predicted_eigenvalues, regularity_check};
use gaudin::scalar::{int, rat, Scalar, C64};
use nalgebra::{DMatrix, DVector};

/// Runs solve, Bethe vector, Miura and oracle on one sector and returns the
/// number of solutions found.
fn dictionary<S: Scalar>(p: &GaudinProblem<S>, colors: &ColorAssignment) -> usize {
    let t = p.tensor_irreducibles().unwrap();
    let out = solve_bae(p, colors, &SolverConfig::default());
    let mu = solution_weight(p, colors);
    let oracle = joint_spectrum(p, &t, &mu, &SpectrumConfig::default()).unwrap();
    assert!(out.solutions.len() <= oracle.singular_dim);
    let hams: Vec<DMatrix<C64>> = all_hamiltonians(p, &t).unwrap().iter().map(|h| h.to_complex()).collect();
    for s in &out.solutions {
        assert!(s.residual < 1e-12, "residual {}", s.residual);
        let phi = DVector::from_vec(bethe_vector(p, s, &t).unwrap());
        let theta = predicted_eigenvalues(p, s).unwrap();
        for (h, th) in hams.iter().zip(&theta) {
            let r = (h * &phi - &phi * *th).norm() / phi.norm();
            assert!(r < 1e-8, "eigen residual {r}");
        }
        let hit = oracle.entries.iter().any(|e| {
            e.eigenvalues.iter().zip(&theta).all(|(o, t)| (o - t).norm() <= 1e-8 * o.norm().max(1.0))
        });
        assert!(hit, "prediction {theta:?} missing from oracle");
        let oper = miura_of_connection(&cartan_connection(p, s).unwrap());
        if let Ok(oper) = oper {
            if oper.n() == 2 {
                for w in &s.w {
                    assert!(regularity_check(&oper, w, 1e-9).regular);
                }
            }
        }
    }
    out.solutions.len()
}

#[test]
fn sl3_vector_and_dual_with_adjoint() {
    let rd = RootData::type_a(2).unwrap();
    let p = GaudinProblem::new(
        rd,
        vec![int(0), int(1), rat(-5, 2)],
        vec![Weight::from_ints(&[1, 0]), Weight::from_ints(&[0, 1]), Weight::from_ints(&[1, 1])],
    )
    .unwrap();
    let found = dictionary(&p, &ColorAssignment::new(2, vec![1, 2]).unwrap());
    assert_eq!(found, 2);
}

#[test]
fn sl3_three_vectors_one_root() {
    let rd = RootData::type_a(2).unwrap();
    let p = GaudinProblem::new(rd, vec![int(0), int(1), int(3)], vec![Weight::from_ints(&[1, 0]); 3]).unwrap();
    assert_eq!(dictionary(&p, &ColorAssignment::new(2, vec![1]).unwrap()), 2);
    // Σλ - α1 - α2 is not dominant: no singular vectors and no solutions
    assert_eq!(dictionary(&p, &ColorAssignment::new(2, vec![1, 2]).unwrap()), 0);
}

#[test]
fn two_roots_on_three_triplets() {
    let p = GaudinProblem::new(
        RootData::type_a(1).unwrap(),
        vec![int(0), int(1), int(3)],
        vec![Weight::from_ints(&[2]); 3],
    )
    .unwrap();
    let found = dictionary(&p, &ColorAssignment::new(1, vec![1, 1]).unwrap());
    assert_eq!(found, 3);
}

#[test]
fn complex_marked_points() {
    let p = GaudinProblem::new(
        RootData::type_a(1).unwrap(),
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.5), C64::new(-1.0, 2.0)],
        vec![Weight::from_ints(&[2]), Weight::from_ints(&[1]), Weight::from_ints(&[1])],
    )
    .unwrap();
    let found = dictionary(&p, &ColorAssignment::new(1, vec![1, 1]).unwrap());
    assert!(found >= 1);
}
