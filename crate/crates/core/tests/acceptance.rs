//! Acceptance criteria, one line of output each. Runs without the libtest
//! harness so the PASS/FAIL lines always reach the terminal.

use std::process::Command as Process;

use gaudin::bethe::{
    bae_jacobian_at, bae_residual_at, bethe_vector, solution_weight, solve_bae, BetheSolution, ColorAssignment,
    SolverConfig,
};
use gaudin::gaudin::{all_hamiltonians, joint_spectrum, sugawara_generating, GaudinProblem, SpectrumConfig};
use gaudin::liealg::{RootData, Weight};
use gaudin::linalg::SparseMatrix;
use gaudin::opers::{
    cartan_connection, cartan_connection_at, closed_form_eigenvalues, fit_kappa, frobenius_obstruction,
    miura_of_connection, miura_sl2, miura_sln, oper_residues, predicted_eigenvalues, regularity_check, Oper,
};
use gaudin::ratfun::{DiffOp, Point, RationalFunction};
use gaudin::repmod::TensorRep;
use gaudin::scalar::{int, rat, Rational, Scalar, C64};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type RF = RationalFunction<Rational>;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn a1<S: Scalar>(points: Vec<S>, lams: &[i64]) -> GaudinProblem<S> {
    GaudinProblem::new(RootData::type_a(1).unwrap(), points, lams.iter().map(|&l| Weight::from_ints(&[l])).collect())
        .unwrap()
}

fn ones(m: usize) -> ColorAssignment {
    ColorAssignment::new(1, vec![1; m]).unwrap()
}

/// `λ(λ+2)/4`, the sl2 Casimir on `V_λ` with the trace form.
fn sl2_casimir(l: i64) -> Rational {
    rat(l * (l + 2), 4)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn test_spaces() -> Vec<(String, GaudinProblem<Rational>, TensorRep)> {
    let p1 = a1(vec![int(0), rat(1, 2), rat(7, 3)], &[1, 1, 1]);
    let t1 = p1.tensor_irreducibles().unwrap();
    let rd2 = RootData::type_a(2).unwrap();
    let p2 =
        GaudinProblem::new(rd2, vec![rat(-2, 5), int(3)], vec![Weight::from_ints(&[1, 0]), Weight::from_ints(&[0, 1])])
            .unwrap();
    let t2 = p2.tensor_irreducibles().unwrap();
    vec![("V1^3".into(), p1, t1), ("Vw1(x)Vw2".into(), p2, t2)]
}

fn ac1() -> Outcome {
    let mut details = Vec::new();
    for (name, p, t) in test_spaces() {
        let hams = all_hamiltonians(&p, &t).unwrap();
        let n = hams.len();
        let nonzero = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !hams[i].commutator(&hams[j]).is_zero())
            .count();
        if nonzero > 0 {
            return check(false, format!("{name}: {nonzero} nonzero commutators"));
        }
        details.push(format!("{name} dim {}", t.dim()));
    }
    pass(format!("[Ξ_i, Ξ_j] = 0 exactly on {}", details.join(", ")))
}

fn ac2() -> Outcome {
    for (name, p, t) in test_spaces() {
        let hams = all_hamiltonians(&p, &t).unwrap();
        let sum = hams.iter().fold(SparseMatrix::zeros(t.dim(), t.dim()), |a, h| a.add(h));
        if !sum.is_zero() {
            return check(false, format!("{name}: Σ Ξ_i has {} nonzero entries", sum.nnz()));
        }
    }
    pass("Σ Ξ_i = 0 exactly on both spaces")
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-40..40), rng.gen_range(1..9))
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = a1(vec![rat(1, 3), rat(-5, 2)], &[1, 1]);
    let t = p.tensor_irreducibles().unwrap();
    let mut tried = 0;
    while tried < 5 {
        let u = random_rational(&mut rng);
        if p.points().contains(&u) {
            continue;
        }
        let pair = sugawara_generating(&p, &t, &u).unwrap();
        if pair.direct != pair.partial_fractions {
            return check(false, format!("mismatch at u = {u}"));
        }
        tried += 1;
    }
    pass("Φ_u(S) = Σ Ξ_i/(u-z_i) + Σ Δ_i/(u-z_i)^2 exactly at 5 rational u")
}

fn ac4() -> Outcome {
    let (z1, z2) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let p = a1(vec![int(0), int(1)], &[1, 1]);
    let t = p.tensor_irreducibles().unwrap();
    let out = solve_bae(&p, &ones(1), &SolverConfig::default());
    if out.solutions.len() != 1 {
        return check(false, format!("{} solutions", out.solutions.len()));
    }
    let s = &out.solutions[0];
    let w_err = (s.w[0] - C64::new(0.5, 0.0)).norm();
    let phi = DVector::from_vec(bethe_vector(&p, s, &t).unwrap());
    let e = t.total_e(0).to_complex();
    let singular = (&e * &phi).norm() / phi.norm();
    // singlet: Ω = Δ(V_0) - Δ(V_1) - Δ(V_1)
    let omega = (sl2_casimir(0) - sl2_casimir(1) - sl2_casimir(1)).to_c64();
    let expected = omega / (z1 - z2);
    let oracle = joint_spectrum(&p, &t, &Weight::from_ints(&[0]), &SpectrumConfig::default()).unwrap();
    let theta = oracle.entries[0].eigenvalues[0];
    let miura = predicted_eigenvalues(&p, s).unwrap()[0];
    let ok = w_err < 1e-12
        && s.residual < 1e-12
        && singular < 1e-10
        && rel(theta, expected) < 1e-10
        && rel(miura, theta) < 1e-10;
    check(
        ok,
        format!(
            "w = {:.15} (residual {:.1e}), |Eφ|/|φ| = {:.1e}, oracle Ξ_1 = {:.12} = -(3/2)/(z1-z2), Miura residue = {:.12}",
            s.w[0].re, s.residual, singular, theta.re, miura.re
        ),
    )
}

fn ac5_problem() -> GaudinProblem<Rational> {
    a1(vec![int(0), int(1), int(2)], &[1, 1, 1])
}

fn ac5() -> Outcome {
    let p = ac5_problem();
    let t = p.tensor_irreducibles().unwrap();
    let out = solve_bae(&p, &ones(1), &SolverConfig::default());
    let mu = Weight::from_ints(&[1]);
    let dim = t.singular_space(&mu).len();
    // roots of 3w² - 6w + 2
    let disc = (36.0f64 - 24.0).sqrt();
    let mut roots = [(6.0 - disc) / 6.0, (6.0 + disc) / 6.0];
    roots.sort_by(f64::total_cmp);
    if out.solutions.len() != 2 || dim != 2 {
        return check(false, format!("{} solutions, singular dim {dim}", out.solutions.len()));
    }
    let root_err = out.solutions.iter().zip(roots).map(|(s, r)| (s.w[0] - C64::new(r, 0.0)).norm()).fold(0.0, f64::max);
    let max_res = out.solutions.iter().map(|s| s.residual).fold(0.0, f64::max);
    let oracle = joint_spectrum(&p, &t, &mu, &SpectrumConfig::default()).unwrap();
    let mut worst: f64 = 0.0;
    let mut used = vec![false; oracle.entries.len()];
    for s in &out.solutions {
        let pred = predicted_eigenvalues(&p, s).unwrap();
        let (k, d) = oracle
            .entries
            .iter()
            .enumerate()
            .map(|(k, e)| (k, e.eigenvalues.iter().zip(&pred).map(|(&o, &q)| rel(q, o)).fold(0.0, f64::max)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    let ok = root_err < 1e-12 && max_res < 1e-12 && worst < 1e-8 && used.iter().all(|&u| u);
    check(
        ok,
        format!(
            "2 solutions = singular dim {dim}, |w - (1 ± 1/√3)| ≤ {root_err:.1e}, residual ≤ {max_res:.1e}, eigenvalue delta {worst:.1e}"
        ),
    )
}

fn random_function(rng: &mut ChaCha8Rng) -> RF {
    let mut f = RF::polynomial((0..rng.gen_range(0..3)).map(|_| random_rational(rng)).collect());
    let n_poles = rng.gen_range(0..=4);
    let mut used = Vec::new();
    while used.len() < n_poles {
        let at = random_rational(rng);
        if used.contains(&at) {
            continue;
        }
        used.push(at.clone());
        for k in 1..=rng.gen_range(1..=2) {
            f = f.add(&RF::pole(at.clone(), k, random_rational(rng))).unwrap();
        }
    }
    f
}

fn ac6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..20 {
        let u = random_function(&mut rng);
        let composed = DiffOp::first_order(u.neg()).compose(&DiffOp::first_order(u.clone())).unwrap();
        let v = u.mul(&u).unwrap().sub(&u.derive()).unwrap();
        if !composed.coeff(1).is_zero() || composed.coeff(0) != v.neg() || miura_sl2(&u).unwrap().projective() != v {
            return check(false, format!("factorization fails for sample {i}: u = {u}"));
        }
    }
    let (a, b) = (rat(3, 5), rat(-7, 4));
    let c = -(a.clone() + b.clone());
    let o = miura_sln(&[RF::constant(a.clone()), RF::constant(b.clone()), RF::constant(c)]).unwrap();
    let v1 = -(a.clone() * a.clone() + a.clone() * b.clone() + b.clone() * b.clone());
    let v2 = a.clone() * b.clone() * (a + b);
    let ok = o.v(1) == &RF::constant(v1) && o.v(2) == &RF::constant(v2);
    check(ok, "(∂-u)(∂+u) = ∂² - (u² - u') exactly for 20 random u; n = 3 constants match hand expansion")
}

fn on_shell_runs() -> Vec<(GaudinProblem<Rational>, BetheSolution)> {
    let mut out = Vec::new();
    let p4 = a1(vec![int(0), int(1)], &[1, 1]);
    for s in solve_bae(&p4, &ones(1), &SolverConfig::default()).solutions {
        out.push((p4.clone(), s));
    }
    let p5 = ac5_problem();
    for s in solve_bae(&p5, &ones(1), &SolverConfig::default()).solutions {
        out.push((p5.clone(), s));
    }
    out
}

fn ac7() -> Outcome {
    let runs = on_shell_runs();
    let mut worst_on: f64 = 0.0;
    let mut weakest_off = f64::INFINITY;
    for (p, s) in &runs {
        let oper = miura_of_connection(&cartan_connection(p, s).unwrap()).unwrap();
        for w in &s.w {
            worst_on = worst_on.max(regularity_check(&oper, w, 1e-9).max_singular);
        }
        for j in 0..s.m() {
            let mut w = s.w.clone();
            w[j] += C64::new(1e-3, 0.0);
            let cp = p.to_complex();
            let off = miura_of_connection(&cartan_connection_at(&cp, &s.colors, &w).unwrap()).unwrap();
            weakest_off = weakest_off.min(regularity_check(&off, &w[j], 1e-9).max_singular);
        }
    }
    check(
        worst_on < 1e-9 && weakest_off > 1e-4,
        format!("{} solutions: on-shell singular part ≤ {worst_on:.1e}, perturbed ≥ {weakest_off:.1e}", runs.len()),
    )
}

fn ac8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let x = random_rational(&mut rng);
        let q = random_function(&mut rng);
        // keep only the simple pole at x so that λ = 0 applies
        let q = match q.pole_at(&x) {
            Some(pole) => {
                let mut trimmed = q.clone();
                for k in 2..=pole.order() {
                    trimmed = trimmed.sub(&RF::pole(x.clone(), k, q.principal_coeff(&x, k))).unwrap();
                }
                trimmed
            }
            None => q,
        };
        let oper = Oper::from_projective(q.clone());
        let obs = frobenius_obstruction(&oper, &x, 0, 0.0).unwrap();
        if obs[0] != q.residue(&x) {
            return check(false, format!("λ = 0 obstruction {} differs from residue {}", obs[0], q.residue(&x)));
        }
    }
    let mut worst: f64 = 0.0;
    for (p, s) in on_shell_runs() {
        let oper = miura_of_connection(&cartan_connection(&p, &s).unwrap()).unwrap();
        for (z, lam) in p.points().iter().zip(p.weights()) {
            let l = lam.to_ints().unwrap()[0] as u32;
            let obs = frobenius_obstruction(&oper, &z.to_c64(), l, 1e-9).unwrap();
            worst = worst.max(obs[0].norm());
        }
    }
    check(worst < 1e-9, format!("λ = 0 obstruction = v_(-1) exactly on 10 inputs; on-shell obstructions ≤ {worst:.1e}"))
}

fn ac9() -> Outcome {
    let mut runs: Vec<(GaudinProblem<C64>, BetheSolution)> =
        on_shell_runs().into_iter().map(|(p, s)| (p.to_complex(), s)).collect();
    let rd2 = RootData::type_a(2).unwrap();
    let p2 = GaudinProblem::new(rd2, vec![int(0), int(1)], vec![Weight::from_ints(&[1, 0]), Weight::from_ints(&[0, 1])])
        .unwrap();
    let colors = ColorAssignment::new(2, vec![1, 2]).unwrap();
    for s in solve_bae(&p2, &colors, &SolverConfig::default()).solutions {
        runs.push((p2.to_complex(), s));
    }
    let p3 = a1(vec![int(0), int(1), int(3)], &[2, 2, 2]);
    for s in solve_bae(&p3, &ones(2), &SolverConfig::default()).solutions {
        runs.push((p3.to_complex(), s));
    }
    let mut worst_sum: f64 = 0.0;
    let mut worst_inf: f64 = 0.0;
    for (p, s) in &runs {
        let pred = predicted_eigenvalues(p, s).unwrap();
        worst_sum = worst_sum.max(pred.iter().sum::<C64>().norm());
        let oper = miura_of_connection(&cartan_connection(p, s).unwrap()).unwrap();
        let inf = oper_residues(&oper, &Point::Infinity).unwrap();
        let rd = p.root_data();
        let mu = solution_weight(p, &s.colors);
        let Some((lam_inf, _)) = rd.classify_weight_at_infinity(&mu) else {
            return check(false, format!("μ = {mu} has no classification"));
        };
        let expected = rd.casimir_value(&lam_inf).to_c64();
        worst_inf = worst_inf.max((inf.double - expected).norm() / expected.norm().max(1.0));
    }
    check(
        worst_sum < 1e-10 && worst_inf < 1e-10,
        format!("{} runs: |Σ residues| ≤ {worst_sum:.1e}, infinity vs λ_∞ Casimir ≤ {worst_inf:.1e}", runs.len()),
    )
}

fn ac10() -> Outcome {
    let p = a1(vec![int(0), int(1)], &[1, 1]);
    let t = p.tensor_irreducibles().unwrap();
    let s = &solve_bae(&p, &ones(1), &SolverConfig::default()).solutions[0];
    let oracle = joint_spectrum(&p, &t, &Weight::from_ints(&[0]), &SpectrumConfig::default()).unwrap();
    let theta = oracle.entries[0].eigenvalues[0];
    let kappa = fit_kappa(&p.to_complex(), &s.w, 0, &theta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    let mut solutions = 0;
    while instances < 10 {
        let z: Vec<Rational> = (0..3).map(|_| random_rational(&mut rng)).collect();
        if z[0] == z[1] || z[1] == z[2] || z[0] == z[2] {
            continue;
        }
        let lams: Vec<i64> = (0..3).map(|_| rng.gen_range(1..=2)).collect();
        let p = a1(z, &lams);
        let t = p.tensor_irreducibles().unwrap();
        let colors = ones(1);
        let mu = solution_weight(&p, &colors);
        let oracle = joint_spectrum(&p, &t, &mu, &SpectrumConfig::default()).unwrap();
        let out = solve_bae(&p, &colors, &SolverConfig::default());
        if out.solutions.len() != oracle.singular_dim {
            return check(false, format!("instance {instances}: {} solutions vs dim {}", out.solutions.len(), oracle.singular_dim));
        }
        for s in &out.solutions {
            let closed = closed_form_eigenvalues(&p.to_complex(), &s.w, &kappa);
            let d = oracle
                .entries
                .iter()
                .map(|e| e.eigenvalues.iter().zip(&closed).map(|(&o, &c)| (c - o).norm() / o.norm().max(1.0)).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
            solutions += 1;
        }
        instances += 1;
    }
    check(
        worst < 1e-8 && (kappa - C64::new(0.5, 0.0)).norm() < 1e-12,
        format!("fitted κ_pair = {:.15}; 10 instances, {solutions} solutions, max delta {worst:.1e}", kappa.re),
    )
}

fn ac11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rd = RootData::type_a(2).unwrap();
    let p = GaudinProblem::new(
        rd,
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.3), C64::new(-1.2, 0.5)],
        vec![Weight::from_ints(&[1, 0]), Weight::from_ints(&[2, 1]), Weight::from_ints(&[0, 2])],
    )
    .unwrap();
    let colors = ColorAssignment::new(2, vec![1, 1, 2]).unwrap();
    let mut configs = 0;
    let mut worst: f64 = 0.0;
    let h = 1e-6;
    while configs < 20 {
        let w: Vec<C64> = (0..3).map(|_| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let near = w.iter().enumerate().any(|(j, x)| {
            p.points().iter().any(|z| (x - z).norm() < 0.25) || w[j + 1..].iter().any(|y| (x - y).norm() < 0.25)
        });
        if near {
            continue;
        }
        let jac = bae_jacobian_at(&p, &colors, &w).unwrap();
        for k in 0..3 {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[k] += h;
            wm[k] -= h;
            let rp = bae_residual_at(&p, &colors, &wp).unwrap();
            let rm = bae_residual_at(&p, &colors, &wm).unwrap();
            for j in 0..3 {
                let fd = (rp[j] - rm[j]) / (2.0 * h);
                worst = worst.max((fd - jac[j][k]).norm() / jac[j][k].norm().max(1.0));
            }
        }
        configs += 1;
    }
    check(worst < 1e-6, format!("20 off-shell configurations, max relative deviation {worst:.1e}"))
}

fn ac12() -> Outcome {
    let dir = std::env::temp_dir().join(format!("gaudin-ac12-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("problem.json");
    std::fs::write(
        &file,
        r#"{"schema": 1, "algebra": {"type": "A", "rank": 1},
            "points": ["0", "1", "5/2", "-3"], "weights": [[1], [2], [1], [1]],
            "solver": {"seed": 42}}"#,
    )
    .unwrap();
    let run = |threads: &str| -> Vec<u8> {
        let out = Process::new(env!("CARGO_BIN_EXE_gaudin"))
            .args(["solve", file.to_str().unwrap()])
            .env("GAUDIN_THREADS", threads)
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let a = run("1");
    let b = run("1");
    let c = run("4");
    let _ = std::fs::remove_dir_all(&dir);
    check(a == b && a == c && !a.is_empty(), format!("{} bytes, identical across two runs and GAUDIN_THREADS ∈ {{1, 4}}", a.len()))
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("AC-1", "commutativity", ac1),
        ("AC-2", "sum rule", ac2),
        ("AC-3", "Segal-Sugawara identity", ac3),
        ("AC-4", "sl2 dictionary, two sites", ac4),
        ("AC-5", "completeness, three sites", ac5),
        ("AC-6", "Miura factorization", ac6),
        ("AC-7", "Bethe equations vs regularity", ac7),
        ("AC-8", "monodromy obstruction", ac8),
        ("AC-9", "infinity bookkeeping", ac9),
        ("AC-10", "closed-form normalization", ac10),
        ("AC-11", "Jacobian", ac11),
        ("AC-12", "determinism", ac12),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome { ok: false, detail: format!("panicked: {msg}") }
        });
        let tag = if outcome.ok { "PASS" } else { "FAIL" };
        println!("{id} {tag} {name}: {}", outcome.detail);
        if !outcome.ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 12 acceptance criteria passed");
}
