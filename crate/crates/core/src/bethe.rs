//! Bethe Ansatz equations: residuals, Jacobians, a multistart damped Newton
//! solver, and Bethe vectors.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gaudin::GaudinProblem;
use crate::liealg::{RootData, Weight};
use crate::repmod::TensorRep;
use crate::scalar::{int, Rational, Scalar, C64};

/// Bethe vectors enumerate `m! · C(m+N-1, N-1)` ordered partitions.
pub const MAX_BETHE_VECTOR_POINTS: usize = 8;

/// Distance below which a root counts as a collision.
pub const COLLISION_RADIUS: f64 = 1e-6;

/// Jacobian condition number above which a root is flagged.
pub const DEGENERATE_CONDITION: f64 = 1e10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BetheError {
    #[error("color {color} is outside 1..={rank}")]
    BadColor { color: usize, rank: usize },
    #[error("{got} Bethe roots for {expected} colors")]
    LengthMismatch { got: usize, expected: usize },
    #[error("Bethe root {0} coincides with marked point {1}")]
    RootAtPoint(usize, usize),
    #[error("Bethe roots {0} and {1} coincide")]
    RootsCoincide(usize, usize),
    #[error("{0} Bethe roots exceed the Bethe vector cap")]
    TooManyRoots(usize),
    #[error("tensor factors do not match the problem weights")]
    FactorMismatch,
}

/// Simple-root labels `i_j ∈ 1..=ℓ`, one per Bethe root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ColorAssignment(Vec<usize>);

impl ColorAssignment {
    pub fn new(rank: usize, colors: Vec<usize>) -> Result<Self, BetheError> {
        if let Some(&c) = colors.iter().find(|&&c| c == 0 || c > rank) {
            return Err(BetheError::BadColor { color: c, rank });
        }
        Ok(ColorAssignment(colors))
    }

    pub fn empty() -> Self {
        ColorAssignment(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn colors(&self) -> &[usize] {
        &self.0
    }

    /// Zero-based simple-root index of root `j`.
    pub fn index(&self, j: usize) -> usize {
        self.0[j] - 1
    }

    /// All multisets of colors whose roots sum to `diff` (root coordinates),
    /// in sorted form.
    pub fn from_root_difference(coords: &[Rational]) -> Option<Self> {
        let mut colors = Vec::new();
        for (i, c) in coords.iter().enumerate() {
            if !c.is_integer() || c < &int(0) {
                return None;
            }
            let k: usize = c.to_integer().try_into().ok()?;
            colors.extend(std::iter::repeat_n(i + 1, k));
        }
        Some(ColorAssignment(colors))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BetheSolution {
    pub w: Vec<C64>,
    pub colors: ColorAssignment,
    /// `max_j |r_j|`
    pub residual: f64,
    /// ratio of extreme singular values of the Jacobian
    pub condition: f64,
    pub possibly_degenerate: bool,
}

impl BetheSolution {
    /// Canonicalizes the roots and evaluates residual and conditioning.
    pub fn evaluate<S: Scalar>(
        p: &GaudinProblem<S>,
        colors: &ColorAssignment,
        w: &[C64],
    ) -> Result<Self, BetheError> {
        let w = canonical_order(colors, w);
        let cp = p.to_complex();
        let r = bae_residual_at(&cp, colors, &w)?;
        let jac = bae_jacobian_at(&cp, colors, &w)?;
        let residual = r.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let condition = condition_number(&jac);
        Ok(BetheSolution {
            w,
            colors: colors.clone(),
            residual,
            condition,
            possibly_degenerate: condition > DEGENERATE_CONDITION,
        })
    }

    pub fn m(&self) -> usize {
        self.w.len()
    }

    /// The same solution with every root shifted by `delta`.
    pub fn perturbed<S: Scalar>(&self, p: &GaudinProblem<S>, delta: C64) -> Result<Self, BetheError> {
        let w: Vec<C64> = self.w.iter().map(|x| x + delta).collect();
        Self::evaluate(p, &self.colors, &w)
    }
}

/// Sorts roots within each color by (real, imaginary) parts.
pub fn canonical_order(colors: &ColorAssignment, w: &[C64]) -> Vec<C64> {
    let mut out = w.to_vec();
    for c in distinct_colors(colors) {
        let slots: Vec<usize> = (0..colors.len()).filter(|&j| colors.0[j] == c).collect();
        let mut vals: Vec<C64> = slots.iter().map(|&j| w[j]).collect();
        vals.sort_by(|a, b| a.canonical_cmp(b));
        for (&j, v) in slots.iter().zip(vals) {
            out[j] = v;
        }
    }
    out
}

fn distinct_colors(colors: &ColorAssignment) -> Vec<usize> {
    let mut c = colors.0.clone();
    c.sort_unstable();
    c.dedup();
    c
}

fn check_roots<S: Scalar>(p: &GaudinProblem<S>, colors: &ColorAssignment, w: &[S]) -> Result<(), BetheError> {
    if w.len() != colors.len() {
        return Err(BetheError::LengthMismatch { got: w.len(), expected: colors.len() });
    }
    if let Some(&c) = colors.0.iter().find(|&&c| c == 0 || c > p.root_data().rank()) {
        return Err(BetheError::BadColor { color: c, rank: p.root_data().rank() });
    }
    for (j, wj) in w.iter().enumerate() {
        if let Some(i) = p.points().iter().position(|z| z == wj) {
            return Err(BetheError::RootAtPoint(j, i));
        }
        if let Some(s) = (j + 1..w.len()).find(|&s| &w[s] == wj) {
            return Err(BetheError::RootsCoincide(j, s));
        }
    }
    Ok(())
}

fn site_pairing(rd: &RootData, lambda: &Weight, i: usize) -> Rational {
    rd.pairing(lambda, i).expect("weight rank checked by the problem")
}

/// `r_j = Σ_i ⟨λ_i, α̌_{i_j}⟩/(w_j - z_i) - Σ_{s≠j} ⟨α_{i_s}, α̌_{i_j}⟩/(w_j - w_s)`,
/// in whatever field the points live in.
pub fn bae_residual_at<S: Scalar>(
    p: &GaudinProblem<S>,
    colors: &ColorAssignment,
    w: &[S],
) -> Result<Vec<S>, BetheError> {
    check_roots(p, colors, w)?;
    let rd = p.root_data();
    let m = w.len();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let ij = colors.index(j);
        let mut r = S::zero();
        for (z, lam) in p.points().iter().zip(p.weights()) {
            let k = site_pairing(rd, lam, ij);
            r = r + S::from_rational(&k) * (w[j].clone() - z.clone()).recip();
        }
        for s in (0..m).filter(|&s| s != j) {
            let a = S::from_i64(rd.cartan_entry(ij, colors.index(s)));
            r = r - a * (w[j].clone() - w[s].clone()).recip();
        }
        out.push(r);
    }
    Ok(out)
}

pub fn bae_residual<S: Scalar>(p: &GaudinProblem<S>, s: &BetheSolution) -> Result<Vec<C64>, BetheError> {
    bae_residual_at(&p.to_complex(), &s.colors, &s.w)
}

/// Constant term `μ_{j,0}` of `λ(t) = -α_{i_j}/(t - w_j) + μ_{j,0} + O(t - w_j)`,
/// in fundamental-weight coordinates.
pub fn expansion_at_root<S: Scalar>(
    p: &GaudinProblem<S>,
    colors: &ColorAssignment,
    w: &[S],
    j: usize,
) -> Result<Vec<S>, BetheError> {
    check_roots(p, colors, w)?;
    let rd = p.root_data();
    let mut mu = vec![S::zero(); rd.rank()];
    for (z, lam) in p.points().iter().zip(p.weights()) {
        let d = (w[j].clone() - z.clone()).recip();
        for (k, c) in lam.coords().iter().enumerate() {
            mu[k] = mu[k].clone() + S::from_rational(c) * d.clone();
        }
    }
    for s in (0..w.len()).filter(|&s| s != j) {
        let d = (w[j].clone() - w[s].clone()).recip();
        let alpha = rd.simple_root(colors.index(s));
        for (k, c) in alpha.coords().iter().enumerate() {
            mu[k] = mu[k].clone() - S::from_rational(c) * d.clone();
        }
    }
    Ok(mu)
}

/// `∂r_j/∂w_k` in closed form.
pub fn bae_jacobian_at<S: Scalar>(
    p: &GaudinProblem<S>,
    colors: &ColorAssignment,
    w: &[S],
) -> Result<Vec<Vec<S>>, BetheError> {
    check_roots(p, colors, w)?;
    let rd = p.root_data();
    let m = w.len();
    let mut jac = vec![vec![S::zero(); m]; m];
    for j in 0..m {
        let ij = colors.index(j);
        let mut diag = S::zero();
        for (z, lam) in p.points().iter().zip(p.weights()) {
            let k = S::from_rational(&site_pairing(rd, lam, ij));
            diag = diag - k * (w[j].clone() - z.clone()).powi(-2);
        }
        for s in (0..m).filter(|&s| s != j) {
            let a = S::from_i64(rd.cartan_entry(ij, colors.index(s)));
            let d2 = (w[j].clone() - w[s].clone()).powi(-2);
            diag = diag + a.clone() * d2.clone();
            jac[j][s] = -(a * d2);
        }
        jac[j][j] = diag;
    }
    Ok(jac)
}

pub fn bae_jacobian<S: Scalar>(p: &GaudinProblem<S>, s: &BetheSolution) -> Result<Vec<Vec<C64>>, BetheError> {
    bae_jacobian_at(&p.to_complex(), &s.colors, &s.w)
}

fn condition_number(jac: &[Vec<C64>]) -> f64 {
    let m = jac.len();
    if m == 0 {
        return 1.0;
    }
    let mat = DMatrix::from_fn(m, m, |r, c| jac[r][c]);
    let sv = mat.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub seed: u64,
    /// defaults to `64·m`
    pub starts: Option<usize>,
    pub tol: f64,
    pub dedup: f64,
    pub max_iter: usize,
    /// worker threads; falls back to `GAUDIN_THREADS`, then to rayon's default
    pub threads: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { seed: 0, starts: None, tol: 1e-12, dedup: 1e-8, max_iter: 200, threads: None }
    }
}

impl SolverConfig {
    pub fn effective_starts(&self, m: usize) -> usize {
        self.starts.unwrap_or(64 * m.max(1))
    }

    fn effective_threads(&self) -> Option<usize> {
        self.threads.or_else(|| {
            std::env::var("GAUDIN_THREADS").ok().and_then(|s| s.trim().parse().ok()).filter(|&n| n > 0)
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub solutions: Vec<BetheSolution>,
    /// converged roots where a Bethe root approaches a marked point or a
    /// same-color root
    pub collisions: Vec<BetheSolution>,
    pub starts: usize,
    pub converged: usize,
}

const MAX_HALVINGS: usize = 20;

/// Multistart damped Newton. Deterministic for a fixed seed, independent of
/// the number of threads.
pub fn solve_bae<S: Scalar>(p: &GaudinProblem<S>, colors: &ColorAssignment, cfg: &SolverConfig) -> SolveOutcome {
    let cp = p.to_complex();
    let m = colors.len();
    if m == 0 {
        let sol = BetheSolution::evaluate(&cp, colors, &[]).expect("empty configuration is valid");
        return SolveOutcome { solutions: vec![sol], collisions: Vec::new(), starts: 0, converged: 0 };
    }
    let starts = cfg.effective_starts(m);
    let run = || -> Vec<Option<Vec<C64>>> {
        (0..starts).into_par_iter().map(|k| newton_from(&cp, colors, &initial_guess(&cp, m, cfg.seed, k), cfg)).collect()
    };
    let raw = match cfg.effective_threads() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(run))
            .unwrap_or_else(|_| run()),
        None => run(),
    };
    let mut found: Vec<BetheSolution> = raw
        .into_iter()
        .flatten()
        .filter_map(|w| BetheSolution::evaluate(&cp, colors, &w).ok())
        .collect();
    let converged = found.len();
    found.sort_by(cmp_solutions);
    let clusters = single_linkage(&found, colors, cfg.dedup);
    let mut solutions = Vec::new();
    let mut collisions = Vec::new();
    for members in clusters {
        let best = members
            .iter()
            .copied()
            .min_by(|&a, &b| found[a].residual.total_cmp(&found[b].residual).then(a.cmp(&b)))
            .expect("clusters are nonempty");
        let sol = found[best].clone();
        if is_collision(&cp, &sol) {
            collisions.push(sol);
        } else {
            solutions.push(sol);
        }
    }
    solutions.sort_by(cmp_solutions);
    collisions.sort_by(cmp_solutions);
    SolveOutcome { solutions, collisions, starts, converged }
}

fn cmp_solutions(a: &BetheSolution, b: &BetheSolution) -> std::cmp::Ordering {
    for (x, y) in a.w.iter().zip(&b.w) {
        let o = x.canonical_cmp(y);
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

fn initial_guess(p: &GaudinProblem<C64>, m: usize, seed: u64, k: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let z = p.points();
    let radius = 2.0 * z.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let radius = if radius > 0.0 { radius } else { 1.0 };
    let sample_disc = |rng: &mut ChaCha8Rng| {
        let r = radius * rng.gen::<f64>().sqrt();
        let th = rng.gen_range(0.0..std::f64::consts::TAU);
        C64::from_polar(r, th)
    };
    // every fourth start seeds the roots near midpoints of neighbouring points
    if k.is_multiple_of(4) && z.len() >= 2 {
        let mut sorted = z.to_vec();
        sorted.sort_by(|a, b| a.canonical_cmp(b));
        let mids: Vec<C64> = sorted.windows(2).map(|p| (p[0] + p[1]) * 0.5).collect();
        let scale = 0.05 * radius;
        (0..m)
            .map(|j| {
                let mid = mids[(j + k / 4) % mids.len()];
                mid + C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
            })
            .collect()
    } else {
        (0..m).map(|_| sample_disc(&mut rng)).collect()
    }
}

/// Newton runs on `g_j = r_j · Π_i (w_j - z_i)`. The factor leaves the roots
/// away from the marked points unchanged but stops the merit function from
/// decaying towards infinity, which otherwise swallows most starts.
fn scaled_system(p: &GaudinProblem<C64>, colors: &ColorAssignment, w: &[C64]) -> Option<(DVector<C64>, f64, f64)> {
    let r = bae_residual_at(p, colors, w).ok()?;
    let max_r = r.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let g = DVector::from_iterator(w.len(), r.iter().zip(w).map(|(rj, wj)| rj * point_factor(p, *wj).0));
    let merit = g.norm();
    (merit.is_finite() && max_r.is_finite()).then_some((g, merit, max_r))
}

/// `q(w) = Π_i (w - z_i)` and `q'(w)`.
fn point_factor(p: &GaudinProblem<C64>, w: C64) -> (C64, C64) {
    p.points().iter().fold((C64::new(1.0, 0.0), C64::new(0.0, 0.0)), |(q, dq), z| {
        (q * (w - z), dq * (w - z) + q)
    })
}

/// Roots farther out than this multiple of the point spread count as escaped.
const ESCAPE_FACTOR: f64 = 1e4;

pub(crate) fn newton_from(
    p: &GaudinProblem<C64>,
    colors: &ColorAssignment,
    start: &[C64],
    cfg: &SolverConfig,
) -> Option<Vec<C64>> {
    let m = start.len();
    let escape = ESCAPE_FACTOR * (1.0 + p.points().iter().map(|x| x.norm()).fold(0.0, f64::max));
    let mut w = start.to_vec();
    let (mut g, mut merit, mut max_r) = scaled_system(p, colors, &w)?;
    for _ in 0..cfg.max_iter {
        if w.iter().any(|x| x.norm() > escape) {
            return None;
        }
        if max_r < cfg.tol {
            return Some(w);
        }
        let jac = bae_jacobian_at(p, colors, &w).ok()?;
        let r = bae_residual_at(p, colors, &w).ok()?;
        let jm = DMatrix::from_fn(m, m, |a, b| {
            let (q, dq) = point_factor(p, w[a]);
            let diag = if a == b { r[a] * dq } else { C64::new(0.0, 0.0) };
            jac[a][b] * q + diag
        });
        let step = jm.lu().solve(&g)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<C64> = w.iter().zip(step.iter()).map(|(x, d)| x - d * t).collect();
            if let Some(next) = scaled_system(p, colors, &trial) {
                if next.1 < merit {
                    accepted = Some((trial, next));
                    break;
                }
            }
            t *= 0.5;
        }
        let (nw, next) = accepted?;
        w = nw;
        (g, merit, max_r) = next;
    }
    (max_r < cfg.tol).then_some(w)
}

/// Max-norm distance minimized over permutations of same-colored roots.
fn orbit_distance(colors: &ColorAssignment, a: &[C64], b: &[C64]) -> f64 {
    let mut worst: f64 = 0.0;
    for c in distinct_colors(colors) {
        let slots: Vec<usize> = (0..colors.len()).filter(|&j| colors.0[j] == c).collect();
        let xa: Vec<C64> = slots.iter().map(|&j| a[j]).collect();
        let xb: Vec<C64> = slots.iter().map(|&j| b[j]).collect();
        worst = worst.max(best_matching(&xa, &xb));
    }
    worst
}

fn best_matching(a: &[C64], b: &[C64]) -> f64 {
    fn go(a: &[C64], b: &[C64], used: &mut Vec<bool>, i: usize, cur: f64, best: &mut f64) {
        if cur >= *best {
            return;
        }
        if i == a.len() {
            *best = cur;
            return;
        }
        for k in 0..b.len() {
            if !used[k] {
                used[k] = true;
                go(a, b, used, i + 1, cur.max((a[i] - b[k]).norm()), best);
                used[k] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
    best
}

fn single_linkage(found: &[BetheSolution], colors: &ColorAssignment, radius: f64) -> Vec<Vec<usize>> {
    let n = found.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if orbit_distance(colors, &found[i].w, &found[j].w) < radius {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = HashMap::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        let g = *slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
}

fn is_collision(p: &GaudinProblem<C64>, s: &BetheSolution) -> bool {
    let m = s.m();
    (0..m).any(|j| {
        p.points().iter().any(|z| (s.w[j] - z).norm() < COLLISION_RADIUS)
            || (j + 1..m).any(|k| s.colors.0[j] == s.colors.0[k] && (s.w[j] - s.w[k]).norm() < COLLISION_RADIUS)
    })
}

/// `μ = Σ λ_i - Σ_j α_{i_j}`.
pub fn solution_weight<S: Scalar>(p: &GaudinProblem<S>, colors: &ColorAssignment) -> Weight {
    let rd = p.root_data();
    (0..colors.len()).fold(p.total_weight(), |acc, j| acc.sub(&rd.simple_root(colors.index(j))))
}

/// Ordered-partition formula
/// `φ = (-1)^m Σ Π_k F_{i^k_1}…F_{i^k_a} v_{λ_k} / ((w_{i^k_1}-w_{i^k_2})…(w_{i^k_a}-z_k))`,
/// evaluated in the field of the roots.
pub fn bethe_vector_at<S: Scalar>(
    p: &GaudinProblem<S>,
    colors: &ColorAssignment,
    w: &[S],
    t: &TensorRep,
) -> Result<Vec<S>, BetheError> {
    check_roots(p, colors, w)?;
    let n = p.n_sites();
    let m = w.len();
    if m > MAX_BETHE_VECTOR_POINTS {
        return Err(BetheError::TooManyRoots(m));
    }
    if t.n_sites() != n || t.factors().iter().zip(p.weights()).any(|(f, l)| f.highest_weight() != l) {
        return Err(BetheError::FactorMismatch);
    }
    // F_{c_1}…F_{c_a} v_λ at each site, keyed by color string
    let mut strings: Vec<HashMap<Vec<usize>, Vec<Rational>>> = vec![HashMap::new(); n];
    let mut site_vector = |site: usize, cols: &[usize]| -> Vec<Rational> {
        if let Some(v) = strings[site].get(cols) {
            return v.clone();
        }
        let rep = &t.factors()[site];
        let mut v = vec![int(0); rep.dim()];
        v[rep.highest_vector()] = int(1);
        for &c in cols.iter().rev() {
            v = rep.f(c).apply(&v);
        }
        strings[site].insert(cols.to_vec(), v.clone());
        v
    };

    let mut phi = vec![S::zero(); t.dim()];
    let z = p.points();
    for perm in permutations(m) {
        for sizes in compositions(m, n) {
            let mut coeff = S::one();
            let mut factors: Vec<Vec<Rational>> = Vec::with_capacity(n);
            let mut start = 0;
            let mut vanishes = false;
            for (site, &a) in sizes.iter().enumerate() {
                let block = &perm[start..start + a];
                start += a;
                for pair in block.windows(2) {
                    coeff = coeff * (w[pair[0]].clone() - w[pair[1]].clone()).recip();
                }
                if let Some(&last) = block.last() {
                    coeff = coeff * (w[last].clone() - z[site].clone()).recip();
                }
                let cols: Vec<usize> = block.iter().map(|&j| colors.index(j)).collect();
                let v = site_vector(site, &cols);
                if v.iter().all(|x| x == &int(0)) {
                    vanishes = true;
                    break;
                }
                factors.push(v);
            }
            if vanishes {
                continue;
            }
            accumulate_kron(&mut phi, &factors, &coeff);
        }
    }
    if m % 2 == 1 {
        for x in phi.iter_mut() {
            *x = -x.clone();
        }
    }
    Ok(phi)
}

pub fn bethe_vector<S: Scalar>(p: &GaudinProblem<S>, s: &BetheSolution, t: &TensorRep) -> Result<Vec<C64>, BetheError> {
    bethe_vector_at(&p.to_complex(), &s.colors, &s.w, t)
}

/// `phi += coeff · (v_0 ⊗ v_1 ⊗ …)` with site 0 most significant.
fn accumulate_kron<S: Scalar>(phi: &mut [S], factors: &[Vec<Rational>], coeff: &S) {
    let mut entries: Vec<(usize, S)> = vec![(0, coeff.clone())];
    for v in factors {
        let d = v.len();
        let mut next = Vec::new();
        for (idx, c) in &entries {
            for (k, x) in v.iter().enumerate() {
                if x != &int(0) {
                    next.push((idx * d + k, c.clone() * S::from_rational(x)));
                }
            }
        }
        entries = next;
    }
    for (idx, c) in entries {
        phi[idx] = phi[idx].clone() + c;
    }
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            let swap = if k.is_multiple_of(2) { i } else { 0 };
            cur.swap(swap, k - 1);
        }
    }
    heap(m, &mut cur, &mut out);
    out
}

/// Weak compositions of `m` into `parts` nonnegative parts.
fn compositions(m: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if m == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if parts == 1 {
        return vec![vec![m]];
    }
    let mut out = Vec::new();
    for first in 0..=m {
        for mut rest in compositions(m - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use proptest::prelude::*;

    fn a1(points: Vec<Rational>, lams: &[i64]) -> GaudinProblem<Rational> {
        GaudinProblem::new(
            RootData::type_a(1).unwrap(),
            points,
            lams.iter().map(|&l| Weight::from_ints(&[l])).collect(),
        )
        .unwrap()
    }

    fn ones(m: usize) -> ColorAssignment {
        ColorAssignment::new(1, vec![1; m]).unwrap()
    }

    #[test]
    fn residual_examples() {
        let p = a1(vec![rat(1, 3), rat(5, 2)], &[1, 1]);
        let mid = (rat(1, 3) + rat(5, 2)) / int(2);
        assert_eq!(bae_residual_at(&p, &ones(1), &[mid]).unwrap(), vec![int(0)]);
        let q = a1(vec![int(1)], &[2]);
        assert_eq!(bae_residual_at(&q, &ones(1), &[int(4)]).unwrap(), vec![rat(2, 3)]);
        assert!(bae_residual_at(&q, &ColorAssignment::empty(), &[]).unwrap().is_empty());
        assert!(bae_residual_at(&q, &ones(1), &[int(1)]).is_err());
        assert!(ColorAssignment::new(1, vec![2]).is_err());
    }

    #[test]
    fn jacobian_at_midpoint() {
        let (z1, z2) = (rat(-1, 2), rat(7, 3));
        let p = a1(vec![z1.clone(), z2.clone()], &[1, 1]);
        let mid = (z1.clone() + z2.clone()) / int(2);
        let j = bae_jacobian_at(&p, &ones(1), &[mid]).unwrap();
        assert_eq!(j[0][0], int(-8) / ((z1.clone() - z2.clone()) * (z1 - z2)));
        assert!(bae_jacobian_at(&p, &ColorAssignment::empty(), &[]).unwrap().is_empty());
    }

    #[test]
    fn residual_is_pairing_of_expansion() {
        let rd = RootData::type_a(2).unwrap();
        let p = GaudinProblem::new(
            rd.clone(),
            vec![int(0), int(2), rat(-3, 2)],
            vec![Weight::from_ints(&[1, 0]), Weight::from_ints(&[0, 1]), Weight::from_ints(&[1, 1])],
        )
        .unwrap();
        let colors = ColorAssignment::new(2, vec![1, 2, 1]).unwrap();
        let w = vec![rat(1, 5), rat(4, 3), rat(-7, 4)];
        let r = bae_residual_at(&p, &colors, &w).unwrap();
        for j in 0..3 {
            let mu = expansion_at_root(&p, &colors, &w, j).unwrap();
            assert_eq!(mu[colors.index(j)], r[j]);
        }
    }

    #[test]
    fn solver_examples() {
        let p = a1(vec![int(0), int(1)], &[1, 1]);
        let out = solve_bae(&p, &ones(1), &SolverConfig::default());
        assert_eq!(out.solutions.len(), 1);
        assert!((out.solutions[0].w[0] - C64::new(0.5, 0.0)).norm() < 1e-12);
        assert!(out.solutions[0].residual < 1e-12);

        let p3 = a1(vec![int(0), int(1), int(2)], &[1, 1, 1]);
        let out = solve_bae(&p3, &ones(1), &SolverConfig::default());
        let roots: Vec<f64> = out.solutions.iter().map(|s| s.w[0].re).collect();
        let s = 1.0 / 3f64.sqrt();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - (1.0 - s)).abs() < 1e-12 && (roots[1] - (1.0 + s)).abs() < 1e-12);

        let p1 = a1(vec![int(0)], &[2]);
        assert!(solve_bae(&p1, &ones(1), &SolverConfig::default()).solutions.is_empty());
    }

    #[test]
    fn two_roots_spin_one_chain() {
        let p = a1(vec![int(0), int(1), int(3)], &[2, 2, 2]);
        let t = p.tensor_irreducibles().unwrap();
        let mu = solution_weight(&p, &ones(2));
        let expected = t.singular_space(&mu).len();
        let out = solve_bae(&p, &ones(2), &SolverConfig { seed: 3, ..Default::default() });
        assert_eq!(out.solutions.len(), expected);
        for s in &out.solutions {
            assert!(s.residual < 1e-12);
        }
    }

    #[test]
    fn solver_is_thread_independent() {
        let p = a1(vec![int(0), int(1), int(2), int(4)], &[1, 1, 1, 1]);
        let one = solve_bae(&p, &ones(2), &SolverConfig { threads: Some(1), ..Default::default() });
        let four = solve_bae(&p, &ones(2), &SolverConfig { threads: Some(4), ..Default::default() });
        let a = serde_json::to_string(&one).unwrap();
        let b = serde_json::to_string(&four).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn weights_of_solutions() {
        let p = a1(vec![int(0), int(1)], &[1, 1]);
        assert_eq!(solution_weight(&p, &ones(1)), Weight::from_ints(&[0]));
        assert_eq!(solution_weight(&p, &ColorAssignment::empty()), Weight::from_ints(&[2]));
        let rd = RootData::type_a(2).unwrap();
        let q = GaudinProblem::new(rd, vec![int(0), int(1)], vec![Weight::from_ints(&[1, 0]), Weight::from_ints(&[0, 1])])
            .unwrap();
        let colors = ColorAssignment::new(2, vec![1, 2]).unwrap();
        assert_eq!(solution_weight(&q, &colors), Weight::from_ints(&[0, 0]));
    }

    #[test]
    fn bethe_vector_small_cases() {
        let (z1, z2) = (int(0), int(1));
        let p = a1(vec![z1.clone(), z2.clone()], &[1, 1]);
        let t = p.tensor_irreducibles().unwrap();
        let empty = bethe_vector_at(&p, &ColorAssignment::empty(), &[], &t).unwrap();
        assert_eq!(empty, vec![int(1), int(0), int(0), int(0)]);
        let w = rat(1, 3);
        let phi = bethe_vector_at(&p, &ones(1), std::slice::from_ref(&w), &t).unwrap();
        // basis v+v+, v+v-, v-v+, v-v-
        let f_site = |site: usize| t.site_operator(site, t.factors()[site].f(0));
        let mut expected = vec![int(0); 4];
        for (site, z) in [(0, &z1), (1, &z2)] {
            let v = f_site(site).apply(&empty);
            let c = -(w.clone() - z.clone()).recip();
            for k in 0..4 {
                expected[k] = expected[k].clone() + c.clone() * v[k].clone();
            }
        }
        assert_eq!(phi, expected);
        let mid = bethe_vector_at(&p, &ones(1), &[rat(1, 2)], &t).unwrap();
        assert_eq!(mid[1].clone(), -mid[2].clone());
        assert_eq!(mid[0], int(0));
        assert_eq!(mid[3], int(0));
    }

    fn f_of_w(t: &TensorRep, z: &[Rational], w: &Rational) -> crate::linalg::SparseMatrix<Rational> {
        (0..t.n_sites()).fold(crate::linalg::SparseMatrix::zeros(t.dim(), t.dim()), |acc, i| {
            acc.add(&t.site_operator(i, t.factors()[i].f(0)).scale(&(w.clone() - z[i].clone()).recip()))
        })
    }

    #[test]
    fn bethe_vector_matches_product_form() {
        let z = vec![int(0), rat(3, 2), int(-2)];
        let p = a1(z.clone(), &[1, 2, 1]);
        let t = p.tensor_irreducibles().unwrap();
        let top = bethe_vector_at(&p, &ColorAssignment::empty(), &[], &t).unwrap();
        for ws in [vec![rat(1, 7)], vec![rat(1, 7), rat(5, 3)], vec![rat(1, 7), rat(5, 3), rat(-9, 4)]] {
            let phi = bethe_vector_at(&p, &ones(ws.len()), &ws, &t).unwrap();
            let mut prod = top.clone();
            for w in ws.iter().rev() {
                prod = f_of_w(&t, &z, w).apply(&prod);
            }
            let sign = if ws.len() % 2 == 1 { int(-1) } else { int(1) };
            let prod: Vec<Rational> = prod.into_iter().map(|x| x * sign.clone()).collect();
            assert_eq!(phi, prod);
        }
    }

    #[test]
    fn on_shell_vector_is_singular() {
        let p = a1(vec![int(0), int(1), int(2)], &[1, 1, 1]);
        let t = p.tensor_irreducibles().unwrap();
        let e = t.total_e(0).to_complex();
        for s in solve_bae(&p, &ones(1), &SolverConfig::default()).solutions {
            let phi = DVector::from_vec(bethe_vector(&p, &s, &t).unwrap());
            assert!((&e * &phi).norm() / phi.norm() < 1e-9);
            let off = s.perturbed(&p, C64::new(0.1, 0.0)).unwrap();
            let psi = DVector::from_vec(bethe_vector(&p, &off, &t).unwrap());
            assert!((&e * &psi).norm() / psi.norm() > 1e-3);
        }
    }

    #[test]
    fn a2_bethe_vector_is_singular() {
        let rd = RootData::type_a(2).unwrap();
        let p = GaudinProblem::new(rd, vec![int(0), int(1)], vec![Weight::from_ints(&[1, 0]), Weight::from_ints(&[0, 1])])
            .unwrap();
        let t = p.tensor_irreducibles().unwrap();
        let colors = ColorAssignment::new(2, vec![1, 2]).unwrap();
        let out = solve_bae(&p, &colors, &SolverConfig::default());
        assert_eq!(out.solutions.len(), t.singular_space(&solution_weight(&p, &colors)).len());
        for s in &out.solutions {
            let phi = DVector::from_vec(bethe_vector(&p, s, &t).unwrap());
            assert!(phi.norm() > 1e-6);
            for i in 0..2 {
                let e = t.total_e(i).to_complex();
                assert!((&e * &phi).norm() / phi.norm() < 1e-9);
            }
        }
    }

    fn rational_in(lo: i64, hi: i64) -> impl Strategy<Value = Rational> {
        (lo * 12..hi * 12).prop_map(|n| rat(n, 12))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn same_color_symmetry(a in rational_in(-3, 3), b in rational_in(-3, 3)) {
            prop_assume!(a != b);
            let p = a1(vec![rat(1, 5), rat(7, 2)], &[2, 1]);
            prop_assume!(p.points().iter().all(|z| z != &a && z != &b));
            let t = p.tensor_irreducibles().unwrap();
            let x = bethe_vector_at(&p, &ones(2), &[a.clone(), b.clone()], &t).unwrap();
            let y = bethe_vector_at(&p, &ones(2), &[b, a], &t).unwrap();
            prop_assert_eq!(x, y);
        }

        #[test]
        fn jacobian_matches_difference_quotients(
            w in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3),
        ) {
            let rd = RootData::type_a(2).unwrap();
            let p = GaudinProblem::new(
                rd,
                vec![C64::new(0.0, 0.0), C64::new(1.0, 0.5), C64::new(-1.5, 0.0)],
                vec![Weight::from_ints(&[1, 0]), Weight::from_ints(&[2, 1]), Weight::from_ints(&[0, 1])],
            ).unwrap();
            let colors = ColorAssignment::new(2, vec![1, 2, 2]).unwrap();
            let w: Vec<C64> = w.into_iter().map(|(a, b)| C64::new(a, b)).collect();
            let close = w.iter().enumerate().any(|(j, x)| {
                p.points().iter().any(|z| (x - z).norm() < 0.2) || w[j + 1..].iter().any(|y| (x - y).norm() < 0.2)
            });
            prop_assume!(!close);
            let jac = bae_jacobian_at(&p, &colors, &w).unwrap();
            let h = 1e-6;
            for k in 0..3 {
                let mut plus = w.clone();
                let mut minus = w.clone();
                plus[k] += h;
                minus[k] -= h;
                let rp = bae_residual_at(&p, &colors, &plus).unwrap();
                let rm = bae_residual_at(&p, &colors, &minus).unwrap();
                for j in 0..3 {
                    let fd = (rp[j] - rm[j]) / (2.0 * h);
                    let scale = jac[j][k].norm().max(1.0);
                    prop_assert!((fd - jac[j][k]).norm() / scale < 1e-6);
                }
            }
        }
    }
}
