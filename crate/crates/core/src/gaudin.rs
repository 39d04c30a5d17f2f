//! Quadratic Gaudin Hamiltonians, Casimir operators, the Segal-Sugawara
//! generating function, and a brute-force joint spectrum on singular weight
//! spaces.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::liealg::{RootData, Weight};
use crate::linalg::SparseMatrix;
use crate::repmod::{RepError, Representation, TensorRep};
use crate::scalar::{int, Rational, Scalar, C64, DEFAULT_COLLISION_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaudinError {
    #[error("marked points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("weight at site {0} is not dominant integral")]
    NotDominant(usize),
    #[error("{points} points but {weights} weights")]
    LengthMismatch { points: usize, weights: usize },
    #[error("site {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("spectral parameter coincides with marked point {0}")]
    ParameterAtPoint(usize),
    #[error("tensor factors do not match the problem weights")]
    FactorMismatch,
    #[error("singular space of dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error(transparent)]
    Rep(#[from] RepError),
}

/// Marked points with highest weights attached.
#[derive(Debug, Clone)]
pub struct GaudinProblem<S> {
    root_data: RootData,
    points: Vec<S>,
    weights: Vec<Weight>,
    lambda_inf: Option<Weight>,
}

impl<S: Scalar> GaudinProblem<S> {
    pub fn new(root_data: RootData, points: Vec<S>, weights: Vec<Weight>) -> Result<Self, GaudinError> {
        Self::with_tolerance(root_data, points, weights, DEFAULT_COLLISION_TOL)
    }

    /// Points closer than `tol` (complex field) count as coincident.
    pub fn with_tolerance(
        root_data: RootData,
        points: Vec<S>,
        weights: Vec<Weight>,
        tol: f64,
    ) -> Result<Self, GaudinError> {
        if points.len() != weights.len() {
            return Err(GaudinError::LengthMismatch { points: points.len(), weights: weights.len() });
        }
        for (i, w) in weights.iter().enumerate() {
            if w.rank() != root_data.rank() || !w.is_dominant_integral() {
                return Err(GaudinError::NotDominant(i));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] || points[i].collides_with(&points[j], tol) {
                    return Err(GaudinError::CoincidentPoints(i, j));
                }
            }
        }
        Ok(GaudinProblem { root_data, points, weights, lambda_inf: None })
    }

    pub fn with_lambda_inf(mut self, lambda_inf: Weight) -> Self {
        self.lambda_inf = Some(lambda_inf);
        self
    }

    pub fn root_data(&self) -> &RootData {
        &self.root_data
    }

    pub fn points(&self) -> &[S] {
        &self.points
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn lambda_inf(&self) -> Option<&Weight> {
        self.lambda_inf.as_ref()
    }

    pub fn n_sites(&self) -> usize {
        self.points.len()
    }

    /// `Σ λ_i`.
    pub fn total_weight(&self) -> Weight {
        self.weights.iter().fold(Weight::zero(self.root_data.rank()), |acc, w| acc.add(w))
    }

    /// Same problem with points converted into the complex field.
    pub fn to_complex(&self) -> GaudinProblem<C64> {
        GaudinProblem {
            root_data: self.root_data.clone(),
            points: self.points.iter().map(|z| z.to_c64()).collect(),
            weights: self.weights.clone(),
            lambda_inf: self.lambda_inf.clone(),
        }
    }

    /// `⊗ V_{λ_i}`.
    pub fn tensor_irreducibles(&self) -> Result<TensorRep, GaudinError> {
        let reps = self
            .weights
            .iter()
            .map(|w| Representation::irreducible(&self.root_data, w))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TensorRep::new(reps)?)
    }

    fn check_tensor(&self, t: &TensorRep) -> Result<(), GaudinError> {
        let ok = t.n_sites() == self.n_sites()
            && t.factors().iter().zip(&self.weights).all(|(f, w)| f.highest_weight() == w);
        if ok {
            Ok(())
        } else {
            Err(GaudinError::FactorMismatch)
        }
    }
}

/// Dual bases `(J_a, J^a)` of `sl_n` under the trace form of the defining
/// representation, realised as matrices in a given representation.
#[derive(Debug, Clone)]
pub struct InvariantForm {
    pub pairs: Vec<(SparseMatrix<Rational>, SparseMatrix<Rational>)>,
}

impl InvariantForm {
    pub fn new(rep: &Representation) -> Self {
        let rd = rep.root_data();
        let n = rd.n();
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    // tr(E_ab E_ba) = 1
                    pairs.push((rep.root_vector(a, b), rep.root_vector(b, a)));
                }
            }
        }
        // tr(H_i H_j) = a_ij, so the dual of H_i is Σ_j (A^{-1})_ij H_j
        let cartan: Vec<Vec<Rational>> =
            rd.cartan().iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        let inv = crate::linalg::invert(&cartan).expect("Cartan matrix is invertible");
        for i in 0..rd.rank() {
            let dual = (0..rd.rank()).fold(SparseMatrix::zeros(rep.dim(), rep.dim()), |acc, j| {
                acc.add(&rep.h(j).scale(&inv[i][j]))
            });
            pairs.push((rep.h(i).clone(), dual));
        }
        InvariantForm { pairs }
    }
}

/// `Δ = ½ Σ_a J_a J^a`.
pub fn casimir_matrix(rep: &Representation) -> SparseMatrix<Rational> {
    let form = InvariantForm::new(rep);
    let sum = form
        .pairs
        .iter()
        .fold(SparseMatrix::zeros(rep.dim(), rep.dim()), |acc, (a, b)| acc.add(&a.mul(b)));
    sum.scale(&Rational::new(1.into(), 2.into()))
}

/// Exact two-site operators `Ω^{(ij)} = Σ_a J_a^{(i)} J^{a(j)}` and site
/// Casimirs on a tensor product, cached for repeated assembly.
#[derive(Debug, Clone)]
pub struct SiteOperators {
    dim: usize,
    // per site, per dual pair: (J_a^{(s)}, J^{a(s)})
    lifted: Vec<Vec<(SparseMatrix<Rational>, SparseMatrix<Rational>)>>,
    casimirs: Vec<SparseMatrix<Rational>>,
}

impl SiteOperators {
    pub fn new(t: &TensorRep) -> Self {
        let lifted = t
            .factors()
            .iter()
            .enumerate()
            .map(|(s, rep)| {
                InvariantForm::new(rep)
                    .pairs
                    .iter()
                    .map(|(a, b)| (t.site_operator(s, a), t.site_operator(s, b)))
                    .collect()
            })
            .collect();
        let casimirs = t
            .factors()
            .iter()
            .enumerate()
            .map(|(s, rep)| t.site_operator(s, &casimir_matrix(rep)))
            .collect();
        SiteOperators { dim: t.dim(), lifted, casimirs }
    }

    pub fn n_sites(&self) -> usize {
        self.lifted.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega(&self, i: usize, j: usize) -> SparseMatrix<Rational> {
        self.lifted[i]
            .iter()
            .zip(&self.lifted[j])
            .fold(SparseMatrix::zeros(self.dim, self.dim), |acc, ((a, _), (_, b))| acc.add(&a.mul(b)))
    }

    pub fn site_casimir(&self, i: usize) -> &SparseMatrix<Rational> {
        &self.casimirs[i]
    }

    /// `Σ_a J_a^{(i)}` against `J^a` summed over all sites.
    fn lifted_pairs(&self, site: usize) -> &[(SparseMatrix<Rational>, SparseMatrix<Rational>)] {
        &self.lifted[site]
    }
}

fn to_field<S: Scalar>(m: &SparseMatrix<Rational>) -> SparseMatrix<S> {
    m.map(S::from_rational)
}

/// `Ξ_i = Σ_{j≠i} Ω^{(ij)} / (z_i - z_j)`.
pub fn gaudin_hamiltonian<S: Scalar>(
    p: &GaudinProblem<S>,
    t: &TensorRep,
    i: usize,
) -> Result<SparseMatrix<S>, GaudinError> {
    p.check_tensor(t)?;
    let ops = SiteOperators::new(t);
    hamiltonian_from(p, &ops, i)
}

/// As [`gaudin_hamiltonian`], reusing precomputed site operators.
pub fn hamiltonian_from<S: Scalar>(
    p: &GaudinProblem<S>,
    ops: &SiteOperators,
    i: usize,
) -> Result<SparseMatrix<S>, GaudinError> {
    let n = p.n_sites();
    if i >= n {
        return Err(GaudinError::SiteOutOfRange { site: i, n });
    }
    let z = p.points();
    let mut acc = SparseMatrix::zeros(ops.dim(), ops.dim());
    for j in (0..n).filter(|&j| j != i) {
        let c = (z[i].clone() - z[j].clone()).recip();
        acc = acc.add(&to_field::<S>(&ops.omega(i, j)).scale(&c));
    }
    Ok(acc)
}

pub fn all_hamiltonians<S: Scalar>(
    p: &GaudinProblem<S>,
    t: &TensorRep,
) -> Result<Vec<SparseMatrix<S>>, GaudinError> {
    p.check_tensor(t)?;
    let ops = SiteOperators::new(t);
    (0..p.n_sites()).map(|i| hamiltonian_from(p, &ops, i)).collect()
}

/// Both sides of the Segal-Sugawara identity at spectral parameter `u`.
#[derive(Debug, Clone)]
pub struct SugawaraPair<S> {
    /// `½ Σ_a 𝕁^a(u) 𝕁_a(u)` with `𝕁^a(u) = -Σ_i J^{a(i)} / (z_i - u)`.
    pub direct: SparseMatrix<S>,
    /// `Σ_i Ξ_i/(u - z_i) + Σ_i Δ^{(i)}/(u - z_i)^2`.
    pub partial_fractions: SparseMatrix<S>,
}

pub fn sugawara_generating<S: Scalar>(
    p: &GaudinProblem<S>,
    t: &TensorRep,
    u: &S,
) -> Result<SugawaraPair<S>, GaudinError> {
    p.check_tensor(t)?;
    if let Some(i) = p.points().iter().position(|z| z == u) {
        return Err(GaudinError::ParameterAtPoint(i));
    }
    let ops = SiteOperators::new(t);
    let n = p.n_sites();
    let dim = ops.dim();
    let z = p.points();
    let weights: Vec<S> = z.iter().map(|zi| -(zi.clone() - u.clone()).recip()).collect();

    let n_pairs = ops.lifted_pairs(0).len();
    let mut direct = SparseMatrix::zeros(dim, dim);
    for a in 0..n_pairs {
        let mut upper = SparseMatrix::zeros(dim, dim);
        let mut lower = SparseMatrix::zeros(dim, dim);
        for s in 0..n {
            let (ja, jup) = &ops.lifted_pairs(s)[a];
            upper = upper.add(&to_field::<S>(jup).scale(&weights[s]));
            lower = lower.add(&to_field::<S>(ja).scale(&weights[s]));
        }
        // anti-homomorphism: J_{a,-1} J^a_{-1} v_0 ↦ 𝕁^a 𝕁_a
        direct = direct.add(&upper.mul(&lower));
    }
    let half = S::from_rational(&Rational::new(1.into(), 2.into()));
    let direct = direct.scale(&half);

    let mut rhs = SparseMatrix::zeros(dim, dim);
    for i in 0..n {
        let d = (u.clone() - z[i].clone()).recip();
        rhs = rhs.add(&hamiltonian_from(p, &ops, i)?.scale(&d));
        rhs = rhs.add(&to_field::<S>(ops.site_casimir(i)).scale(&(d.clone() * d)));
    }
    Ok(SugawaraPair { direct, partial_fractions: rhs })
}

/// Casimir of the diagonal action, `½ Σ_{a,i,j} J_a^{(i)} J^{a(j)}`.
pub fn total_casimir(t: &TensorRep) -> SparseMatrix<Rational> {
    let ops = SiteOperators::new(t);
    let n = ops.n_sites();
    let mut acc = SparseMatrix::zeros(ops.dim(), ops.dim());
    for i in 0..n {
        for j in 0..n {
            acc = acc.add(&ops.omega(i, j));
        }
    }
    acc.scale(&Rational::new(1.into(), 2.into()))
}

#[derive(Debug, Clone)]
pub struct SpectrumConfig {
    pub seed: u64,
    pub dim_cap: usize,
    /// relative tolerance for grouping eigenvalues of the random combination
    pub cluster_tol: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { seed: 0x5eed, dim_cap: 400, cluster_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JointEigen {
    /// eigenvalue of each `Ξ_i`
    pub eigenvalues: Vec<C64>,
    /// eigenvector in the full tensor space
    #[serde(skip)]
    pub vector: Vec<C64>,
    /// `‖Ξ_i v - θ_i v‖ / ‖v‖` per site
    pub residuals: Vec<f64>,
    /// dimension of the common eigenspace this vector was drawn from
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRecord {
    pub singular_dim: usize,
    pub entries: Vec<JointEigen>,
    /// the random combination was not diagonalizable
    pub jordan: bool,
    /// some eigenspace stayed degenerate for the quadratic Hamiltonians
    pub degenerate: bool,
    /// only quadratic Hamiltonians were used and the rank exceeds one
    pub quadratic_only: bool,
}

impl SpectrumRecord {
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().flat_map(|e| e.residuals.iter().copied()).fold(0.0, f64::max)
    }
}

/// Joint eigenvalues of `Ξ_1..Ξ_N` on the singular vectors of weight `μ`.
pub fn joint_spectrum<S: Scalar>(
    p: &GaudinProblem<S>,
    t: &TensorRep,
    mu: &Weight,
    cfg: &SpectrumConfig,
) -> Result<SpectrumRecord, GaudinError> {
    p.check_tensor(t)?;
    let quadratic_only = p.root_data().rank() > 1;
    let sing = t.singular_space(mu);
    let k = sing.len();
    if k > cfg.dim_cap {
        return Err(GaudinError::DimensionCap { dim: k, cap: cfg.dim_cap });
    }
    if k == 0 {
        return Ok(SpectrumRecord { singular_dim: 0, entries: Vec::new(), jordan: false, degenerate: false, quadratic_only });
    }
    let ops = SiteOperators::new(t);
    let hams: Vec<DMatrix<C64>> = (0..p.n_sites())
        .map(|i| hamiltonian_from(p, &ops, i).map(|h| h.to_complex()))
        .collect::<Result<_, _>>()?;

    let full = sing.full_vectors();
    let dim = t.dim();
    let basis = DMatrix::from_fn(dim, k, |r, c| full[c][r].to_c64());
    let gram = basis.adjoint() * &basis;
    let gram_inv = gram.try_inverse().expect("singular basis is linearly independent");
    let restricted: Vec<DMatrix<C64>> =
        hams.iter().map(|h| &gram_inv * basis.adjoint() * h * &basis).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut attempt = 0;
    loop {
        let coeffs: Vec<f64> = (0..restricted.len()).map(|_| rng.gen_range(0.5..1.5)).collect();
        let combo = restricted
            .iter()
            .zip(&coeffs)
            .fold(DMatrix::zeros(k, k), |acc, (r, &c)| acc + r * C64::new(c, 0.0));
        let groups = eigenspaces(&combo, cfg.cluster_tol);
        let jordan = groups.iter().any(|g| g.geometric < g.algebraic);
        let degenerate = groups.iter().any(|g| {
            g.vectors.ncols() > 1 && restricted.iter().any(|r| !acts_as_scalar(r, &g.vectors, cfg.cluster_tol))
        });
        if degenerate && attempt == 0 {
            attempt += 1;
            continue;
        }
        let mut entries = Vec::new();
        for g in &groups {
            for c in 0..g.vectors.ncols() {
                let v = g.vectors.column(c).into_owned();
                let u = &basis * &v;
                let unorm = u.norm();
                let mut eigenvalues = Vec::new();
                let mut residuals = Vec::new();
                for h in &hams {
                    let hu = h * &u;
                    let theta = u.dotc(&hu) / C64::new(unorm * unorm, 0.0);
                    residuals.push((hu - &u * theta).norm() / unorm);
                    eigenvalues.push(theta);
                }
                entries.push(JointEigen {
                    eigenvalues,
                    vector: normalize_phase(u).iter().copied().collect(),
                    residuals,
                    multiplicity: g.vectors.ncols(),
                });
            }
        }
        entries.sort_by(|a, b| {
            for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
                let o = x.canonical_cmp(y);
                if o != std::cmp::Ordering::Equal {
                    return o;
                }
            }
            std::cmp::Ordering::Equal
        });
        return Ok(SpectrumRecord { singular_dim: k, entries, jordan, degenerate, quadratic_only });
    }
}

struct EigenGroup {
    algebraic: usize,
    geometric: usize,
    vectors: DMatrix<C64>,
}

fn eigenspaces(m: &DMatrix<C64>, rel_tol: f64) -> Vec<EigenGroup> {
    let k = m.nrows();
    let scale = m.norm().max(1e-300);
    let (_, tri) = nalgebra::Schur::new(m.clone()).unpack();
    let mut eig: Vec<C64> = (0..k).map(|i| tri[(i, i)]).collect();
    eig.sort_by(|a, b| a.canonical_cmp(b));
    let tol = rel_tol.sqrt() * scale;
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for e in eig {
        match clusters.iter_mut().find(|c| (c[0] - e).norm() < tol) {
            Some(c) => c.push(e),
            None => clusters.push(vec![e]),
        }
    }
    clusters
        .into_iter()
        .map(|c| {
            let mean = c.iter().sum::<C64>() / C64::new(c.len() as f64, 0.0);
            let shifted = m - DMatrix::identity(k, k) * mean;
            let svd = shifted.svd(false, true);
            let v_t = svd.v_t.expect("requested right singular vectors");
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
            let null_tol = tol.max(1e-10 * scale);
            let null: Vec<usize> = order
                .iter()
                .copied()
                .take(c.len())
                .filter(|&i| svd.singular_values[i] < null_tol)
                .collect();
            let vectors = DMatrix::from_fn(k, null.len(), |r, col| v_t[(null[col], r)].conj());
            EigenGroup { algebraic: c.len(), geometric: null.len().max(1), vectors }
        })
        .collect()
}

fn acts_as_scalar(r: &DMatrix<C64>, space: &DMatrix<C64>, rel_tol: f64) -> bool {
    let image = r * space;
    let coeffs = space.adjoint() * &image;
    let theta = coeffs.trace() / C64::new(space.ncols() as f64, 0.0);
    let resid = (image - space * theta).norm();
    resid <= rel_tol.sqrt() * r.norm().max(1.0)
}

/// Rotates a vector so its largest entry is real and positive.
fn normalize_phase(v: DVector<C64>) -> DVector<C64> {
    let Some((_, big)) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
    else {
        return v;
    };
    if big.norm() == 0.0 {
        return v;
    }
    let phase = big.conj() / C64::new(big.norm(), 0.0);
    v * phase / C64::new(1.0, 0.0)
}
