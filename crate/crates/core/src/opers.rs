//! Cartan connections and their Miura transforms.
//!
//! A type `A_{n-1}` oper is stored through the scalar operator
//! `∂^n + v_1 ∂^{n-2} + … + v_{n-1} = (∂ - u_1)…(∂ - u_n)`.
//! For `n = 2` this is `∂² - q` with `q = u² - u'`, and in general
//! `q = -v_1` plays the same role: its double poles are Casimir values and its
//! simple-pole residues are Gaudin eigenvalues.

use serde::Serialize;
use thiserror::Error;

use crate::bethe::{BetheError, BetheSolution, ColorAssignment};
use crate::gaudin::GaudinProblem;
use crate::liealg::{RootData, Weight};
use crate::ratfun::{DiffOp, Laurent, Mobius, Point, RatFunError, RationalFunction};
use crate::scalar::{int, Rational, Scalar, C64};

/// Tolerance for the traceless check in the complex field.
const TRACE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperError {
    #[error("components do not sum to zero")]
    NotTraceless,
    #[error("need at least two components, got {0}")]
    TooFewComponents(usize),
    #[error("operation needs a rank 2 oper, got rank {0}")]
    NotRankTwo(usize),
    #[error("double pole coefficient does not match the weight {lambda}")]
    ResidueMismatch { lambda: u32 },
    #[error("{got} components for rank {expected}")]
    WrongComponentCount { got: usize, expected: usize },
    #[error(transparent)]
    RatFun(#[from] RatFunError),
    #[error(transparent)]
    Bethe(#[from] BetheError),
}

pub type Result<T> = std::result::Result<T, OperError>;

/// `∂_t + λ(t)` with `λ(t)` an `h*`-valued rational function, stored by its
/// fundamental-weight components.
#[derive(Debug, Clone)]
pub struct CartanConnection<S> {
    root_data: RootData,
    components: Vec<RationalFunction<S>>,
}

impl<S: Scalar> CartanConnection<S> {
    pub fn new(root_data: RootData, components: Vec<RationalFunction<S>>) -> Result<Self> {
        if components.len() != root_data.rank() {
            return Err(OperError::WrongComponentCount { got: components.len(), expected: root_data.rank() });
        }
        Ok(CartanConnection { root_data, components })
    }

    pub fn root_data(&self) -> &RootData {
        &self.root_data
    }

    pub fn components(&self) -> &[RationalFunction<S>] {
        &self.components
    }

    /// Residue at `x` as fundamental-weight coordinates.
    pub fn residue(&self, x: &S) -> Vec<S> {
        self.components.iter().map(|c| c.residue(x)).collect()
    }

    /// Constant term of the expansion at `x`.
    pub fn constant_term(&self, x: &S) -> Vec<S> {
        self.components.iter().map(|c| c.laurent_at(&Point::Finite(x.clone()), 0).coeff(0)).collect()
    }
}

fn weight_as<S: Scalar>(w: &Weight) -> Vec<S> {
    w.coords().iter().map(S::from_rational).collect()
}

/// `λ(t) = Σ_i λ_i/(t - z_i) - Σ_j α_{i_j}/(t - w_j)`.
pub fn cartan_connection_at<S: Scalar>(
    p: &GaudinProblem<S>,
    colors: &ColorAssignment,
    w: &[S],
) -> Result<CartanConnection<S>> {
    crate::bethe::bae_residual_at(p, colors, w)?;
    let rd = p.root_data();
    let mut comps = vec![RationalFunction::zero(); rd.rank()];
    for (z, lam) in p.points().iter().zip(p.weights()) {
        for (k, c) in weight_as::<S>(lam).into_iter().enumerate() {
            comps[k] = comps[k].add(&RationalFunction::simple_pole(z.clone(), c))?;
        }
    }
    for (j, wj) in w.iter().enumerate() {
        let alpha = rd.simple_root(colors.index(j));
        for (k, c) in weight_as::<S>(&alpha).into_iter().enumerate() {
            comps[k] = comps[k].sub(&RationalFunction::simple_pole(wj.clone(), c))?;
        }
    }
    CartanConnection::new(rd.clone(), comps)
}

pub fn cartan_connection<S: Scalar>(p: &GaudinProblem<S>, s: &BetheSolution) -> Result<CartanConnection<C64>> {
    cartan_connection_at(&p.to_complex(), &s.colors, &s.w)
}

/// ε-coordinates `u_1..u_n` (summing to zero), using
/// `ω_k = ε_1 + … + ε_k - (k/n) Σ ε`.
pub fn connection_components<S: Scalar>(c: &CartanConnection<S>) -> Result<Vec<RationalFunction<S>>> {
    let rd = c.root_data();
    let n = rd.n();
    let mut u = vec![RationalFunction::zero(); n];
    for (k, comp) in c.components().iter().enumerate() {
        let eps = rd.epsilon_coords(&rd.fundamental_weight(k));
        for (a, e) in eps.iter().enumerate() {
            if e != &int(0) {
                u[a] = u[a].add(&comp.scale(&S::from_rational(e)))?;
            }
        }
    }
    Ok(u)
}

/// Miura transform of a type `A_{n-1}` connection.
#[derive(Debug, Clone)]
pub struct Oper<S> {
    n: usize,
    v: Vec<RationalFunction<S>>,
}

impl<S: Scalar> Oper<S> {
    /// The rank 2 oper `∂² - q`.
    pub fn from_projective(q: RationalFunction<S>) -> Self {
        Oper { n: 2, v: vec![q.neg()] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `v_k`, the coefficient of `∂^{n-1-k}`, for `k = 1..n-1`.
    pub fn v(&self, k: usize) -> &RationalFunction<S> {
        &self.v[k - 1]
    }

    pub fn coefficients(&self) -> &[RationalFunction<S>] {
        &self.v
    }

    /// `q = -v_1`; for `n = 2` the oper is `∂² - q`.
    pub fn projective(&self) -> RationalFunction<S> {
        self.v[0].neg()
    }

    pub fn as_diffop(&self) -> DiffOp<S> {
        let mut coeffs = vec![RationalFunction::zero(); self.n];
        for (k, vk) in self.v.iter().enumerate() {
            coeffs[self.n - 2 - k] = vk.clone();
        }
        DiffOp::new(self.n, coeffs).expect("order matches coefficient count")
    }
}

/// `u ↦ u² - u'`, returned as the rank 2 oper `∂² - (u² - u')`.
pub fn miura_sl2<S: Scalar>(u: &RationalFunction<S>) -> Result<Oper<S>> {
    let q = u.mul(u)?.sub(&u.derive())?;
    let oper = Oper { n: 2, v: vec![q.neg()] };
    debug_assert!({
        let composed = DiffOp::first_order(u.neg()).compose(&DiffOp::first_order(u.clone()))?;
        let d = composed.coeff(0).sub(oper.v(1))?;
        composed.coeff(1).is_zero() && (d.is_zero() || (!S::EXACT && d.chop(1e-9).is_zero()))
    });
    Ok(oper)
}

/// `(∂ - u_1)…(∂ - u_n) = ∂^n + v_1 ∂^{n-2} + … + v_{n-1}`.
pub fn miura_sln<S: Scalar>(u: &[RationalFunction<S>]) -> Result<Oper<S>> {
    let n = u.len();
    if n < 2 {
        return Err(OperError::TooFewComponents(n));
    }
    let trace = u.iter().try_fold(RationalFunction::zero(), |acc, x| acc.add(x))?;
    let traceless = trace.is_zero() || (!S::EXACT && trace.chop(TRACE_TOL).is_zero());
    if !traceless {
        return Err(OperError::NotTraceless);
    }
    let mut op = DiffOp::identity();
    for uk in u {
        op = op.compose(&DiffOp::first_order(uk.neg()))?;
    }
    debug_assert!({
        let top = op.coeff(n - 1);
        top.is_zero() || (!S::EXACT && top.chop(TRACE_TOL).is_zero())
    });
    let v = (1..n).map(|k| op.coeff(n - 1 - k)).collect();
    Ok(Oper { n, v })
}

/// Full pipeline: connection, ε-components, Miura transform.
pub fn miura_of_connection<S: Scalar>(c: &CartanConnection<S>) -> Result<Oper<S>> {
    miura_sln(&connection_components(c)?)
}

/// Leading Laurent data of an oper at a point.
#[derive(Debug, Clone, Serialize)]
pub struct ResidueRecord<S> {
    /// coefficient of the double pole of `q`
    pub double: S,
    /// coefficient of the simple pole of `q`
    pub simple: S,
    /// negative-order Laurent coefficients of each `v_k` (empty at infinity
    /// for `k > 1`)
    #[serde(skip)]
    pub singular: Vec<Vec<(i64, S)>>,
}

/// `v(φ(s)) φ'(s)²`; the Schwarzian term vanishes for Möbius maps.
pub fn transform_projective_connection<S: Scalar>(
    v: &RationalFunction<S>,
    phi: &Mobius<S>,
) -> Result<RationalFunction<S>> {
    let d = phi.derivative();
    Ok(v.compose_mobius(phi)?.mul(&d)?.mul(&d)?)
}

/// Residue data at a finite point, or at infinity after pulling back by `1/s`.
pub fn oper_residues<S: Scalar>(o: &Oper<S>, x: &Point<S>) -> Result<ResidueRecord<S>> {
    match x {
        Point::Finite(x) => {
            let at = Point::Finite(x.clone());
            let q = o.projective().laurent_at(&at, -1);
            let singular = o.v.iter().map(|vk| vk.laurent_at(&at, -1).singular_part()).collect();
            Ok(ResidueRecord { double: q.coeff(-2), simple: q.coeff(-1), singular })
        }
        Point::Infinity => {
            let pulled = transform_projective_connection(&o.projective(), &Mobius::inversion())?;
            let q = pulled.laurent_at(&Point::Finite(S::zero()), -1);
            Ok(ResidueRecord { double: q.coeff(-2), simple: q.coeff(-1), singular: vec![q.singular_part()] })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport<S> {
    pub regular: bool,
    /// largest magnitude among the negative-order coefficients
    pub max_singular: f64,
    #[serde(skip)]
    pub singular: Vec<Vec<(i64, S)>>,
}

/// Whether every `v_k` is holomorphic at `x` (coefficients below `tol` count
/// as zero in the complex field; the exact field ignores `tol`).
pub fn regularity_check<S: Scalar>(o: &Oper<S>, x: &S, tol: f64) -> RegularityReport<S> {
    let at = Point::Finite(x.clone());
    let singular: Vec<Vec<(i64, S)>> = o.v.iter().map(|vk| vk.laurent_at(&at, -1).singular_part()).collect();
    let max_singular = singular.iter().flatten().map(|(_, c)| c.magnitude()).fold(0.0, f64::max);
    let regular = if S::EXACT {
        singular.iter().flatten().all(|(_, c)| c.is_zero())
    } else {
        max_singular < tol
    };
    RegularityReport { regular, max_singular, singular }
}

/// Frobenius recursion for `∂² - q` at `x` with the smaller exponent `-λ/2`.
/// Returns the resonance obstruction at the exponent gap `λ + 1`: zero
/// exactly when there is no logarithmic solution there.
pub fn frobenius_obstruction<S: Scalar>(o: &Oper<S>, x: &S, lambda: u32, tol: f64) -> Result<Vec<S>> {
    if o.n() != 2 {
        return Err(OperError::NotRankTwo(o.n()));
    }
    let gap = lambda as i64 + 1;
    let q: Laurent<S> = o.projective().laurent_at(&Point::Finite(x.clone()), gap - 2);
    let l = S::from_i64(lambda as i64);
    let expected = l.clone() * (l + S::from_i64(2)) * S::from_rational(&Rational::new(1.into(), 4.into()));
    let diff = q.coeff(-2) - expected;
    let matches = if S::EXACT { diff.is_zero() } else { diff.magnitude() < tol };
    if !matches || q.lowest < -2 {
        return Err(OperError::ResidueMismatch { lambda });
    }
    // a_k k(k - λ - 1) = Σ_{r=1}^{k} q_{r-2} a_{k-r}
    let mut a = vec![S::one()];
    for k in 1..gap {
        let rhs = (1..=k).fold(S::zero(), |acc, r| acc + q.coeff(r - 2) * a[(k - r) as usize].clone());
        let indicial = S::from_i64(k * (k - gap));
        a.push(rhs / indicial);
    }
    let obstruction = (1..=gap).fold(S::zero(), |acc, r| acc + q.coeff(r - 2) * a[(gap - r) as usize].clone());
    Ok(vec![obstruction])
}

/// Eigenvalues of `Ξ_1..Ξ_N` predicted by a Bethe solution: the simple-pole
/// residues of `q` at each marked point.
pub fn predicted_eigenvalues_at<S: Scalar>(
    p: &GaudinProblem<S>,
    colors: &ColorAssignment,
    w: &[S],
) -> Result<Vec<S>> {
    let oper = miura_of_connection(&cartan_connection_at(p, colors, w)?)?;
    let q = oper.projective();
    Ok(p.points().iter().map(|z| q.residue(z)).collect())
}

pub fn predicted_eigenvalues<S: Scalar>(p: &GaudinProblem<S>, s: &BetheSolution) -> Result<Vec<C64>> {
    predicted_eigenvalues_at(&p.to_complex(), &s.colors, &s.w)
}

/// Closed form for `sl2`:
/// `c_i = κ Σ_{j≠i} λ_i λ_j/(z_i - z_j) - Σ_k λ_i/(z_i - w_k)`,
/// with weights read as integers.
pub fn closed_form_eigenvalues<S: Scalar>(p: &GaudinProblem<S>, w: &[S], kappa: &S) -> Vec<S> {
    let (pair, roots) = closed_form_parts(p, w);
    pair.into_iter().zip(roots).map(|(a, b)| kappa.clone() * a - b).collect()
}

/// The cross-term constant `κ` that makes the closed form reproduce an
/// observed eigenvalue `theta` of `Ξ_site`.
pub fn fit_kappa<S: Scalar>(p: &GaudinProblem<S>, w: &[S], site: usize, theta: &S) -> Option<S> {
    let (pair, roots) = closed_form_parts(p, w);
    (!pair[site].is_zero()).then(|| (theta.clone() + roots[site].clone()) / pair[site].clone())
}

fn closed_form_parts<S: Scalar>(p: &GaudinProblem<S>, w: &[S]) -> (Vec<S>, Vec<S>) {
    let z = p.points();
    let lam: Vec<S> = p.weights().iter().map(|l| S::from_rational(&l.coords()[0])).collect();
    let n = z.len();
    let pair = (0..n)
        .map(|i| {
            (0..n).filter(|&j| j != i).fold(S::zero(), |acc, j| {
                acc + lam[i].clone() * lam[j].clone() * (z[i].clone() - z[j].clone()).recip()
            })
        })
        .collect();
    let roots = (0..n)
        .map(|i| w.iter().fold(S::zero(), |acc, wk| acc + lam[i].clone() * (z[i].clone() - wk.clone()).recip()))
        .collect();
    (pair, roots)
}
