//! Univariate rational functions in partial-fraction form, and linear
//! differential operators whose coefficients are such functions.
//!
//! A function is stored as its polynomial part plus, for every pole `x`, the
//! coefficients `c_1..c_m` of its principal part `Σ c_k / (t - x)^k`. Because
//! a rational function is the sum of its principal parts and its polynomial
//! part, every operation reduces to Laurent expansions at finitely many points
//! (including infinity), and residues are plain lookups.

use std::cmp::Ordering;
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::scalar::{binomial, Scalar, DEFAULT_COLLISION_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RatFunError {
    #[error("poles at {a} and {b} are closer than the collision tolerance")]
    PoleCollision { a: String, b: String },
    #[error("Möbius map has zero determinant")]
    DegenerateMobius,
    #[error("cannot evaluate at the pole {0}")]
    EvaluationAtPole(String),
    #[error("differential operator has order {order} but {coeffs} coefficients")]
    BadOrder { order: usize, coeffs: usize },
}

pub type Result<T> = std::result::Result<T, RatFunError>;

/// Principal part at one pole: `coeffs[k]` multiplies `(t - at)^-(k+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pole<S> {
    pub at: S,
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Pole<S> {
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `(t - at)^-1`.
    pub fn residue(&self) -> S {
        self.coeffs.first().cloned().unwrap_or_else(S::zero)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction<S> {
    poles: Vec<Pole<S>>,
    poly: Vec<S>,
}

/// A truncated Laurent series `Σ_{k >= lowest} coeffs[k - lowest] · s^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent<S> {
    pub lowest: i64,
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Laurent<S> {
    pub fn coeff(&self, exponent: i64) -> S {
        let idx = exponent - self.lowest;
        if idx < 0 {
            return S::zero();
        }
        self.coeffs.get(idx as usize).cloned().unwrap_or_else(S::zero)
    }

    pub fn highest(&self) -> i64 {
        self.lowest + self.coeffs.len() as i64 - 1
    }

    /// Coefficients of negative exponents, most singular first.
    pub fn singular_part(&self) -> Vec<(i64, S)> {
        (self.lowest..0).map(|k| (k, self.coeff(k))).collect()
    }

    /// Cauchy product, kept up to exponent `order`.
    pub fn mul_to(&self, other: &Laurent<S>, order: i64) -> Laurent<S> {
        let lowest = self.lowest + other.lowest;
        let len = (order - lowest + 1).max(0) as usize;
        let mut coeffs = vec![S::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let k = i + j;
                if k < len && !a.is_zero() && !b.is_zero() {
                    coeffs[k] = coeffs[k].clone() + a.clone() * b.clone();
                }
            }
        }
        Laurent { lowest, coeffs }
    }
}

/// Expansion point for [`RationalFunction::laurent_at`].
#[derive(Debug, Clone, PartialEq)]
pub enum Point<S> {
    Finite(S),
    Infinity,
}

/// `t = (a s + b) / (c s + d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mobius<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
}

impl<S: Scalar> Mobius<S> {
    pub fn new(a: S, b: S, c: S, d: S) -> Result<Self> {
        let det = a.clone() * d.clone() - b.clone() * c.clone();
        if det.is_zero() {
            return Err(RatFunError::DegenerateMobius);
        }
        Ok(Mobius { a, b, c, d })
    }

    /// `t = 1/s`.
    pub fn inversion() -> Self {
        Mobius { a: S::zero(), b: S::one(), c: S::one(), d: S::zero() }
    }

    pub fn translation(shift: S) -> Self {
        Mobius { a: S::one(), b: shift, c: S::zero(), d: S::one() }
    }

    pub fn scaling(factor: S) -> Result<Self> {
        Self::new(factor, S::zero(), S::zero(), S::one())
    }

    pub fn determinant(&self) -> S {
        self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone()
    }

    /// The map itself as a rational function of `s`.
    pub fn as_function(&self) -> RationalFunction<S> {
        if self.c.is_zero() {
            RationalFunction::polynomial(vec![
                self.b.clone() / self.d.clone(),
                self.a.clone() / self.d.clone(),
            ])
        } else {
            // (as+b)/(cs+d) = a/c - det/c^2 / (s + d/c)
            let c2 = self.c.clone() * self.c.clone();
            let at = -(self.d.clone() / self.c.clone());
            RationalFunction::constant(self.a.clone() / self.c.clone())
                .add_unchecked(&RationalFunction::pole(at, 1, -(self.determinant() / c2)))
        }
    }

    /// `φ'(s) = det / (c s + d)^2`.
    pub fn derivative(&self) -> RationalFunction<S> {
        if self.c.is_zero() {
            RationalFunction::constant(self.determinant() / (self.d.clone() * self.d.clone()))
        } else {
            let c2 = self.c.clone() * self.c.clone();
            RationalFunction::pole(-(self.d.clone() / self.c.clone()), 2, self.determinant() / c2)
        }
    }
}

fn trim<S: Scalar>(v: &mut Vec<S>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

impl<S: Scalar> RationalFunction<S> {
    pub fn zero() -> Self {
        RationalFunction { poles: Vec::new(), poly: Vec::new() }
    }

    pub fn constant(c: S) -> Self {
        Self::polynomial(vec![c])
    }

    /// `coeffs[k]` multiplies `t^k`.
    pub fn polynomial(mut coeffs: Vec<S>) -> Self {
        trim(&mut coeffs);
        RationalFunction { poles: Vec::new(), poly: coeffs }
    }

    /// The coordinate function `t`.
    pub fn t() -> Self {
        Self::polynomial(vec![S::zero(), S::one()])
    }

    /// `c / (t - at)^order`.
    pub fn pole(at: S, order: usize, c: S) -> Self {
        if order == 0 {
            return Self::constant(c);
        }
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![S::zero(); order];
        coeffs[order - 1] = c;
        RationalFunction { poles: vec![Pole { at, coeffs }], poly: Vec::new() }
    }

    pub fn simple_pole(at: S, c: S) -> Self {
        Self::pole(at, 1, c)
    }

    /// Builds from raw parts, sorting and merging poles.
    pub fn from_parts(poles: Vec<Pole<S>>, poly: Vec<S>) -> Result<Self> {
        let mut acc = Self::polynomial(poly);
        for p in poles {
            let f = RationalFunction { poles: vec![p], poly: Vec::new() }.canonical();
            acc = acc.add(&f)?;
        }
        Ok(acc)
    }

    fn canonical(mut self) -> Self {
        trim(&mut self.poly);
        for p in &mut self.poles {
            trim(&mut p.coeffs);
        }
        self.poles.retain(|p| !p.coeffs.is_empty());
        self.poles.sort_by(|a, b| a.at.canonical_cmp(&b.at));
        self
    }

    pub fn poles(&self) -> &[Pole<S>] {
        &self.poles
    }

    /// Polynomial part, `poly()[k]` multiplying `t^k`.
    pub fn poly(&self) -> &[S] {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poles.is_empty() && self.poly.is_empty()
    }

    pub fn is_polynomial(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn pole_at(&self, x: &S) -> Option<&Pole<S>> {
        self.poles.iter().find(|p| p.at == *x)
    }

    /// Coefficient of `(t - x)^-order`, zero when absent.
    pub fn principal_coeff(&self, x: &S, order: usize) -> S {
        self.pole_at(x)
            .and_then(|p| p.coeffs.get(order.wrapping_sub(1)).cloned())
            .unwrap_or_else(S::zero)
    }

    pub fn residue(&self, x: &S) -> S {
        self.principal_coeff(x, 1)
    }

    pub fn degree(&self) -> Option<usize> {
        self.poly.len().checked_sub(1)
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RationalFunction {
            poles: self
                .poles
                .iter()
                .map(|p| Pole {
                    at: p.at.clone(),
                    coeffs: p.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
                })
                .collect(),
            poly: self.poly.iter().map(|x| x.clone() * c.clone()).collect(),
        }
        .canonical()
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    /// Zeroes every coefficient of magnitude below `tol`. Only meaningful in
    /// the complex field.
    pub fn chop(&self, tol: f64) -> Self {
        let chop = |v: &S| if v.magnitude() < tol { S::zero() } else { v.clone() };
        RationalFunction {
            poles: self
                .poles
                .iter()
                .map(|p| Pole { at: p.at.clone(), coeffs: p.coeffs.iter().map(chop).collect() })
                .collect(),
            poly: self.poly.iter().map(chop).collect(),
        }
        .canonical()
    }

    fn check_collisions(&self, other: &Self, tol: f64) -> Result<()> {
        if S::EXACT {
            return Ok(());
        }
        for p in &self.poles {
            for q in &other.poles {
                if p.at.collides_with(&q.at, tol) {
                    return Err(RatFunError::PoleCollision {
                        a: format!("{:?}", p.at),
                        b: format!("{:?}", q.at),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_tol(other, DEFAULT_COLLISION_TOL)
    }

    pub fn add_tol(&self, other: &Self, tol: f64) -> Result<Self> {
        self.check_collisions(other, tol)?;
        Ok(self.add_unchecked(other))
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        let n = self.poly.len().max(other.poly.len());
        let poly = (0..n)
            .map(|k| {
                let a = self.poly.get(k).cloned().unwrap_or_else(S::zero);
                let b = other.poly.get(k).cloned().unwrap_or_else(S::zero);
                a + b
            })
            .collect();
        let mut poles = self.poles.clone();
        for q in &other.poles {
            match poles.iter_mut().find(|p| p.at == q.at) {
                Some(p) => {
                    if p.coeffs.len() < q.coeffs.len() {
                        p.coeffs.resize(q.coeffs.len(), S::zero());
                    }
                    for (k, c) in q.coeffs.iter().enumerate() {
                        p.coeffs[k] = p.coeffs[k].clone() + c.clone();
                    }
                }
                None => poles.push(q.clone()),
            }
        }
        RationalFunction { poles, poly }.canonical()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_tol(other, DEFAULT_COLLISION_TOL)
    }

    /// Product, re-expanded into partial fractions. Each principal part of the
    /// product comes from the Cauchy product of the two Laurent expansions at
    /// that pole; the polynomial part from the expansions at infinity.
    pub fn mul_tol(&self, other: &Self, tol: f64) -> Result<Self> {
        self.check_collisions(other, tol)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let mut locations: Vec<S> = self.poles.iter().map(|p| p.at.clone()).collect();
        for q in &other.poles {
            if !locations.contains(&q.at) {
                locations.push(q.at.clone());
            }
        }
        let mut poles = Vec::with_capacity(locations.len());
        for x in locations {
            let mf = self.pole_at(&x).map_or(0, |p| p.order()) as i64;
            let mg = other.pole_at(&x).map_or(0, |p| p.order()) as i64;
            let lf = self.laurent_finite(&x, mg - 1);
            let lg = other.laurent_finite(&x, mf - 1);
            let prod = lf.mul_to(&lg, -1);
            let m = (-prod.lowest).max(0) as usize;
            let coeffs = (1..=m).map(|k| prod.coeff(-(k as i64))).collect();
            poles.push(Pole { at: x, coeffs });
        }
        // Polynomial part: non-positive powers of u = 1/t in the product.
        let df = self.poly.len() as i64 - 1;
        let dg = other.poly.len() as i64 - 1;
        let lf = self.laurent_infinity(dg.max(0));
        let lg = other.laurent_infinity(df.max(0));
        let prod = lf.mul_to(&lg, 0);
        let poly = (0..=-prod.lowest).map(|k| prod.coeff(-k)).collect();
        Ok(RationalFunction { poles, poly }.canonical())
    }

    pub fn powi(&self, n: u32) -> Result<Self> {
        let mut acc = Self::constant(S::one());
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn derive(&self) -> Self {
        let poly = self
            .poly
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.clone() * S::from_i64(k as i64))
            .collect();
        let poles = self
            .poles
            .iter()
            .map(|p| {
                let mut coeffs = vec![S::zero()];
                for (k, c) in p.coeffs.iter().enumerate() {
                    let m = k as i64 + 1;
                    coeffs.push(-(c.clone() * S::from_i64(m)));
                }
                Pole { at: p.at.clone(), coeffs }
            })
            .collect();
        RationalFunction { poles, poly }.canonical()
    }

    pub fn derive_n(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |f, _| f.derive())
    }

    pub fn eval(&self, t: &S) -> Result<S> {
        if let Some(p) = self.poles.iter().find(|p| p.at == *t) {
            return Err(RatFunError::EvaluationAtPole(format!("{:?}", p.at)));
        }
        let mut acc = S::zero();
        for c in self.poly.iter().rev() {
            acc = acc * t.clone() + c.clone();
        }
        for p in &self.poles {
            let inv = (t.clone() - p.at.clone()).recip();
            let mut pw = inv.clone();
            for c in &p.coeffs {
                acc = acc + c.clone() * pw.clone();
                pw = pw * inv.clone();
            }
        }
        Ok(acc)
    }

    /// Laurent coefficients at `x0` from the most negative exponent present
    /// (or 0 at a regular point) up to `order`. At infinity the expansion is
    /// in `u = 1/t`, starting from `u^-deg`.
    pub fn laurent_at(&self, x0: &Point<S>, order: i64) -> Laurent<S> {
        match x0 {
            Point::Finite(x) => self.laurent_finite(x, order),
            Point::Infinity => self.laurent_infinity(order),
        }
    }

    fn laurent_finite(&self, x0: &S, order: i64) -> Laurent<S> {
        let m = self.pole_at(x0).map_or(0, |p| p.order()) as i64;
        let lowest = -m;
        let len = (order - lowest + 1).max(0) as usize;
        let mut coeffs = vec![S::zero(); len];
        let mut put = |e: i64, v: S| {
            let idx = e - lowest;
            if idx >= 0 && (idx as usize) < len {
                let idx = idx as usize;
                coeffs[idx] = coeffs[idx].clone() + v;
            }
        };
        if let Some(p) = self.pole_at(x0) {
            for (k, c) in p.coeffs.iter().enumerate() {
                put(-(k as i64) - 1, c.clone());
            }
        }
        // Taylor shift of the polynomial part.
        for r in 0..self.poly.len() {
            if r as i64 > order {
                break;
            }
            let mut acc = S::zero();
            for (k, c) in self.poly.iter().enumerate().skip(r) {
                acc = acc + c.clone() * binomial::<S>(k as i64, r as i64) * x0.powi((k - r) as i64);
            }
            put(r as i64, acc);
        }
        // (s - d)^-m = (-d)^-m Σ_r C(m+r-1, r) d^-r s^r,  s = t - x0, d = x - x0.
        for p in self.poles.iter().filter(|p| p.at != *x0) {
            let d = p.at.clone() - x0.clone();
            let dinv = d.recip();
            let neg_dinv = -dinv.clone();
            for (k, c) in p.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let m = k as i64 + 1;
                let lead = c.clone() * neg_dinv.powi(m);
                let mut dr = S::one();
                for r in 0..=order.max(-1) {
                    put(r, lead.clone() * binomial::<S>(m + r - 1, r) * dr.clone());
                    dr = dr * dinv.clone();
                }
            }
        }
        Laurent { lowest, coeffs }
    }

    fn laurent_infinity(&self, order: i64) -> Laurent<S> {
        let deg = self.poly.len() as i64 - 1;
        let lowest = -deg.max(0);
        let len = (order - lowest + 1).max(0) as usize;
        let mut coeffs = vec![S::zero(); len];
        let mut put = |e: i64, v: S| {
            let idx = e - lowest;
            if idx >= 0 && (idx as usize) < len {
                let idx = idx as usize;
                coeffs[idx] = coeffs[idx].clone() + v;
            }
        };
        for (k, c) in self.poly.iter().enumerate() {
            put(-(k as i64), c.clone());
        }
        // c/(t-x)^m = c u^m (1 - x u)^-m = c Σ_r C(m+r-1, r) x^r u^(m+r)
        for p in &self.poles {
            for (k, c) in p.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let m = k as i64 + 1;
                let mut xr = S::one();
                let mut r = 0;
                while m + r <= order {
                    put(m + r, c.clone() * binomial::<S>(m + r - 1, r) * xr.clone());
                    xr = xr * p.at.clone();
                    r += 1;
                }
            }
        }
        Laurent { lowest, coeffs }
    }

    /// `f(φ(s))` as a rational function of `s`.
    pub fn compose_mobius(&self, phi: &Mobius<S>) -> Result<Self> {
        let det = phi.determinant();
        if det.is_zero() {
            return Err(RatFunError::DegenerateMobius);
        }
        let mut acc = Self::zero();
        if !self.poly.is_empty() {
            let t = phi.as_function();
            let mut tk = Self::constant(S::one());
            for c in &self.poly {
                acc = acc.add(&tk.scale(c))?;
                tk = tk.mul(&t)?;
            }
        }
        for p in &self.poles {
            // 1/(φ(s) - x) with A = a - c x, B = b - d x.
            let x = &p.at;
            let big_a = phi.a.clone() - phi.c.clone() * x.clone();
            let big_b = phi.b.clone() - phi.d.clone() * x.clone();
            let recip = if big_a.is_zero() {
                Self::polynomial(vec![
                    phi.d.clone() / big_b.clone(),
                    phi.c.clone() / big_b,
                ])
            } else {
                let at = -(big_b / big_a.clone());
                Self::constant(phi.c.clone() / big_a.clone())
                    .add(&Self::simple_pole(at, det.clone() / (big_a.clone() * big_a)))?
            };
            let mut pw = recip.clone();
            for c in &p.coeffs {
                acc = acc.add(&pw.scale(c))?;
                pw = pw.mul(&recip)?;
            }
        }
        Ok(acc)
    }

    /// Approximate equality, for the complex field.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        match self.sub(other) {
            Ok(d) => d.chop(tol).is_zero(),
            Err(_) => false,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "poly": self.poly.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "poles": self.poles.iter().map(|p| json!({
                "at": p.at.to_json(),
                "coeffs": p.coeffs.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl<S: Scalar + fmt::Display> fmt::Display for RationalFunction<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (k, c) in self.poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            terms.push(match k {
                0 => format!("{c}"),
                1 => format!("({c})*t"),
                _ => format!("({c})*t^{k}"),
            });
        }
        for p in &self.poles {
            for (k, c) in p.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let m = k + 1;
                if m == 1 {
                    terms.push(format!("({c})/(t-({}))", p.at));
                } else {
                    terms.push(format!("({c})/(t-({}))^{m}", p.at));
                }
            }
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// `∂^n + a_{n-1} ∂^{n-1} + … + a_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOp<S> {
    coeffs: Vec<RationalFunction<S>>,
}

impl<S: Scalar> DiffOp<S> {
    /// `coeffs[k]` multiplies `∂^k`; the leading coefficient is 1 and not stored.
    pub fn new(order: usize, coeffs: Vec<RationalFunction<S>>) -> Result<Self> {
        if coeffs.len() != order {
            return Err(RatFunError::BadOrder { order, coeffs: coeffs.len() });
        }
        Ok(DiffOp { coeffs })
    }

    pub fn identity() -> Self {
        DiffOp { coeffs: Vec::new() }
    }

    pub fn d() -> Self {
        DiffOp { coeffs: vec![RationalFunction::zero()] }
    }

    /// `∂ + a`.
    pub fn first_order(a: RationalFunction<S>) -> Self {
        DiffOp { coeffs: vec![a] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `∂^k` (one for `k == order`, zero above).
    pub fn coeff(&self, k: usize) -> RationalFunction<S> {
        match k.cmp(&self.order()) {
            Ordering::Less => self.coeffs[k].clone(),
            Ordering::Equal => RationalFunction::constant(S::one()),
            Ordering::Greater => RationalFunction::zero(),
        }
    }

    pub fn coeffs(&self) -> &[RationalFunction<S>] {
        &self.coeffs
    }

    /// Operator product `self ∘ other`, using
    /// `(a ∂^k)(b ∂^l) = a Σ_r C(k, r) b^{(r)} ∂^{k-r+l}`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let n1 = self.order();
        let n2 = other.order();
        let mut out = vec![RationalFunction::zero(); n1 + n2 + 1];
        // derivatives of each coefficient of `other`, up to order n1
        let derivs: Vec<Vec<RationalFunction<S>>> = (0..=n2)
            .map(|l| {
                let mut v = vec![other.coeff(l)];
                for r in 1..=n1 {
                    let next = v[r - 1].derive();
                    v.push(next);
                }
                v
            })
            .collect();
        for k in 0..=n1 {
            let a = self.coeff(k);
            if a.is_zero() {
                continue;
            }
            for (l, bl) in derivs.iter().enumerate() {
                for r in 0..=k {
                    let b = &bl[r];
                    if b.is_zero() {
                        continue;
                    }
                    let term = a.mul(b)?.scale(&binomial::<S>(k as i64, r as i64));
                    let idx = k - r + l;
                    out[idx] = out[idx].add(&term)?;
                }
            }
        }
        out.pop();
        Ok(DiffOp { coeffs: out })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order(),
            "coeffs": self.coeffs.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }
}
