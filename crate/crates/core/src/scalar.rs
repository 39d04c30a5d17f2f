//! The two coefficient fields everything in this crate is generic over:
//! exact rationals backed by big integers, and double-precision complex
//! numbers.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

pub type Rational = BigRational;
pub type C64 = Complex64;

/// Default distance below which two distinct complex pole locations are
/// treated as a collision.
pub const DEFAULT_COLLISION_TOL: f64 = 1e-9;

/// A field of coefficients.
///
/// `is_zero` is an exact test in both instantiations. Tolerance-based
/// comparisons in the complex field always take the tolerance as an explicit
/// argument (see [`Scalar::magnitude`]).
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn is_zero(&self) -> bool;
    /// Absolute value, as a float. Exact values are rounded.
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> C64;
    /// Total order used to sort pole locations canonically.
    fn canonical_cmp(&self, other: &Self) -> Ordering;
    fn to_json(&self) -> Value;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }

    fn powi(&self, n: i64) -> Self {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }

    /// Whether two locations that are not identical are nevertheless too close
    /// to be told apart. Always false in the exact field.
    fn collides_with(&self, other: &Self, tol: f64) -> bool {
        !Self::EXACT && self != other && (self.clone() - other.clone()).magnitude() < tol
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn to_c64(&self) -> C64 {
        C64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn from_rational(q: &Rational) -> Self {
        C64::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.re
            .total_cmp(&other.re)
            .then_with(|| self.im.total_cmp(&other.im))
    }
    fn to_json(&self) -> Value {
        serde_json::json!([self.re, self.im])
    }
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Formats as `"p/q"`, or `"p"` for integers.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"p/q"`, `"p"`, or a plain integer.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(Rational::new(p, q))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// n choose k as an element of any field.
pub fn binomial<S: Scalar>(n: i64, k: i64) -> S {
    if k < 0 || k > n {
        return S::zero();
    }
    let k = k.min(n - k);
    let mut acc = int(1);
    for j in 0..k {
        acc = acc * int(n - j) / int(j + 1);
    }
    S::from_rational(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        assert_eq!(parse_rational("-3/6"), Some(rat(-1, 2)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(format_rational(&rat(4, -6)), "-2/3");
        assert_eq!(format_rational(&int(5)), "5");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial::<Rational>(5, 2), int(10));
        assert_eq!(binomial::<Rational>(3, 5), int(0));
        assert_eq!(binomial::<C64>(6, 3), C64::new(20.0, 0.0));
    }

    #[test]
    fn collisions_only_in_complex_field() {
        let a = C64::new(1.0, 0.0);
        let b = C64::new(1.0 + 1e-12, 0.0);
        assert!(a.collides_with(&b, DEFAULT_COLLISION_TOL));
        assert!(!a.collides_with(&a, DEFAULT_COLLISION_TOL));
        assert!(!int(1).collides_with(&rat(1, 3), 10.0));
    }

    #[test]
    fn powers() {
        assert_eq!(rat(2, 3).powi(-2), rat(9, 4));
        assert_eq!(int(3).powi(0), int(1));
    }
}
