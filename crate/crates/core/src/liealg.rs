//! Root data of type A, weights in fundamental-weight coordinates, the Weyl
//! group, and the ρ-shifted Weyl action.
//!
//! A weight `λ = Σ m_i ω_i` is stored as its coordinates `m_i = ⟨λ, α̌_i⟩`, so
//! every pairing with a simple coroot is a lookup. A simple root `α_i` has
//! coordinates given by row `i` of the Cartan matrix.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::linalg::invert;
use crate::scalar::{int, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("rank must be at least 1, got {0}")]
    BadRank(usize),
    #[error("simple root index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("weight has {got} coordinates, expected {expected}")]
    WrongLength { got: usize, expected: usize },
}

/// Coordinates in the fundamental-weight basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(pub Vec<Rational>);

impl Weight {
    pub fn zero(rank: usize) -> Self {
        Weight(vec![Rational::zero(); rank])
    }

    pub fn from_ints(m: &[i64]) -> Self {
        Weight(m.iter().map(|&x| int(x)).collect())
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|m| m.is_integer())
    }

    pub fn is_dominant_integral(&self) -> bool {
        self.0.iter().all(|m| m.is_integer() && !m.is_negative())
    }

    /// Integer coordinates, if integral and small.
    pub fn to_ints(&self) -> Option<Vec<i64>> {
        self.0
            .iter()
            .map(|m| if m.is_integer() { num_traits::ToPrimitive::to_i64(m.numer()) } else { None })
            .collect()
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Rational) -> Weight {
        Weight(self.0.iter().map(|a| a * c).collect())
    }

    pub fn neg(&self) -> Weight {
        Weight(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(crate::scalar::format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A Weyl group element as a reduced word: `word = [i1, i2, …]` stands for
/// `s_{i1} s_{i2} …`, so `s_{i_last}` acts first. Indices are zero-based.
#[derive(Debug, Clone)]
pub struct WeylElement {
    pub word: Vec<usize>,
    // image of ρ, which determines the element
    rho_image: Weight,
}

impl WeylElement {
    pub fn length(&self) -> usize {
        self.word.len()
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    pub fn rho_image(&self) -> &Weight {
        &self.rho_image
    }
}

impl PartialEq for WeylElement {
    fn eq(&self, other: &Self) -> bool {
        self.rho_image == other.rho_image
    }
}

impl Eq for WeylElement {}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.word.iter().map(|i| format!("s{}", i + 1)).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Debug, Clone)]
pub struct RootData {
    rank: usize,
    cartan: Vec<Vec<i64>>,
    /// `(ω_i, ω_j)` under the trace form: the inverse Cartan matrix.
    fundamental_gram: Vec<Vec<Rational>>,
}

impl RootData {
    /// Root data of `sl_{rank+1}`.
    pub fn type_a(rank: usize) -> Result<Self, LieError> {
        if rank < 1 {
            return Err(LieError::BadRank(rank));
        }
        let cartan: Vec<Vec<i64>> = (0..rank)
            .map(|i| {
                (0..rank)
                    .map(|j| match (i as i64 - j as i64).abs() {
                        0 => 2,
                        1 => -1,
                        _ => 0,
                    })
                    .collect()
            })
            .collect();
        let as_rat: Vec<Vec<Rational>> =
            cartan.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        let fundamental_gram = invert(&as_rat).expect("type A Cartan matrix is invertible");
        Ok(RootData { rank, cartan, fundamental_gram })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `n` for `sl_n`.
    pub fn n(&self) -> usize {
        self.rank + 1
    }

    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    /// `⟨α_j, α̌_i⟩ = a_{ij}`.
    pub fn cartan_entry(&self, i: usize, j: usize) -> i64 {
        self.cartan[i][j]
    }

    fn check_index(&self, i: usize) -> Result<(), LieError> {
        if i >= self.rank {
            Err(LieError::IndexOutOfRange { index: i, rank: self.rank })
        } else {
            Ok(())
        }
    }

    pub fn check_weight(&self, w: &Weight) -> Result<(), LieError> {
        if w.rank() != self.rank {
            Err(LieError::WrongLength { got: w.rank(), expected: self.rank })
        } else {
            Ok(())
        }
    }

    pub fn simple_root(&self, i: usize) -> Weight {
        Weight(self.cartan[i].iter().map(|&x| int(x)).collect())
    }

    pub fn fundamental_weight(&self, i: usize) -> Weight {
        let mut w = Weight::zero(self.rank);
        w.0[i] = int(1);
        w
    }

    pub fn rho(&self) -> Weight {
        Weight(vec![int(1); self.rank])
    }

    /// `⟨λ, α̌_i⟩` for a zero-based index.
    pub fn pairing(&self, lambda: &Weight, i: usize) -> Result<Rational, LieError> {
        self.check_index(i)?;
        self.check_weight(lambda)?;
        Ok(lambda.0[i].clone())
    }

    /// Invariant form on weights induced by the trace form of the defining
    /// representation, so that `(α_i, α_i) = 2`.
    pub fn inner(&self, a: &Weight, b: &Weight) -> Rational {
        let mut acc = Rational::zero();
        for i in 0..self.rank {
            if a.0[i].is_zero() {
                continue;
            }
            for j in 0..self.rank {
                acc += &a.0[i] * &self.fundamental_gram[i][j] * &b.0[j];
            }
        }
        acc
    }

    /// `½ (λ, λ + 2ρ)`: eigenvalue of the quadratic Casimir on `V_λ`.
    pub fn casimir_value(&self, lambda: &Weight) -> Rational {
        let shifted = lambda.add(&self.rho().scale(&int(2)));
        self.inner(lambda, &shifted) / int(2)
    }

    /// Coordinates in the simple-root basis.
    pub fn root_coords(&self, w: &Weight) -> Vec<Rational> {
        (0..self.rank)
            .map(|j| (0..self.rank).map(|i| &w.0[i] * &self.fundamental_gram[i][j]).sum())
            .collect()
    }

    /// Height `Σ c_i` of `Σ c_i α_i`.
    pub fn height(&self, w: &Weight) -> Rational {
        self.root_coords(w).into_iter().sum()
    }

    /// ε-coordinates `(u_1, …, u_n)` with `Σ u_k = 0`, using
    /// `ω_k = ε_1 + … + ε_k - (k/n) Σ ε`.
    pub fn epsilon_coords(&self, w: &Weight) -> Vec<Rational> {
        let n = self.n() as i64;
        let shift: Rational = w.0.iter().enumerate().map(|(k, m)| m * int(k as i64 + 1)).sum::<Rational>()
            / int(n);
        (0..self.n())
            .map(|c| w.0.iter().skip(c).cloned().sum::<Rational>() - &shift)
            .collect()
    }

    pub fn reflect(&self, i: usize, mu: &Weight) -> Weight {
        let m = mu.0[i].clone();
        mu.sub(&self.simple_root(i).scale(&m))
    }

    /// Linear action `w(λ)`.
    pub fn act(&self, w: &WeylElement, lambda: &Weight) -> Weight {
        w.word.iter().rev().fold(lambda.clone(), |mu, &i| self.reflect(i, &mu))
    }

    /// Inverse linear action `w^{-1}(λ)`.
    pub fn act_inverse(&self, w: &WeylElement, lambda: &Weight) -> Weight {
        w.word.iter().fold(lambda.clone(), |mu, &i| self.reflect(i, &mu))
    }

    /// `w·λ = w(λ + ρ) - ρ`.
    pub fn shifted_action(&self, w: &WeylElement, lambda: &Weight) -> Weight {
        let rho = self.rho();
        self.act(w, &lambda.add(&rho)).sub(&rho)
    }

    pub fn identity(&self) -> WeylElement {
        WeylElement { word: Vec::new(), rho_image: self.rho() }
    }

    /// Element with the given word (zero-based indices), `s_{word[0]}`
    /// applied last.
    pub fn weyl_element(&self, word: &[usize]) -> Result<WeylElement, LieError> {
        for &i in word {
            self.check_index(i)?;
        }
        let mut w = WeylElement { word: word.to_vec(), rho_image: self.rho() };
        w.rho_image = self.act(&w, &self.rho());
        // store a reduced word for the same element
        Ok(self
            .weyl_group()
            .into_iter()
            .find(|e| *e == w)
            .expect("every word lies in the group"))
    }

    pub fn compose(&self, a: &WeylElement, b: &WeylElement) -> WeylElement {
        let word: Vec<usize> = a.word.iter().chain(&b.word).copied().collect();
        self.weyl_element(&word).expect("indices already validated")
    }

    /// All elements by breadth-first closure under left multiplication by
    /// simple reflections. Words are reduced and the list is sorted by length.
    pub fn weyl_group(&self) -> Vec<WeylElement> {
        let id = self.identity();
        let mut seen: HashMap<Weight, usize> = HashMap::new();
        seen.insert(id.rho_image.clone(), 0);
        let mut elems = vec![id];
        let mut queue = VecDeque::from([0usize]);
        while let Some(k) = queue.pop_front() {
            for i in 0..self.rank {
                let img = self.reflect(i, &elems[k].rho_image);
                if seen.contains_key(&img) {
                    continue;
                }
                let mut word = vec![i];
                word.extend_from_slice(&elems[k].word);
                seen.insert(img.clone(), elems.len());
                queue.push_back(elems.len());
                elems.push(WeylElement { word, rho_image: img });
            }
        }
        elems
    }

    pub fn longest_element(&self) -> WeylElement {
        self.weyl_group().pop().expect("group is nonempty")
    }

    /// `-w_0(λ)`.
    pub fn dual_weight(&self, lambda: &Weight) -> Weight {
        self.act(&self.longest_element(), lambda).neg()
    }

    /// Finds dominant integral `λ_∞` and `w` with `μ = w(-w_0(λ_∞) + ρ) - ρ`,
    /// or `None` when `μ + ρ` lies on a wall (or μ is not integral).
    pub fn classify_weight_at_infinity(&self, mu: &Weight) -> Option<(Weight, WeylElement)> {
        if !mu.is_integral() || mu.rank() != self.rank {
            return None;
        }
        let shifted = mu.add(&self.rho());
        for w in self.weyl_group() {
            let nu = self.act_inverse(&w, &shifted).sub(&self.rho());
            if nu.is_dominant_integral() {
                return Some((self.dual_weight(&nu), w));
            }
        }
        None
    }

    /// Weyl dimension formula `Π_{β>0} (λ+ρ, β)/(ρ, β)`, for type A with
    /// positive roots `α_i + … + α_j`.
    pub fn weyl_dimension(&self, lambda: &Weight) -> Rational {
        let mut num = int(1);
        let mut den = int(1);
        for i in 0..self.rank {
            for j in i..self.rank {
                let s: Rational = (i..=j).map(|k| &lambda.0[k] + int(1)).sum();
                num *= s;
                den *= int((j - i + 1) as i64);
            }
        }
        num / den
    }
}
