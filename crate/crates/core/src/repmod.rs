//! Highest-weight representations of `sl_n` with exact Chevalley matrices.
//!
//! Verma modules are realised on PBW monomials `Π F_β^{k_β} v_λ` (one factor
//! per positive root, in a fixed order), with the action of `gl_n` matrix
//! units computed by straightening products into that order. Irreducible
//! modules are the quotient of a truncated Verma module by the radical of the
//! contravariant (Shapovalov) form, computed one weight space at a time.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::liealg::{LieError, RootData, Weight};
use crate::linalg::{independent_subset, invert, nullspace, SparseMatrix};
use crate::scalar::{int, Rational};

pub const DEFAULT_DIMENSION_CAP: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepError {
    #[error("highest weight {0} is not dominant integral")]
    NotDominant(String),
    #[error("dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("tensor factors have different root data")]
    MismatchedRootData,
    #[error(transparent)]
    Lie(#[from] LieError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepKind {
    Irreducible,
    VermaTruncated { depth: usize },
}

type Monomial = Vec<u32>;
type LinComb = BTreeMap<Monomial, Rational>;

fn add_into(acc: &mut LinComb, m: Monomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match acc.entry(m) {
        Entry::Vacant(slot) => {
            slot.insert(c);
        }
        Entry::Occupied(mut slot) => {
            *slot.get_mut() += c;
            if slot.get().is_zero() {
                slot.remove();
            }
        }
    }
}

/// Straightening engine for `U(gl_n)` acting on a Verma module.
struct Pbw {
    /// positive roots `(a, b)`, `a < b`, lexicographic
    roots: Vec<(usize, usize)>,
    lambda_eps: Vec<Rational>,
    memo: RefCell<HashMap<(usize, usize, Monomial), Rc<LinComb>>>,
}

impl Pbw {
    fn new(rd: &RootData, lambda: &Weight) -> Self {
        let n = rd.n();
        let roots = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Pbw { roots, lambda_eps: rd.epsilon_coords(lambda), memo: RefCell::new(HashMap::new()) }
    }

    fn root_index(&self, a: usize, b: usize) -> usize {
        self.roots.iter().position(|&r| r == (a, b)).expect("positive root")
    }

    fn eps_weight(&self, m: &Monomial) -> Vec<Rational> {
        let mut w = self.lambda_eps.clone();
        for (k, &e) in m.iter().enumerate() {
            if e > 0 {
                let (a, b) = self.roots[k];
                w[a] -= int(e as i64);
                w[b] += int(e as i64);
            }
        }
        w
    }

    fn level(&self, m: &Monomial) -> usize {
        m.iter().enumerate().map(|(k, &e)| e as usize * (self.roots[k].1 - self.roots[k].0)).sum()
    }

    /// Action of the matrix unit `E_{r c}` on the monomial `m · v_λ`.
    fn act(&self, r: usize, c: usize, m: &Monomial) -> Rc<LinComb> {
        let key = (r, c, m.clone());
        if let Some(hit) = self.memo.borrow().get(&key) {
            return hit.clone();
        }
        let out = Rc::new(self.act_uncached(r, c, m));
        self.memo.borrow_mut().insert(key, out.clone());
        out
    }

    fn act_uncached(&self, r: usize, c: usize, m: &Monomial) -> LinComb {
        let mut out = LinComb::new();
        if r == c {
            add_into(&mut out, m.clone(), self.eps_weight(m)[r].clone());
            return out;
        }
        let first = m.iter().position(|&e| e > 0);
        let lowering = r > c;
        match first {
            None => {
                if lowering {
                    let mut m2 = m.clone();
                    m2[self.root_index(c, r)] += 1;
                    out.insert(m2, int(1));
                }
                out
            }
            Some(p) => {
                if lowering && self.root_index(c, r) <= p {
                    let mut m2 = m.clone();
                    m2[self.root_index(c, r)] += 1;
                    out.insert(m2, int(1));
                    return out;
                }
                // X F_p m' = F_p (X m') + [X, F_p] m'
                let (a, b) = self.roots[p];
                let mut rest = m.clone();
                rest[p] -= 1;
                for (mono, coef) in self.act(r, c, &rest).iter() {
                    for (mono2, coef2) in self.act(b, a, mono).iter() {
                        add_into(&mut out, mono2.clone(), coef * coef2);
                    }
                }
                // [E_{rc}, E_{ba}] = δ_{cb} E_{ra} - δ_{ar} E_{bc}
                if c == b {
                    for (mono, coef) in self.act(r, a, &rest).iter() {
                        add_into(&mut out, mono.clone(), coef.clone());
                    }
                }
                if a == r {
                    for (mono, coef) in self.act(b, c, &rest).iter() {
                        add_into(&mut out, mono.clone(), -coef.clone());
                    }
                }
                out
            }
        }
    }

    fn act_comb(&self, r: usize, c: usize, v: &LinComb) -> LinComb {
        let mut out = LinComb::new();
        for (mono, coef) in v {
            for (mono2, coef2) in self.act(r, c, mono).iter() {
                add_into(&mut out, mono2.clone(), coef * coef2);
            }
        }
        out
    }

    /// Monomials of level at most `depth`, in basis order.
    fn monomials(&self, depth: usize) -> Vec<Monomial> {
        fn rec(pbw: &Pbw, k: usize, budget: usize, cur: &mut Monomial, out: &mut Vec<Monomial>) {
            if k == pbw.roots.len() {
                out.push(cur.clone());
                return;
            }
            let h = pbw.roots[k].1 - pbw.roots[k].0;
            let mut e = 0;
            while e * h <= budget {
                cur[k] = e as u32;
                rec(pbw, k + 1, budget - e * h, cur, out);
                e += 1;
            }
            cur[k] = 0;
        }
        let mut out = Vec::new();
        let mut cur = vec![0; self.roots.len()];
        rec(self, 0, depth, &mut cur, &mut out);
        out
    }

    /// `⟨m_a v, m_b v⟩`: the `v_λ` coefficient of `σ(m_a) m_b v_λ`, where the
    /// anti-involution σ sends `F_β` to `E_β`.
    fn shapovalov(&self, ma: &Monomial, mb: &Monomial) -> Rational {
        let mut v = LinComb::new();
        v.insert(mb.clone(), int(1));
        for (k, &e) in ma.iter().enumerate() {
            let (a, b) = self.roots[k];
            for _ in 0..e {
                v = self.act_comb(a, b, &v);
                if v.is_empty() {
                    return Rational::zero();
                }
            }
        }
        v.get(&vec![0; self.roots.len()]).cloned().unwrap_or_else(Rational::zero)
    }
}

#[derive(Debug, Clone)]
pub struct Representation {
    root_data: RootData,
    highest_weight: Weight,
    weights: Vec<Weight>,
    /// PBW exponents of the Verma monomial behind each basis state
    labels: Vec<Vec<u32>>,
    e: Vec<SparseMatrix<Rational>>,
    f: Vec<SparseMatrix<Rational>>,
    h: Vec<SparseMatrix<Rational>>,
    kind: RepKind,
}

impl Representation {
    /// Irreducible module `V_λ` for dominant integral `λ`.
    pub fn irreducible(rd: &RootData, lambda: &Weight) -> Result<Self, RepError> {
        Self::irreducible_with_cap(rd, lambda, DEFAULT_DIMENSION_CAP)
    }

    pub fn irreducible_with_cap(rd: &RootData, lambda: &Weight, cap: usize) -> Result<Self, RepError> {
        rd.check_weight(lambda)?;
        if !lambda.is_dominant_integral() {
            return Err(RepError::NotDominant(lambda.to_string()));
        }
        let dim = rd.weyl_dimension(lambda).to_integer().to_usize().unwrap_or(usize::MAX);
        if dim > cap {
            return Err(RepError::DimensionCap { dim, cap });
        }
        let depth = rd
            .height(&lambda.add(&rd.dual_weight(lambda)))
            .to_integer()
            .to_usize()
            .expect("height of a dominant weight difference is a natural number");
        let pbw = Pbw::new(rd, lambda);
        let verma = pbw.monomials(depth);
        let verma = sort_basis(rd, lambda, &pbw, verma);

        // Group Verma monomials by weight and quotient each weight space.
        let mut spaces: BTreeMap<Vec<Rational>, Vec<usize>> = BTreeMap::new();
        for (idx, m) in verma.iter().enumerate() {
            spaces.entry(pbw.eps_weight(m)).or_default().push(idx);
        }
        // projector from Verma coordinates of a weight space to quotient coordinates
        struct Quot {
            members: Vec<usize>,
            chosen: Vec<usize>,
            proj: Vec<Vec<Rational>>,
        }
        let mut quots: HashMap<Vec<Rational>, Quot> = HashMap::new();
        for (wt, members) in &spaces {
            let gram: Vec<Vec<Rational>> = members
                .iter()
                .map(|&a| members.iter().map(|&b| pbw.shapovalov(&verma[a], &verma[b])).collect())
                .collect();
            let pick = independent_subset(&gram);
            if pick.is_empty() {
                continue;
            }
            let g_bb: Vec<Vec<Rational>> =
                pick.iter().map(|&i| pick.iter().map(|&j| gram[i][j].clone()).collect()).collect();
            let inv = invert(&g_bb).expect("principal block on pivot columns is nonsingular");
            let proj: Vec<Vec<Rational>> = (0..pick.len())
                .map(|r| {
                    (0..members.len())
                        .map(|col| (0..pick.len()).map(|k| &inv[r][k] * &gram[pick[k]][col]).sum())
                        .collect()
                })
                .collect();
            let chosen = pick.iter().map(|&i| members[i]).collect();
            quots.insert(wt.clone(), Quot { members: members.clone(), chosen, proj });
        }

        // Basis of the quotient, in Verma basis order.
        let mut basis: Vec<usize> = quots.values().flat_map(|q| q.chosen.iter().copied()).collect();
        basis.sort_unstable();
        let position: HashMap<usize, usize> = basis.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let verma_index: HashMap<&Monomial, usize> = verma.iter().enumerate().map(|(i, m)| (m, i)).collect();

        let project = |v: &LinComb, out_col: usize, entries: &mut Vec<(usize, usize, Rational)>| {
            let Some((first, _)) = v.iter().next() else { return };
            let wt = pbw.eps_weight(first);
            let Some(q) = quots.get(&wt) else { return };
            let mut coords = vec![Rational::zero(); q.members.len()];
            for (mono, coef) in v {
                // monomials beyond the truncation vanish in the quotient
                if let Some(&vi) = verma_index.get(mono) {
                    let local = q.members.iter().position(|&x| x == vi).expect("same weight space");
                    coords[local] = coef.clone();
                }
            }
            for (r, row) in q.proj.iter().enumerate() {
                let val: Rational = row.iter().zip(&coords).map(|(a, b)| a * b).sum();
                if !val.is_zero() {
                    entries.push((position[&q.chosen[r]], out_col, val));
                }
            }
        };

        let dim_out = basis.len();
        let mut e = Vec::new();
        let mut f = Vec::new();
        for i in 0..rd.rank() {
            let mut ee = Vec::new();
            let mut ff = Vec::new();
            for (col, &vi) in basis.iter().enumerate() {
                let up = pbw.act(i, i + 1, &verma[vi]);
                project(&up, col, &mut ee);
                let down = pbw.act(i + 1, i, &verma[vi]);
                if pbw.level(&verma[vi]) < depth {
                    project(&down, col, &mut ff);
                }
            }
            e.push(SparseMatrix::from_triplets(dim_out, dim_out, ee));
            f.push(SparseMatrix::from_triplets(dim_out, dim_out, ff));
        }
        let weights: Vec<Weight> = basis.iter().map(|&vi| weight_of(rd, &pbw, &verma[vi])).collect();
        let labels = basis.iter().map(|&vi| verma[vi].clone()).collect();
        let h = cartan_matrices(rd, &weights);
        Ok(Representation {
            root_data: rd.clone(),
            highest_weight: lambda.clone(),
            weights,
            labels,
            e,
            f,
            h,
            kind: RepKind::Irreducible,
        })
    }

    /// Verma module `M_λ` truncated to PBW monomials of root height at most
    /// `depth`. Lowering operators out of the top level are dropped.
    pub fn verma(rd: &RootData, lambda: &Weight, depth: usize) -> Result<Self, RepError> {
        rd.check_weight(lambda)?;
        let pbw = Pbw::new(rd, lambda);
        let monos = sort_basis(rd, lambda, &pbw, pbw.monomials(depth));
        let index: HashMap<&Monomial, usize> = monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let dim = monos.len();
        let mut e = Vec::new();
        let mut f = Vec::new();
        for i in 0..rd.rank() {
            let mut ee = Vec::new();
            let mut ff = Vec::new();
            for (col, m) in monos.iter().enumerate() {
                for (mono, coef) in pbw.act(i, i + 1, m).iter() {
                    ee.push((index[mono], col, coef.clone()));
                }
                for (mono, coef) in pbw.act(i + 1, i, m).iter() {
                    if let Some(&row) = index.get(mono) {
                        ff.push((row, col, coef.clone()));
                    }
                }
            }
            e.push(SparseMatrix::from_triplets(dim, dim, ee));
            f.push(SparseMatrix::from_triplets(dim, dim, ff));
        }
        let weights: Vec<Weight> = monos.iter().map(|m| weight_of(rd, &pbw, m)).collect();
        let h = cartan_matrices(rd, &weights);
        Ok(Representation {
            root_data: rd.clone(),
            highest_weight: lambda.clone(),
            weights,
            labels: monos,
            e,
            f,
            h,
            kind: RepKind::VermaTruncated { depth },
        })
    }

    pub fn root_data(&self) -> &RootData {
        &self.root_data
    }

    pub fn highest_weight(&self) -> &Weight {
        &self.highest_weight
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn kind(&self) -> &RepKind {
        &self.kind
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn labels(&self) -> &[Vec<u32>] {
        &self.labels
    }

    /// Index of the highest weight vector (always the first basis state).
    pub fn highest_vector(&self) -> usize {
        0
    }

    pub fn e(&self, i: usize) -> &SparseMatrix<Rational> {
        &self.e[i]
    }

    pub fn f(&self, i: usize) -> &SparseMatrix<Rational> {
        &self.f[i]
    }

    pub fn h(&self, i: usize) -> &SparseMatrix<Rational> {
        &self.h[i]
    }

    /// Matrix unit `E_{ab}` of `gl_n` (off-diagonal, zero-based), built from
    /// the Chevalley generators by commutators.
    pub fn root_vector(&self, a: usize, b: usize) -> SparseMatrix<Rational> {
        assert!(a != b && a < self.root_data.n() && b < self.root_data.n());
        if b == a + 1 {
            return self.e[a].clone();
        }
        if a == b + 1 {
            return self.f[b].clone();
        }
        if a < b {
            // [E_{a,a+1}, E_{a+1,b}] = E_{ab}
            self.e[a].commutator(&self.root_vector(a + 1, b))
        } else {
            // [E_{a,b+1}, E_{b+1,b}] = E_{ab}
            self.root_vector(a, b + 1).commutator(&self.f[b])
        }
    }

    /// Multiplicity of each weight.
    pub fn weight_multiplicities(&self) -> BTreeMap<Weight, usize> {
        let mut out = BTreeMap::new();
        for w in &self.weights {
            *out.entry(w.clone()).or_insert(0) += 1;
        }
        out
    }

    /// Contravariant form on the spanning set `F_{i1} … F_{ik} v_λ` of one
    /// weight space, computed from the matrices alone with `⟨v_λ, v_λ⟩ = 1` and
    /// `F_i` adjoint to `E_i`. Rows are indexed like the returned words.
    pub fn contravariant_gram(&self, weight: &Weight) -> (Vec<Vec<usize>>, Vec<Vec<Rational>>) {
        let rd = &self.root_data;
        let target = rd.root_coords(&self.highest_weight.sub(weight));
        let Some(counts) = target
            .iter()
            .map(|c| if c.is_integer() && *c >= Rational::zero() { c.to_integer().to_usize() } else { None })
            .collect::<Option<Vec<usize>>>()
        else {
            return (Vec::new(), Vec::new());
        };
        let mut words = Vec::new();
        let mut cur = Vec::new();
        let mut left = counts;
        words_with_counts(&mut left, &mut cur, &mut words);

        let top = self.highest_vector();
        let mut v0 = vec![Rational::zero(); self.dim()];
        v0[top] = int(1);
        let vectors: Vec<Vec<Rational>> = words
            .iter()
            .map(|word| word.iter().rev().fold(v0.clone(), |v, &i| self.f[i].apply(&v)))
            .collect();
        let gram = words
            .iter()
            .map(|word| {
                vectors
                    .iter()
                    .map(|y| word.iter().fold(y.clone(), |v, &i| self.e[i].apply(&v))[top].clone())
                    .collect()
            })
            .collect();
        (words, gram)
    }
}

fn words_with_counts(left: &mut [usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if left.iter().all(|&c| c == 0) {
        out.push(cur.clone());
        return;
    }
    for i in 0..left.len() {
        if left[i] > 0 {
            left[i] -= 1;
            cur.push(i);
            words_with_counts(left, cur, out);
            cur.pop();
            left[i] += 1;
        }
    }
}

fn weight_of(rd: &RootData, pbw: &Pbw, m: &Monomial) -> Weight {
    let eps = pbw.eps_weight(m);
    Weight((0..rd.rank()).map(|i| &eps[i] - &eps[i + 1]).collect())
}

fn cartan_matrices(rd: &RootData, weights: &[Weight]) -> Vec<SparseMatrix<Rational>> {
    (0..rd.rank())
        .map(|i| SparseMatrix::diagonal(weights.iter().map(|w| w.0[i].clone()).collect()))
        .collect()
}

/// Graded by level, then by weight (root coordinates of `λ - wt`), then
/// lexicographically by PBW exponents.
fn sort_basis(rd: &RootData, lambda: &Weight, pbw: &Pbw, mut monos: Vec<Monomial>) -> Vec<Monomial> {
    let key = |m: &Monomial| {
        let depth_coords = rd.root_coords(&lambda.sub(&weight_of(rd, pbw, m)));
        (pbw.level(m), depth_coords, m.clone())
    };
    monos.sort_by_cached_key(key);
    monos
}

/// Tensor product `M_1 ⊗ … ⊗ M_N`, basis states in mixed radix with the first
/// factor most significant.
#[derive(Debug, Clone)]
pub struct TensorRep {
    factors: Vec<Representation>,
    dims: Vec<usize>,
    weights: Vec<Weight>,
}

impl TensorRep {
    pub fn new(factors: Vec<Representation>) -> Result<Self, RepError> {
        let Some(first) = factors.first() else {
            return Ok(TensorRep { factors, dims: Vec::new(), weights: Vec::new() });
        };
        let rank = first.root_data.rank();
        if factors.iter().any(|f| f.root_data.rank() != rank) {
            return Err(RepError::MismatchedRootData);
        }
        let dims: Vec<usize> = factors.iter().map(|f| f.dim()).collect();
        let total: usize = dims.iter().product();
        let mut weights = Vec::with_capacity(total);
        for idx in 0..total {
            let digits = split_index(idx, &dims);
            let w = digits
                .iter()
                .zip(&factors)
                .fold(Weight::zero(rank), |acc, (&d, f)| acc.add(&f.weights[d]));
            weights.push(w);
        }
        Ok(TensorRep { factors, dims, weights })
    }

    pub fn factors(&self) -> &[Representation] {
        &self.factors
    }

    pub fn n_sites(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn root_data(&self) -> &RootData {
        self.factors[0].root_data()
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (&d, &n)| acc * n + d)
    }

    pub fn digits(&self, idx: usize) -> Vec<usize> {
        split_index(idx, &self.dims)
    }

    /// `A^{(site)} = 1 ⊗ … ⊗ A ⊗ … ⊗ 1`.
    pub fn site_operator(&self, site: usize, a: &SparseMatrix<Rational>) -> SparseMatrix<Rational> {
        let before: usize = self.dims[..site].iter().product();
        let after: usize = self.dims[site + 1..].iter().product();
        SparseMatrix::identity(before).kron(a).kron(&SparseMatrix::identity(after))
    }

    /// Diagonal action `Σ_site X^{(site)}` of a generator chosen per factor.
    pub fn total(&self, pick: impl Fn(&Representation) -> SparseMatrix<Rational>) -> SparseMatrix<Rational> {
        (0..self.n_sites()).fold(SparseMatrix::zeros(self.dim(), self.dim()), |acc, s| {
            acc.add(&self.site_operator(s, &pick(&self.factors[s])))
        })
    }

    pub fn total_e(&self, i: usize) -> SparseMatrix<Rational> {
        self.total(|r| r.e(i).clone())
    }

    pub fn total_f(&self, i: usize) -> SparseMatrix<Rational> {
        self.total(|r| r.f(i).clone())
    }

    pub fn total_h(&self, i: usize) -> SparseMatrix<Rational> {
        self.total(|r| r.h(i).clone())
    }

    /// Tensor product of the highest weight vectors.
    pub fn top_index(&self) -> usize {
        0
    }

    pub fn weight_space(&self, mu: &Weight) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.weights[k] == *mu).collect()
    }

    /// Exact basis of the vectors of weight `μ` killed by every total `E_i`.
    pub fn singular_space(&self, mu: &Weight) -> SingularSpace {
        let indices = self.weight_space(mu);
        if indices.is_empty() {
            return SingularSpace { dim: self.dim(), indices, basis: Vec::new() };
        }
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for i in 0..self.root_data().rank() {
            let e = self.total_e(i);
            // only rows hit by the weight space matter
            let mut touched: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
            for (c, &col) in indices.iter().enumerate() {
                for r in 0..e.nrows() {
                    let v = e.get(r, col);
                    if !v.is_zero() {
                        touched.entry(r).or_insert_with(|| vec![Rational::zero(); indices.len()])[c] = v;
                    }
                }
            }
            rows.extend(touched.into_values());
        }
        let basis = nullspace(&rows, indices.len());
        SingularSpace { dim: self.dim(), indices, basis }
    }
}

fn split_index(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
    out
}

/// Basis of a singular weight space, as coefficient vectors over the states
/// listed in `indices`.
#[derive(Debug, Clone)]
pub struct SingularSpace {
    dim: usize,
    pub indices: Vec<usize>,
    pub basis: Vec<Vec<Rational>>,
}

impl SingularSpace {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Basis vectors embedded in the full tensor space.
    pub fn full_vectors(&self) -> Vec<Vec<Rational>> {
        self.basis
            .iter()
            .map(|b| {
                let mut v = vec![Rational::zero(); self.dim];
                for (&i, c) in self.indices.iter().zip(b) {
                    v[i] = c.clone();
                }
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rank;

    fn a(rank: usize) -> RootData {
        RootData::type_a(rank).unwrap()
    }

    fn w(m: &[i64]) -> Weight {
        Weight::from_ints(m)
    }

    fn check_relations(rep: &Representation, exact_below: Option<usize>) {
        let rd = rep.root_data();
        let l = rd.rank();
        let keep: Vec<usize> = match exact_below {
            // columns whose images stay inside the truncation
            Some(depth) => (0..rep.dim())
                .filter(|&k| rd.height(&rep.highest_weight().sub(&rep.weights()[k])) < int(depth as i64))
                .collect(),
            None => (0..rep.dim()).collect(),
        };
        for i in 0..l {
            for j in 0..l {
                let comm = rep.e(i).commutator(rep.f(j));
                let expected = if i == j { rep.h(i).clone() } else { SparseMatrix::zeros(rep.dim(), rep.dim()) };
                let diff = comm.sub(&expected);
                for &c in &keep {
                    for r in 0..rep.dim() {
                        assert!(diff.get(r, c).is_zero(), "[E{i},F{j}] wrong at ({r},{c})");
                    }
                }
                let he = rep.h(i).commutator(rep.e(j));
                assert_eq!(he, rep.e(j).scale(&int(rd.cartan_entry(i, j))));
            }
        }
    }

    #[test]
    fn defining_rep_of_sl2() {
        let rep = Representation::irreducible(&a(1), &w(&[1])).unwrap();
        assert_eq!(rep.dim(), 2);
        assert_eq!(rep.f(0).to_dense(), vec![vec![int(0), int(0)], vec![int(1), int(0)]]);
        assert_eq!(rep.e(0).to_dense(), vec![vec![int(0), int(1)], vec![int(0), int(0)]]);
        check_relations(&rep, None);
    }

    #[test]
    fn sl3_dimensions() {
        let rd = a(2);
        assert_eq!(Representation::irreducible(&rd, &w(&[1, 0])).unwrap().dim(), 3);
        assert_eq!(Representation::irreducible(&rd, &w(&[0, 1])).unwrap().dim(), 3);
        let adj = Representation::irreducible(&rd, &w(&[1, 1])).unwrap();
        assert_eq!(adj.dim(), 8);
        check_relations(&adj, None);
        assert_eq!(adj.weight_multiplicities()[&Weight::zero(2)], 2);
    }

    #[test]
    fn irreducible_dims_match_weyl_formula() {
        for (rank, lam) in [(1, vec![4]), (2, vec![2, 1]), (2, vec![0, 3]), (3, vec![1, 0, 1]), (3, vec![0, 1, 0])] {
            let rd = a(rank);
            let lam = w(&lam);
            let rep = Representation::irreducible(&rd, &lam).unwrap();
            assert_eq!(int(rep.dim() as i64), rd.weyl_dimension(&lam), "λ = {lam}");
            check_relations(&rep, None);
        }
    }

    #[test]
    fn serre_relations_hold() {
        let rd = a(3);
        let rep = Representation::irreducible(&rd, &w(&[1, 1, 0])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let times = 1 - rd.cartan_entry(i, j);
                let mut x = rep.e(j).clone();
                for _ in 0..times {
                    x = rep.e(i).commutator(&x);
                }
                assert!(x.is_zero(), "Serre relation for ({i},{j})");
                let mut y = rep.f(j).clone();
                for _ in 0..times {
                    y = rep.f(i).commutator(&y);
                }
                assert!(y.is_zero());
            }
        }
    }

    #[test]
    fn contravariant_form_is_nondegenerate_on_irreducibles() {
        let rd = a(2);
        let rep = Representation::irreducible(&rd, &w(&[2, 1])).unwrap();
        for (wt, mult) in rep.weight_multiplicities() {
            let (_, g) = rep.contravariant_gram(&wt);
            assert_eq!(rank(&g), mult, "weight {wt}");
        }
    }

    #[test]
    fn non_dominant_and_cap_errors() {
        let rd = a(2);
        assert!(matches!(Representation::irreducible(&rd, &w(&[-1, 0])), Err(RepError::NotDominant(_))));
        assert!(matches!(
            Representation::irreducible_with_cap(&rd, &w(&[3, 3]), 10),
            Err(RepError::DimensionCap { dim: 64, cap: 10 })
        ));
    }

    #[test]
    fn verma_sl2_is_a_string() {
        let rd = a(1);
        let rep = Representation::verma(&rd, &Weight(vec![crate::scalar::rat(1, 3)]), 3).unwrap();
        assert_eq!(rep.dim(), 4);
        let mults = rep.weight_multiplicities();
        assert!(mults.values().all(|&m| m == 1));
        check_relations(&rep, Some(3));
        let top = Representation::verma(&rd, &w(&[1]), 0).unwrap();
        assert_eq!(top.dim(), 1);
        assert!(top.e(0).is_zero());
    }

    #[test]
    fn verma_sl3_partition_counts() {
        let rd = a(2);
        let lam = w(&[3, -1]);
        let rep = Representation::verma(&rd, &lam, 2).unwrap();
        let target = lam.sub(&rd.simple_root(0)).sub(&rd.simple_root(1));
        assert_eq!(rep.weight_multiplicities()[&target], 2);
        check_relations(&rep, Some(2));
        let deeper = Representation::verma(&rd, &lam, 4).unwrap();
        // 2α1 + 2α2 has Kostant partition count 3
        let t2 = target.sub(&rd.simple_root(0)).sub(&rd.simple_root(1));
        assert_eq!(deeper.weight_multiplicities()[&t2], 3);
        check_relations(&deeper, Some(4));
    }

    #[test]
    fn tensor_weights_and_singular_spaces() {
        let rd = a(1);
        let v1 = Representation::irreducible(&rd, &w(&[1])).unwrap();
        let t = TensorRep::new(vec![v1.clone(), v1.clone()]).unwrap();
        assert_eq!(t.dim(), 4);
        let mut mult = BTreeMap::new();
        for wt in t.weights() {
            *mult.entry(wt.to_ints().unwrap()[0]).or_insert(0) += 1;
        }
        assert_eq!(mult, BTreeMap::from([(-2, 1), (0, 2), (2, 1)]));
        assert_eq!(t.singular_space(&w(&[2])).len(), 1);
        let singlet = t.singular_space(&w(&[0]));
        assert_eq!(singlet.len(), 1);
        // proportional to v+⊗v- - v-⊗v+
        let v = &singlet.full_vectors()[0];
        assert_eq!(v[1].clone() + v[2].clone(), int(0));
        assert!(!v[1].is_zero());

        let single = TensorRep::new(vec![v1.clone()]).unwrap();
        assert_eq!(single.site_operator(0, v1.e(0)), v1.e(0).clone());

        let t3 = TensorRep::new(vec![v1.clone(), v1.clone(), v1]).unwrap();
        assert_eq!(t3.weight_space(&w(&[1])).len(), 3);
        assert_eq!(t3.singular_space(&w(&[1])).len(), 2);
        assert_eq!(t3.singular_space(&w(&[3])).len(), 1);
        assert!(t3.singular_space(&w(&[-1])).is_empty());
    }

    #[test]
    fn site_operators_commute() {
        let rd = a(2);
        let v = Representation::irreducible(&rd, &w(&[1, 0])).unwrap();
        let vb = Representation::irreducible(&rd, &w(&[0, 1])).unwrap();
        let t = TensorRep::new(vec![v.clone(), vb.clone()]).unwrap();
        let x = t.site_operator(0, v.e(0));
        let y = t.site_operator(1, vb.f(1));
        assert!(x.commutator(&y).is_zero());
        assert_eq!(t.dim(), 9);
    }

    #[test]
    fn mismatched_tensor_rejected() {
        let v1 = Representation::irreducible(&a(1), &w(&[1])).unwrap();
        let v2 = Representation::irreducible(&a(2), &w(&[1, 0])).unwrap();
        assert!(matches!(TensorRep::new(vec![v1, v2]), Err(RepError::MismatchedRootData)));
    }

    #[test]
    fn decomposition_counts_dimension() {
        // Σ_μ dim Sing(μ) · dim V_μ = Π dim V_{λ_i}
        for (rank, lams) in [(1, vec![vec![1], vec![2], vec![1]]), (2, vec![vec![1, 0], vec![1, 1]])] {
            let rd = a(rank);
            let reps: Vec<_> = lams.iter().map(|l| Representation::irreducible(&rd, &w(l)).unwrap()).collect();
            let t = TensorRep::new(reps).unwrap();
            let distinct: std::collections::BTreeSet<Weight> = t.weights().iter().cloned().collect();
            let mut total = int(0);
            for mu in distinct.into_iter().filter(|m| m.is_dominant_integral()) {
                let k = t.singular_space(&mu).len() as i64;
                total += int(k) * rd.weyl_dimension(&mu);
            }
            assert_eq!(total, int(t.dim() as i64));
        }
    }
}
