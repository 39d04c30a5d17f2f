//! Sparse matrices over a [`Scalar`] field and exact Gaussian elimination.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::scalar::{Scalar, C64};

/// Row-major sparse matrix; each row holds `(column, value)` pairs sorted by
/// column with no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> SparseMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, data: vec![Vec::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let data = (0..n).map(|i| vec![(i, S::one())]).collect();
        SparseMatrix { rows: n, cols: n, data }
    }

    pub fn diagonal(entries: Vec<S>) -> Self {
        let n = entries.len();
        let data = entries
            .into_iter()
            .enumerate()
            .map(|(i, v)| if v.is_zero() { Vec::new() } else { vec![(i, v)] })
            .collect();
        SparseMatrix { rows: n, cols: n, data }
    }

    /// Sums duplicate entries.
    pub fn from_triplets(rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize, S)>) -> Self {
        let mut maps: Vec<BTreeMap<usize, S>> = vec![BTreeMap::new(); rows];
        for (r, c, v) in entries {
            assert!(r < rows && c < cols, "entry ({r}, {c}) outside {rows}x{cols}");
            let slot = maps[r].entry(c).or_insert_with(S::zero);
            *slot = slot.clone() + v;
        }
        let data = maps
            .into_iter()
            .map(|m| m.into_iter().filter(|(_, v)| !v.is_zero()).collect())
            .collect();
        SparseMatrix { rows, cols, data }
    }

    pub fn from_dense(rows: &[Vec<S>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self::from_triplets(
            n,
            m,
            rows.iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, v)| (i, j, v.clone()))),
        )
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn row(&self, r: usize) -> &[(usize, S)] {
        &self.data[r]
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        match self.data[r].binary_search_by_key(&c, |(j, _)| *j) {
            Ok(k) => self.data[r][k].1.clone(),
            Err(_) => S::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &S)> + '_ {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(j, v)| (i, *j, v)))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SparseMatrix<T> {
        SparseMatrix::from_triplets(self.rows, self.cols, self.triplets().map(|(i, j, v)| (i, j, f(v))))
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zeros(self.rows, self.cols);
        }
        let data = self
            .data
            .iter()
            .map(|r| r.iter().map(|(j, v)| (*j, v.clone() * c.clone())).collect())
            .collect();
        SparseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        Self::from_triplets(
            self.rows,
            self.cols,
            self.triplets()
                .map(|(i, j, v)| (i, j, v.clone()))
                .chain(other.triplets().map(|(i, j, v)| (i, j, v.clone()))),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let mut data = Vec::with_capacity(self.rows);
        for row in &self.data {
            let mut acc: BTreeMap<usize, S> = BTreeMap::new();
            for (k, a) in row {
                for (j, b) in &other.data[*k] {
                    let slot = acc.entry(*j).or_insert_with(S::zero);
                    *slot = slot.clone() + a.clone() * b.clone();
                }
            }
            data.push(acc.into_iter().filter(|(_, v)| !v.is_zero()).collect());
        }
        SparseMatrix { rows: self.rows, cols: other.cols, data }
    }

    /// `[self, other] = self·other - other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(i, j, v)| (j, i, v.clone())))
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        let mut entries = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.triplets() {
            for (k, l, b) in other.triplets() {
                entries.push((i * r2 + k, j * c2 + l, a.clone() * b.clone()));
            }
        }
        Self::from_triplets(self.rows * r2, self.cols * c2, entries)
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        self.data
            .iter()
            .map(|row| row.iter().fold(S::zero(), |acc, (j, a)| acc + a.clone() * v[*j].clone()))
            .collect()
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(), |acc, i| acc + self.get(i, i))
    }

    /// Whether `self` is `c · I` for some `c`; returns `c`.
    pub fn as_scalar(&self) -> Option<S> {
        if self.rows != self.cols {
            return None;
        }
        let c = if self.rows == 0 { S::zero() } else { self.get(0, 0) };
        let diff = self.sub(&Self::identity(self.rows).scale(&c));
        diff.is_zero().then_some(c)
    }

    pub fn to_dense(&self) -> Vec<Vec<S>> {
        let mut out = vec![vec![S::zero(); self.cols]; self.rows];
        for (i, j, v) in self.triplets() {
            out[i][j] = v.clone();
        }
        out
    }

    pub fn to_complex(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v.to_c64();
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.triplets().map(|(_, _, v)| v.magnitude()).fold(0.0, f64::max)
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<S: Scalar>(m: &mut [Vec<S>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let v = m[r][j].clone();
                    if !v.is_zero() {
                        m[i][j] = m[i][j].clone() - f.clone() * v;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<S: Scalar>(m: &[Vec<S>]) -> usize {
    let mut work = m.to_vec();
    rref(&mut work).len()
}

/// Basis of `{ x : m x = 0 }`, one vector per free column.
pub fn nullspace<S: Scalar>(m: &[Vec<S>], cols: usize) -> Vec<Vec<S>> {
    let mut work = m.to_vec();
    let pivots = rref(&mut work);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(); cols];
            v[f] = S::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -work[r][f].clone();
            }
            v
        })
        .collect()
}

/// Solves `a x = b` for square nonsingular `a`, column by column.
pub fn solve<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = a.len();
    let k = b.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().chain(rb.iter()).cloned().collect())
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..n + k].to_vec()).collect())
}

pub fn invert<S: Scalar>(a: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = a.len();
    let id: Vec<Vec<S>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect();
    solve(a, &id)
}

/// Greedy choice of rows/columns `B` of a symmetric Gram matrix such that
/// `G[B, B]` is nonsingular and has full rank, scanning indices in order.
pub fn independent_subset<S: Scalar>(gram: &[Vec<S>]) -> Vec<usize> {
    // Row-reducing the Gram matrix: pivot columns index a maximal
    // nonsingular principal block for a symmetric matrix of this rank.
    let mut work = gram.to_vec();
    rref(&mut work)
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, Rational};

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &a {
                assert_eq!(dot(row, v), int(0));
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let inv = invert(&a).unwrap();
        assert_eq!(inv, vec![vec![int(1), int(-1)], vec![int(-1), int(2)]]);
        assert!(invert(&m(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn sparse_products() {
        let a = SparseMatrix::from_dense(&m(&[&[0, 1], &[0, 0]]));
        let b = a.transpose();
        let h = a.commutator(&b);
        assert_eq!(h, SparseMatrix::diagonal(vec![int(1), int(-1)]));
        let k = a.kron(&SparseMatrix::identity(2));
        assert_eq!(k.nrows(), 4);
        assert_eq!(k.get(0, 2), int(1));
        assert_eq!(k.get(1, 3), int(1));
        assert_eq!(k.nnz(), 2);
        assert_eq!(SparseMatrix::<Rational>::identity(3).scale(&rat(3, 4)).as_scalar(), Some(rat(3, 4)));
        assert_eq!(a.as_scalar(), None);
    }

    #[test]
    fn independent_gram_block() {
        // Gram of vectors e1, e1, e2 (duplicate in the middle).
        let g = m(&[&[1, 1, 0], &[1, 1, 0], &[0, 0, 1]]);
        assert_eq!(independent_subset(&g), vec![0, 2]);
    }
}
