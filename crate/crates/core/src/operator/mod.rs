//! Sparse band operators over a [`Space`].
//!
//! Entries are `k×k` complex blocks (`k <= 4`, scalars when `k = 1`), stored
//! row-compressed and sorted by `(x, y)`. Exact zero blocks are dropped, so
//! propagation always reflects the true support.

mod coloring;
mod decompose;
pub mod gen;
mod io;
mod norm;

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::space::{Dist, PointId, Space};

pub use coloring::{three_color, Coloring};
pub use decompose::{decompose, Decomposition};
pub use io::{read_operator, write_operator, OperatorHeader};
pub use norm::{norm2, schur_bound};
pub(crate) use norm::{check_exponent, MAX_MATVEC};

pub const MAX_BLOCK: usize = 4;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub struct BandOperator {
    space: Arc<Space>,
    k: usize,
    row_ptr: Vec<usize>,
    cols: Vec<PointId>,
    vals: Vec<C64>,
    propagation: Dist,
    entry_sup: f64,
}

pub(crate) fn same_space(a: &Space, b: &Space) -> bool {
    std::ptr::eq(a, b) || (a.name() == b.name() && a.len() == b.len() && a.descriptor() == b.descriptor())
}

fn block_mul(a: &[C64], b: &[C64], k: usize, out: &mut [C64]) {
    for i in 0..k {
        for j in 0..k {
            let mut s = ZERO;
            for l in 0..k {
                s += a[i * k + l] * b[l * k + j];
            }
            out[i * k + j] += s;
        }
    }
}

impl BandOperator {
    /// Operator from `(x, y, block)` triplets; blocks are row-major `k×k`.
    pub fn from_blocks(space: Arc<Space>, k: usize, triplets: Vec<(PointId, PointId, Vec<C64>)>) -> Result<Self> {
        if k == 0 || k > MAX_BLOCK {
            return Err(Error::BlockDim(k));
        }
        let mut rows: Vec<Vec<(PointId, Vec<C64>)>> = vec![Vec::new(); space.len()];
        for (x, y, b) in triplets {
            space.check(x)?;
            space.check(y)?;
            if b.len() != k * k {
                return Err(Error::BlockShape { got: b.len(), expected: k * k });
            }
            rows[x].push((y, b));
        }
        for (x, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|e| e.0);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::DuplicateEntry { x, y: w[0].0 });
            }
        }
        Ok(Self::from_rows(space, k, rows))
    }

    /// Scalar operator from `(x, y, value)` triplets.
    pub fn from_triplets(space: Arc<Space>, triplets: Vec<(PointId, PointId, C64)>) -> Result<Self> {
        Self::from_blocks(space, 1, triplets.into_iter().map(|(x, y, v)| (x, y, vec![v])).collect())
    }

    /// Rows must be sorted by column without duplicates.
    pub(crate) fn from_rows(space: Arc<Space>, k: usize, rows: Vec<Vec<(PointId, Vec<C64>)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut propagation = 0;
        let mut entry_sup: f64 = 0.0;
        row_ptr.push(0);
        for (x, row) in rows.into_iter().enumerate() {
            for (y, b) in row {
                if b.iter().all(|z| *z == ZERO) {
                    continue;
                }
                propagation = propagation.max(space.dist(x, y));
                entry_sup = entry_sup.max(linalg::block_norm2(&b, k));
                cols.push(y);
                vals.extend_from_slice(&b);
            }
            row_ptr.push(cols.len());
        }
        Self { space, k, row_ptr, cols, vals, propagation, entry_sup }
    }

    pub fn zero(space: Arc<Space>, k: usize) -> Self {
        let n = space.len();
        Self::from_rows(space, k, vec![Vec::new(); n])
    }

    pub fn identity(space: Arc<Space>, k: usize) -> Self {
        Self::scalar_identity(space, k, C64::new(1.0, 0.0))
    }

    pub fn scalar_identity(space: Arc<Space>, k: usize, c: C64) -> Self {
        let mut b = vec![ZERO; k * k];
        for i in 0..k {
            b[i * k + i] = c;
        }
        let rows = (0..space.len()).map(|x| vec![(x, b.clone())]).collect();
        Self::from_rows(space, k, rows)
    }

    /// Scalar multiplication operator `(f v)(x) = f(x) v(x)`.
    pub fn diagonal(space: Arc<Space>, f: impl Fn(PointId) -> C64) -> Self {
        let rows = (0..space.len()).map(|x| vec![(x, vec![f(x)])]).collect();
        Self::from_rows(space, 1, rows)
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn block_dim(&self) -> usize {
        self.k
    }

    /// Number of points of the underlying space.
    pub fn len(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn propagation(&self) -> Dist {
        self.propagation
    }

    /// Largest spectral norm among the entry blocks.
    pub fn entry_sup(&self) -> f64 {
        self.entry_sup
    }

    /// Nonzero entries of row `x` as `(y, block)`, by increasing `y`.
    pub fn row(&self, x: PointId) -> impl Iterator<Item = (PointId, &[C64])> + '_ {
        let kk = self.k * self.k;
        (self.row_ptr[x]..self.row_ptr[x + 1]).map(move |i| (self.cols[i], &self.vals[i * kk..(i + 1) * kk]))
    }

    pub fn entries(&self) -> impl Iterator<Item = (PointId, PointId, &[C64])> + '_ {
        (0..self.len()).flat_map(move |x| self.row(x).map(move |(y, b)| (x, y, b)))
    }

    pub fn entry(&self, x: PointId, y: PointId) -> Option<&[C64]> {
        let kk = self.k * self.k;
        let (lo, hi) = (self.row_ptr[x], self.row_ptr[x + 1]);
        self.cols[lo..hi].binary_search(&y).ok().map(|i| &self.vals[(lo + i) * kk..(lo + i + 1) * kk])
    }

    /// Scalar entry; the `(0, 0)` component for block operators.
    pub fn get(&self, x: PointId, y: PointId) -> C64 {
        self.entry(x, y).map_or(ZERO, |b| b[0])
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.k != other.k || !same_space(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    fn combine(&self, other: &Self, a: C64, b: C64) -> Result<Self> {
        self.check_compatible(other)?;
        let kk = self.k * self.k;
        let rows = (0..self.len())
            .map(|x| {
                let mut m: BTreeMap<PointId, Vec<C64>> = BTreeMap::new();
                for (y, blk) in self.row(x) {
                    m.insert(y, blk.iter().map(|z| a * z).collect());
                }
                for (y, blk) in other.row(x) {
                    let e = m.entry(y).or_insert_with(|| vec![ZERO; kk]);
                    e.iter_mut().zip(blk).for_each(|(s, z)| *s += b * z);
                }
                m.into_iter().collect()
            })
            .collect();
        Ok(Self::from_rows(self.space.clone(), self.k, rows))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, C64::new(1.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, C64::new(1.0, 0.0), C64::new(-1.0, 0.0))
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: C64, other: &Self, b: C64) -> Result<Self> {
        self.combine(other, a, b)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|z| *z *= c);
        if c == ZERO {
            return Self::zero(self.space.clone(), self.k);
        }
        out.entry_sup *= c.norm();
        out
    }

    /// `self + c·1`.
    pub fn shift_by(&self, c: C64) -> Self {
        let id = Self::scalar_identity(self.space.clone(), self.k, c);
        self.add(&id).expect("same space")
    }

    /// Sparse product `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let k = self.k;
        let kk = k * k;
        let rows: Vec<Vec<(PointId, Vec<C64>)>> = (0..self.len())
            .into_par_iter()
            .map(|x| {
                let mut m: BTreeMap<PointId, Vec<C64>> = BTreeMap::new();
                for (y, a) in self.row(x) {
                    for (z, b) in other.row(y) {
                        let e = m.entry(z).or_insert_with(|| vec![ZERO; kk]);
                        block_mul(a, b, k, e);
                    }
                }
                m.into_iter().collect()
            })
            .collect();
        Ok(Self::from_rows(self.space.clone(), k, rows))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let k = self.k;
        let mut rows: Vec<Vec<(PointId, Vec<C64>)>> = vec![Vec::new(); self.len()];
        for (x, y, b) in self.entries() {
            let mut t = vec![ZERO; k * k];
            for i in 0..k {
                for j in 0..k {
                    t[j * k + i] = b[i * k + j].conj();
                }
            }
            rows[y].push((x, t));
        }
        Self::from_rows(self.space.clone(), k, rows)
    }

    /// Keep only entries whose column lies in `cols` (sorted or not).
    pub fn restrict_columns(&self, cols: &[PointId]) -> Self {
        let mut keep = vec![false; self.len()];
        cols.iter().for_each(|&c| keep[c] = true);
        self.filter(|_, y| keep[y])
    }

    pub fn filter(&self, f: impl Fn(PointId, PointId) -> bool) -> Self {
        let rows = (0..self.len()).map(|x| self.row(x).filter(|(y, _)| f(x, *y)).map(|(y, b)| (y, b.to_vec())).collect()).collect();
        Self::from_rows(self.space.clone(), self.k, rows)
    }

    /// Multiply entry `(x, y)` by the scalar `c(x, y)`.
    pub fn map_entries(&self, c: impl Fn(PointId, PointId) -> f64 + Sync) -> Self {
        let rows: Vec<Vec<(PointId, Vec<C64>)>> = (0..self.len())
            .into_par_iter()
            .map(|x| self.row(x).map(|(y, b)| (y, b.iter().map(|z| z * c(x, y)).collect())).collect())
            .collect();
        Self::from_rows(self.space.clone(), self.k, rows)
    }

    /// `y = A x` on flat vectors of length `n·k`.
    pub fn apply_slice(&self, x: &[C64]) -> Vec<C64> {
        let k = self.k;
        let mut y = vec![ZERO; self.len() * k];
        y.par_chunks_mut(k).enumerate().for_each(|(r, out)| {
            for (c, b) in self.row(r) {
                for i in 0..k {
                    for j in 0..k {
                        out[i] += b[i * k + j] * x[c * k + j];
                    }
                }
            }
        });
        y
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        if v.k != self.k || v.values.len() != self.len() * self.k {
            return Err(Error::SpaceMismatch);
        }
        Ok(Vector { k: self.k, values: self.apply_slice(&v.values) })
    }

    /// Dense matrix of the columns `cols` (in the given order), keeping only
    /// the rows that are touched. Returns the touched row points too.
    pub fn column_matrix(&self, cols: &[PointId]) -> (Vec<PointId>, DMatrix<C64>) {
        let k = self.k;
        let mut pos = vec![usize::MAX; self.len()];
        cols.iter().enumerate().for_each(|(i, &c)| pos[c] = i);
        let touched: Vec<PointId> = (0..self.len()).filter(|&x| self.row(x).any(|(y, _)| pos[y] != usize::MAX)).collect();
        let mut m = DMatrix::<C64>::zeros(touched.len() * k, cols.len() * k);
        for (ri, &x) in touched.iter().enumerate() {
            for (y, b) in self.row(x) {
                if pos[y] == usize::MAX {
                    continue;
                }
                for i in 0..k {
                    for j in 0..k {
                        m[(ri * k + i, pos[y] * k + j)] = b[i * k + j];
                    }
                }
            }
        }
        (touched, m)
    }

    /// Dense submatrix on `rows × cols`.
    pub fn submatrix(&self, rows: &[PointId], cols: &[PointId]) -> DMatrix<C64> {
        let k = self.k;
        let mut pos = vec![usize::MAX; self.len()];
        cols.iter().enumerate().for_each(|(i, &c)| pos[c] = i);
        let mut m = DMatrix::<C64>::zeros(rows.len() * k, cols.len() * k);
        for (ri, &x) in rows.iter().enumerate() {
            for (y, b) in self.row(x) {
                if pos[y] == usize::MAX {
                    continue;
                }
                for i in 0..k {
                    for j in 0..k {
                        m[(ri * k + i, pos[y] * k + j)] = b[i * k + j];
                    }
                }
            }
        }
        m
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let all: Vec<PointId> = (0..self.len()).collect();
        self.submatrix(&all, &all)
    }

    /// Largest entrywise difference `max ‖A_xy − B_xy‖` (spectral block norm).
    pub fn max_entry_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.entry_sup())
    }
}

impl PartialEq for BandOperator {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
            && same_space(&self.space, &other.space)
            && self.row_ptr == other.row_ptr
            && self.cols == other.cols
            && self.vals == other.vals
    }
}

/// A vector in `ℓᵖ(X, ℂᵏ)`, stored densely as `n·k` values.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    pub k: usize,
    pub values: Vec<C64>,
}

impl Vector {
    pub fn zeros(n: usize, k: usize) -> Self {
        Self { k, values: vec![ZERO; n * k] }
    }

    pub fn delta(n: usize, k: usize, x: PointId, component: usize) -> Self {
        let mut v = Self::zeros(n, k);
        v.values[x * k + component] = C64::new(1.0, 0.0);
        v
    }

    /// `(Σ ‖v(x)‖ᵖ)^{1/p}` with `ℓᵖ` norms on the blocks.
    pub fn norm(&self, p: f64) -> f64 {
        linalg::norm_p(&self.values, p)
    }

    pub fn support(&self) -> Vec<PointId> {
        self.values
            .chunks(self.k)
            .enumerate()
            .filter(|(_, c)| c.iter().any(|z| *z != ZERO))
            .map(|(x, _)| x)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::gen;
    use crate::space::{Descriptor, Norm};

    fn zwin(lo: i64, hi: i64) -> Arc<Space> {
        Arc::new(Space::build("z", Descriptor::Lattice { lo: vec![lo], hi: vec![hi], norm: Norm::L1 }).unwrap())
    }

    #[test]
    fn identity_and_shift_metadata() {
        let s = zwin(0, 20);
        let id = BandOperator::identity(s.clone(), 1);
        assert_eq!(id.propagation(), 0);
        assert_eq!(id.entry_sup(), 1.0);
        let sh = gen::shift(s.clone(), 1);
        assert_eq!(sh.propagation(), 1);
        let tri = gen::tridiagonal(s, C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        assert_eq!(tri.propagation(), 1);
        assert_eq!(tri.entry_sup(), 1.0);
    }

    #[test]
    fn duplicates_and_bad_ids_rejected() {
        let s = zwin(0, 3);
        let one = C64::new(1.0, 0.0);
        assert!(matches!(
            BandOperator::from_triplets(s.clone(), vec![(0, 1, one), (0, 1, one)]),
            Err(Error::DuplicateEntry { x: 0, y: 1 })
        ));
        assert!(matches!(BandOperator::from_triplets(s, vec![(0, 9, one)]), Err(Error::UnknownPoint(9))));
    }

    #[test]
    fn shift_adjoint_is_identity_in_interior() {
        let s = zwin(-10, 10);
        let sh = gen::shift(s.clone(), 1);
        let p = sh.compose(&sh.adjoint()).unwrap();
        for x in 1..s.len() {
            assert_eq!(p.get(x, x), C64::new(1.0, 0.0));
        }
        assert_eq!(p.get(0, 0), C64::new(0.0, 0.0));
        assert!(sh.compose(&BandOperator::zero(s, 1)).unwrap().is_zero());
    }

    #[test]
    fn tridiagonal_square_is_pentadiagonal() {
        let s = zwin(0, 30);
        let t = gen::tridiagonal(s, C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let t2 = t.compose(&t).unwrap();
        assert_eq!(t2.propagation(), 2);
        let dense = t.to_dense() * t.to_dense();
        assert!((t2.to_dense() - dense).norm() == 0.0);
    }

    #[test]
    fn shift_moves_deltas() {
        let s = zwin(0, 10);
        let sh = gen::shift(s, 1);
        let v = Vector::delta(11, 1, 3, 0);
        assert_eq!(sh.apply(&v).unwrap(), Vector::delta(11, 1, 4, 0));
    }

    #[test]
    fn block_compose_matches_dense() {
        let s = zwin(0, 12);
        let a = gen::random_band(s.clone(), 2, 2, 7);
        let b = gen::random_band(s, 2, 1, 8);
        let ab = a.compose(&b).unwrap();
        let dense = a.to_dense() * b.to_dense();
        assert!((ab.to_dense() - dense).norm() < 1e-12);
        assert!(ab.propagation() <= 3);
        let adj = a.adjoint().to_dense();
        assert!((adj - a.to_dense().adjoint()).norm() == 0.0);
    }
}
