//! Splitting a band operator into multiplication operators times partial
//! translations.
//!
//! The nonzero pattern of `A` is a bipartite graph between rows and columns.
//! A proper edge colouring splits it into matchings, each of which is the
//! graph of a partial translation. König's theorem gives a colouring with
//! exactly `Δ` colours (`Δ` the largest row or column count), which is at
//! most the growth `N(prop(A))`; Kempe-chain recolouring finds it.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::BandOperator;
use crate::space::{PartialTranslation, PointId, Space};

/// `A = Σ_k f_k V_k`, where `V_k` sends `e_y` to `e_{t_k(y)}` and the
/// multiplier `f_k` is indexed by range points: `f_k(x) = A_{x, t_k⁻¹(x)}`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub translations: Vec<PartialTranslation>,
    /// Per summand, `(x, block)` sorted by `x` over the range of `t_k`.
    pub multipliers: Vec<Vec<(PointId, Vec<C64>)>>,
    pub block_dim: usize,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.translations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.translations.is_empty()
    }

    pub fn multiplier_sup(&self) -> f64 {
        self.multipliers
            .iter()
            .flatten()
            .map(|(_, b)| crate::linalg::block_norm2(b, self.block_dim))
            .fold(0.0, f64::max)
    }

    /// Rebuild `Σ f_k V_k`.
    pub fn reconstruct(&self, space: Arc<Space>) -> BandOperator {
        let mut trip = Vec::new();
        for (t, f) in self.translations.iter().zip(&self.multipliers) {
            let inv = t.inverse();
            for (x, b) in f {
                let y = inv.apply(*x).expect("multiplier lives on the range");
                trip.push((*x, y, b.clone()));
            }
        }
        BandOperator::from_blocks(space, self.block_dim, trip).expect("matchings are disjoint")
    }
}

struct Colouring {
    /// `left[x][c]` = column joined to row `x` by an edge of colour `c`.
    left: Vec<Vec<Option<PointId>>>,
    right: Vec<Vec<Option<PointId>>>,
}

impl Colouring {
    fn free_left(&self, x: PointId) -> usize {
        self.left[x].iter().position(Option::is_none).expect("degree below colour count")
    }

    fn free_right(&self, y: PointId) -> usize {
        self.right[y].iter().position(Option::is_none).expect("degree below colour count")
    }

    fn set(&mut self, x: PointId, y: PointId, c: usize) {
        self.left[x][c] = Some(y);
        self.right[y][c] = Some(x);
    }

    fn unset(&mut self, x: PointId, y: PointId, c: usize) {
        self.left[x][c] = None;
        self.right[y][c] = None;
    }

    /// Swap colours `a` and `b` along the alternating path starting at
    /// column `y` with its `a`-edge.
    fn flip(&mut self, y: PointId, a: usize, b: usize) {
        let mut path = Vec::new();
        let mut cur = y;
        while let Some(x) = self.right[cur][a] {
            path.push((x, cur, a));
            match self.left[x][b] {
                Some(y2) => {
                    path.push((x, y2, b));
                    cur = y2;
                }
                None => break,
            }
        }
        for &(x, y, c) in &path {
            self.unset(x, y, c);
        }
        for &(x, y, c) in &path {
            self.set(x, y, if c == a { b } else { a });
        }
    }
}

pub fn decompose(a: &BandOperator) -> Decomposition {
    let n = a.len();
    let mut deg_l = vec![0usize; n];
    let mut deg_r = vec![0usize; n];
    for (x, y, _) in a.entries() {
        deg_l[x] += 1;
        deg_r[y] += 1;
    }
    let colours = deg_l.iter().chain(&deg_r).copied().max().unwrap_or(0);
    let mut col = Colouring { left: vec![vec![None; colours]; n], right: vec![vec![None; colours]; n] };
    for (x, y, _) in a.entries() {
        let ca = col.free_left(x);
        let cb = col.free_right(y);
        if col.right[y][ca].is_some() {
            // `ca` is busy at y and `cb` free there: make `ca` free at y.
            col.flip(y, ca, cb);
        }
        col.set(x, y, ca);
    }
    let mut translations = Vec::with_capacity(colours);
    let mut multipliers = Vec::with_capacity(colours);
    for c in 0..colours {
        let mut pairs = Vec::new();
        let mut f = Vec::new();
        for x in 0..n {
            if let Some(y) = col.left[x][c] {
                pairs.push((y, x));
                f.push((x, a.entry(x, y).expect("coloured edges are entries").to_vec()));
            }
        }
        if pairs.is_empty() {
            continue;
        }
        translations.push(PartialTranslation::new(a.space(), pairs).expect("a colour class is a matching"));
        multipliers.push(f);
    }
    Decomposition { translations, multipliers, block_dim: a.block_dim() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::gen;
    use crate::space::{Descriptor, Norm};

    #[test]
    fn identity_has_one_summand() {
        let s = Arc::new(Space::build("n", Descriptor::NatWindow { max: 20 }).unwrap());
        let d = decompose(&BandOperator::identity(s.clone(), 1));
        assert_eq!(d.len(), 1);
        assert_eq!(d.translations[0].displacement(), 0);
        assert_eq!(d.reconstruct(s.clone()), BandOperator::identity(s, 1));
    }

    #[test]
    fn tridiagonal_needs_three() {
        let s = Arc::new(Space::build("z", Descriptor::Lattice { lo: vec![-30], hi: vec![30], norm: Norm::L1 }).unwrap());
        let t = gen::tridiagonal(s.clone(), C64::new(2.0, 0.0), C64::new(-1.0, 0.0));
        let d = decompose(&t);
        assert_eq!(d.len(), 3);
        assert_eq!(d.reconstruct(s), t);
    }

    #[test]
    fn random_quadrant_operator_reconstructs_exactly() {
        let s = Arc::new(Space::build("q", Descriptor::Quadrant { max: 9, norm: Norm::L1 }).unwrap());
        let a = gen::random_sparse_band(s.clone(), 1, 2, 0.6, 3);
        let d = decompose(&a);
        assert!(d.len() <= s.growth(a.propagation()));
        assert!(d.multiplier_sup() <= a.entry_sup());
        assert_eq!(d.reconstruct(s), a);
    }
}
