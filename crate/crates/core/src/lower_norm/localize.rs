//! Checking that lower norms are witnessed by vectors of bounded support.
//!
//! With `m = 2r + 1` and a sparsification capturing a fraction `c'` of any
//! measure in `m`-separated pieces of diameter `f'(m)`, every `F` satisfies
//! `ν_s(A|_F) <= ν(A|_F)/c'^{1/p} + M((1 − c')/c')^{1/p}` with `s = f'(m)`.
//! Choosing `c'` so the right side is at most `ν + δ` whenever `ν <= M`
//! gives a support size that depends only on `r`, `M`, `δ` and the
//! sparsifier.

use rayon::prelude::*;
use serde::Serialize;

use super::{interior_columns, nu, nu_s};
use crate::error::{Error, Result};
use crate::operator::{schur_bound, BandOperator};
use crate::space::{Dist, PointId};
use crate::sparsify::Sparsifier;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizationReport {
    pub s: Dist,
    pub c_prime: f64,
    pub separation: Dist,
    pub norm_bound: f64,
    pub verified: bool,
    pub worst_gap: f64,
    /// Index of the set attaining the worst gap.
    pub worst_set: usize,
    pub sets_checked: usize,
    /// Smallest support radius that already meets `δ` on this family.
    pub empirical_s: Option<Dist>,
}

/// Smallest `c ∈ (0, 1)` (to bisection precision) with
/// `M(c^{-1/p} − 1) + M((1 − c)/c)^{1/p} <= δ`.
pub fn solve_c_prime(norm_bound: f64, delta: f64, p: f64) -> f64 {
    let excess = |c: f64| norm_bound * (c.powf(-1.0 / p) - 1.0) + norm_bound * ((1.0 - c) / c).powf(1.0 / p);
    if norm_bound <= 0.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn gaps(a: &BandOperator, family: &[Vec<PointId>], s: Dist, p: f64) -> Result<Vec<f64>> {
    family
        .par_iter()
        .map(|f| Ok(nu_s(a, f, s, p)?.value - nu(a, f, p)?.value))
        .collect()
}

/// Verify `ν_s(A|_F) <= ν(A|_F) + δ` over a family of column sets, with `s`
/// derived from the sparsifier's constants. Sets are first restricted to
/// interior columns; sets left empty are skipped.
pub fn localization_check(
    a: &BandOperator,
    delta: f64,
    sparsifier: &dyn Sparsifier,
    family: &[Vec<PointId>],
    p: f64,
    norm_bound: Option<f64>,
    search_empirical: bool,
) -> Result<LocalizationReport> {
    let r = a.propagation();
    let m = 2 * r + 1;
    let norm_bound = match norm_bound {
        Some(b) => b,
        None => schur_bound(a, p)?,
    };
    let c_prime = solve_c_prime(norm_bound, delta, p);
    let s = sparsifier.constants(a.space(), c_prime, m).ok_or(Error::MissingConstants { m, c: c_prime })?;
    let interior = interior_columns(a);
    let mut keep = vec![false; a.len()];
    interior.iter().for_each(|&x| keep[x] = true);
    let family: Vec<Vec<PointId>> = family
        .iter()
        .map(|f| f.iter().copied().filter(|&x| keep[x]).collect::<Vec<_>>())
        .filter(|f| !f.is_empty())
        .collect();
    let g = gaps(a, &family, s, p)?;
    let (worst_set, worst_gap) = g.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let verified = worst_gap <= delta + 1e-12;
    let empirical_s = if search_empirical && verified {
        let (mut lo, mut hi) = (0, s.min(a.space().diameter()));
        while lo < hi {
            let mid = (lo + hi) / 2;
            let worst = gaps(a, &family, mid, p)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
            if worst <= delta + 1e-12 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    } else {
        None
    };
    Ok(LocalizationReport {
        s,
        c_prime,
        separation: m,
        norm_bound,
        verified,
        worst_gap: worst_gap.max(0.0),
        worst_set,
        sets_checked: family.len(),
        empirical_s,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::operator::gen;
    use crate::space::{Descriptor, Norm, Space};
    use crate::sparsify::{BlockSparsifier, GreedySparsifier};
    use crate::C64;

    #[test]
    fn c_prime_meets_budget() {
        let c = solve_c_prime(2.0, 0.1, 2.0);
        let excess = 2.0 * (c.powf(-0.5) - 1.0) + 2.0 * ((1.0 - c) / c).sqrt();
        assert!(excess <= 0.1 && excess > 0.0999);
    }

    #[test]
    fn diagonal_gap_is_zero_and_greedy_has_no_constants() {
        let s = Arc::new(Space::build("z", Descriptor::Lattice { lo: vec![0], hi: vec![40], norm: Norm::L1 }).unwrap());
        let d = BandOperator::diagonal(s.clone(), |x| C64::new(1.0 + (x % 3) as f64, 0.0));
        let family: Vec<Vec<usize>> = (0..30).map(|a| (a..a + 8).collect()).collect();
        let rep = localization_check(&d, 0.1, &BlockSparsifier::default(), &family, 2.0, None, true).unwrap();
        assert!(rep.verified);
        assert_eq!(rep.worst_gap, 0.0);
        assert_eq!(rep.empirical_s, Some(0));
        assert!(matches!(
            localization_check(&d, 0.1, &GreedySparsifier::default(), &family, 2.0, None, false),
            Err(Error::MissingConstants { .. })
        ));
        let t = gen::tridiagonal(s, C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let rep = localization_check(&t, 0.1, &BlockSparsifier::default(), &family, 2.0, None, false).unwrap();
        assert!(rep.verified);
    }
}
