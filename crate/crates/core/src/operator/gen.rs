//! Generators for the standard example operators.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::BandOperator;
use crate::space::{Dist, PointId, Space};

fn first_coord(space: &Space, x: PointId) -> i64 {
    space.coords(x).map_or(x as i64, |c| c[0])
}

/// Translation by `g`: `(V v)(x + g) = v(x)`, i.e. entries `(x + g, x) = 1`.
/// Needs coordinates; on `ℕ` with `g = [1]` this is the unilateral shift.
pub fn translation(space: Arc<Space>, g: &[i64]) -> BandOperator {
    let trip = (0..space.len())
        .filter_map(|x| {
            let c: Vec<i64> = space.coords(x)?.iter().zip(g).map(|(a, b)| a + b).collect();
            space.point_at(&c).map(|y| (y, x, C64::new(1.0, 0.0)))
        })
        .collect();
    BandOperator::from_triplets(space, trip).expect("translation entries are distinct")
}

/// Shift along the first axis by `step`.
pub fn shift(space: Arc<Space>, step: i64) -> BandOperator {
    let mut g = vec![0; space.dim().max(1)];
    g[0] = step;
    translation(space, &g)
}

/// `diag` on the diagonal and `off` between points at distance one.
pub fn tridiagonal(space: Arc<Space>, diag: C64, off: C64) -> BandOperator {
    let mut trip = Vec::new();
    for x in 0..space.len() {
        for y in space.ball_unchecked(x, 1) {
            let v = if x == y { diag } else { off };
            trip.push((x, y, v));
        }
    }
    BandOperator::from_triplets(space, trip).expect("distinct entries")
}

/// Translation-invariant operator `(A v)(x) = Σ_h a(h) v(x + h)`, truncated
/// to the window.
pub fn stencil(space: Arc<Space>, taps: &[(Vec<i64>, C64)]) -> BandOperator {
    let mut trip = Vec::new();
    for x in 0..space.len() {
        let c = space.coords(x).expect("stencil operators need coordinates");
        for (h, a) in taps {
            let t: Vec<i64> = c.iter().zip(h).map(|(p, q)| p + q).collect();
            if let Some(y) = space.point_at(&t) {
                trip.push((x, y, *a));
            }
        }
    }
    BandOperator::from_triplets(space, trip).expect("distinct taps")
}

/// Diagonal with `1` at odd first coordinate and `0` at even.
pub fn parity(space: Arc<Space>) -> BandOperator {
    let s = space.clone();
    BandOperator::diagonal(space, move |x| C64::new(first_coord(&s, x).rem_euclid(2) as f64, 0.0))
}

/// Band-one operator with entries `2^{-max(x, y)}` on `ℕ`.
pub fn ghost(space: Arc<Space>) -> BandOperator {
    let mut trip = Vec::new();
    for x in 0..space.len() {
        for y in space.ball_unchecked(x, 1) {
            let m = first_coord(&space, x).max(first_coord(&space, y));
            trip.push((x, y, C64::new((-m as f64).exp2(), 0.0)));
        }
    }
    BandOperator::from_triplets(space, trip).expect("distinct entries")
}

/// Multiplication by the slowly oscillating `sin(log(1 + x))`.
pub fn sin_log(space: Arc<Space>) -> BandOperator {
    let s = space.clone();
    BandOperator::diagonal(space, move |x| C64::new((first_coord(&s, x) as f64).ln_1p().sin(), 0.0))
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random operator with every entry within `prop` filled in.
pub fn random_band(space: Arc<Space>, k: usize, prop: Dist, seed: u64) -> BandOperator {
    random_sparse_band(space, k, prop, 1.0, seed)
}

/// Random operator keeping each entry within `prop` with probability `density`.
pub fn random_sparse_band(space: Arc<Space>, k: usize, prop: Dist, density: f64, seed: u64) -> BandOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trip = Vec::new();
    for x in 0..space.len() {
        for y in space.ball_unchecked(x, prop) {
            if rng.gen_bool(density.clamp(0.0, 1.0)) {
                trip.push((x, y, (0..k * k).map(|_| random_c64(&mut rng)).collect()));
            }
        }
    }
    BandOperator::from_blocks(space, k, trip).expect("distinct entries")
}

/// Random translation-invariant taps with `‖h‖∞ <= prop` in `dim` dimensions.
pub fn random_stencil(dim: usize, prop: i64, seed: u64) -> Vec<(Vec<i64>, C64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = (2 * prop + 1) as usize;
    let total = side.pow(dim as u32);
    (0..total)
        .map(|mut i| {
            let h: Vec<i64> = (0..dim)
                .map(|_| {
                    let c = (i % side) as i64 - prop;
                    i /= side;
                    c
                })
                .collect();
            (h, random_c64(&mut rng))
        })
        .collect()
}
