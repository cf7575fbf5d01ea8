//! Multi-start descent for `min ‖M v‖_p / ‖v‖_p` over complex `v`.
//!
//! The objective `h(v) = log ‖Mv‖_p − log ‖v‖_p` is scale invariant and is
//! minimised by L-BFGS on its Wirtinger gradient with Armijo backtracking.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::{self, norm_p};
use crate::C64;

const MAX_ITER: usize = 3000;
const MEMORY: usize = 8;
/// Iterations between stall checks.
const STALL_WINDOW: usize = 20;

fn weighted(v: &[C64], p: f64) -> Vec<C64> {
    v.iter()
        .map(|z| {
            let r = z.norm();
            if r == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                z * r.powf(p - 2.0)
            }
        })
        .collect()
}

fn objective(m: &DMatrix<C64>, v: &[C64], p: f64) -> f64 {
    let w = m * DVector::from_column_slice(v);
    norm_p(w.as_slice(), p).ln() - norm_p(v, p).ln()
}

fn gradient(m: &DMatrix<C64>, v: &[C64], p: f64) -> Option<Vec<C64>> {
    let w = m * DVector::from_column_slice(v);
    let nw = norm_p(w.as_slice(), p).powf(p);
    if nw == 0.0 {
        return None;
    }
    let nv = norm_p(v, p).powf(p);
    let gw = m.adjoint() * DVector::from_vec(weighted(w.as_slice(), p));
    let gv = weighted(v, p);
    Some(gw.iter().zip(&gv).map(|(a, b)| a / nw - b / nv).collect())
}

fn normalize(v: &mut [C64], p: f64) {
    let n = norm_p(v, p);
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
}

fn real_dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Local L-BFGS descent from `v`; returns the ratio and the final unit
/// vector. The objective is scale invariant, so the iterate is only
/// renormalised (and the curvature memory dropped) when its norm drifts.
fn descend(m: &DMatrix<C64>, mut v: Vec<C64>, p: f64) -> (f64, Vec<C64>) {
    normalize(&mut v, p);
    let mut h = objective(m, &v, p);
    let Some(mut g) = gradient(m, &v, p) else {
        return (0.0, v);
    };
    let mut memory: VecDeque<(Vec<C64>, Vec<C64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut checkpoint = h;
    for it in 0..MAX_ITER {
        if it > 0 && it % STALL_WINDOW == 0 {
            if checkpoint - h <= 1e-14 * h.abs().max(1.0) {
                break;
            }
            checkpoint = h;
        }
        let gg = real_dot(&g, &g);
        if gg.sqrt() < 1e-11 {
            break;
        }
        // Two-loop recursion for the quasi-Newton direction.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, rho) in memory.iter().rev() {
            let a = rho * real_dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= yi * a);
            alphas.push(a);
        }
        if let Some((s, y, _)) = memory.back() {
            let gamma = real_dot(s, y) / real_dot(y, y);
            q.iter_mut().for_each(|z| *z *= gamma);
        }
        for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
            let b = rho * real_dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += si * (a - b));
        }
        let mut slope = real_dot(&g, &q);
        if !(slope > 0.0) {
            q = g.clone();
            slope = gg;
            memory.clear();
        }
        let mut t = if memory.is_empty() { 1.0 / gg.sqrt().max(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<C64> = v.iter().zip(&q).map(|(a, b)| a - b * t).collect();
            let hc = objective(m, &cand, p);
            if hc <= h - 1e-4 * t * slope {
                accepted = Some((cand, hc));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, hc)) = accepted else {
            break;
        };
        let Some(gc) = gradient(m, &cand, p) else {
            return (0.0, cand);
        };
        let s: Vec<C64> = cand.iter().zip(&v).map(|(a, b)| a - b).collect();
        let y: Vec<C64> = gc.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = real_dot(&s, &y);
        if sy > 1e-16 * real_dot(&s, &s).sqrt() * real_dot(&y, &y).sqrt() {
            if memory.len() == MEMORY {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        v = cand;
        g = gc;
        h = hc;
        let n = norm_p(&v, p);
        if !(0.5..=2.0).contains(&n) {
            normalize(&mut v, p);
            g = gradient(m, &v, p).unwrap_or(g);
            memory.clear();
        }
    }
    normalize(&mut v, p);
    (h.exp(), v)
}

fn random_start(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn best_of(m: &DMatrix<C64>, p: f64, starts: Vec<Vec<C64>>) -> (f64, Vec<C64>) {
    let results: Vec<(f64, Vec<C64>)> = starts.into_par_iter().map(|s| descend(m, s, p)).collect();
    let mut best = 0;
    for i in 1..results.len() {
        if results[i].0 < results[best].0 {
            best = i;
        }
    }
    results.into_iter().nth(best).expect("at least one restart")
}

/// Restart 0 starts at the smallest right singular vector; the rest are
/// seeded random vectors.
pub(crate) fn minimize(m: &DMatrix<C64>, p: f64, restarts: usize, seed: u64) -> (f64, Vec<C64>) {
    let dim = m.ncols();
    let (_, v0) = linalg::smallest_singular(m);
    let starts = std::iter::once(v0).chain((1..restarts).map(|r| random_start(dim, seed.wrapping_add(r as u64)))).collect();
    best_of(m, p, starts)
}

pub(crate) fn minimize_cold(m: &DMatrix<C64>, p: f64, restarts: usize, seed: u64) -> (f64, Vec<C64>) {
    let dim = m.ncols();
    let starts = (0..restarts).map(|r| random_start(dim, seed.wrapping_add(r as u64))).collect();
    best_of(m, p, starts)
}
