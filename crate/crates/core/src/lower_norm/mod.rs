//! Lower norms `ν(A|_F) = inf ‖A v‖_p / ‖v‖_p` over `v` supported in `F`,
//! and their support-localised variants.
//!
//! `A|_F` is the column restriction: `A` viewed as a map `ℓᵖ(F) → ℓᵖ(X)`.

mod cascade;
mod essential;
mod localize;
mod optimizer;

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, BandCholesky};
use crate::operator::{BandOperator, Vector};
use crate::space::{Dist, PointId};
use crate::C64;

pub use cascade::{witness_cascade, CascadeStage};
pub use essential::{essential_nu, interior_columns};
pub use localize::{localization_check, solve_c_prime, LocalizationReport};

/// Column count (times block size) up to which `p = 2` uses a dense SVD.
pub const DENSE_LIMIT: usize = 400;
/// Restarts of the `p ≠ 2` optimiser.
pub const RESTARTS: usize = 16;
const NU_SEED: u64 = 0x6c6f_7765_72;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactSvd,
    IterativeSvd,
    Optimizer,
    BruteForce,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactSvd => "exact-svd",
            Method::IterativeSvd => "iterative-svd",
            Method::Optimizer => "optimizer",
            Method::BruteForce => "brute-force",
        }
    }
}

#[derive(Clone, Debug)]
pub struct NuReport {
    pub value: f64,
    /// Dense vector over the whole space, supported in the column set.
    pub witness: Vector,
    pub support_diameter: Dist,
    pub method: Method,
    pub tolerance: f64,
    /// Ball centre of the winning column set, for localised lower norms.
    pub center: Option<PointId>,
    pub columns: usize,
}

impl NuReport {
    /// `‖A w‖_p / ‖w‖_p` recomputed from the witness.
    pub fn witness_ratio(&self, a: &BandOperator, p: f64) -> f64 {
        let w = self.witness.norm(p);
        if w == 0.0 {
            return f64::INFINITY;
        }
        linalg::norm_p(&a.apply_slice(&self.witness.values), p) / w
    }
}

pub(crate) fn normalize_set(a: &BandOperator, f: &[PointId]) -> Result<Vec<PointId>> {
    if f.is_empty() {
        return Err(Error::EmptyRestriction);
    }
    let mut f = f.to_vec();
    f.sort_unstable();
    f.dedup();
    for &x in &f {
        a.space().check(x)?;
    }
    Ok(f)
}

fn embed(a: &BandOperator, f: &[PointId], local: &[C64]) -> Vector {
    let k = a.block_dim();
    let mut v = Vector::zeros(a.len(), k);
    for (i, &x) in f.iter().enumerate() {
        v.values[x * k..(x + 1) * k].copy_from_slice(&local[i * k..(i + 1) * k]);
    }
    v
}

fn finish(a: &BandOperator, f: &[PointId], value: f64, local: &[C64], method: Method, tolerance: f64) -> NuReport {
    let witness = embed(a, f, local);
    let support = witness.support();
    NuReport {
        value,
        support_diameter: a.space().set_diameter(&support),
        witness,
        method,
        tolerance,
        center: None,
        columns: f.len(),
    }
}

/// `ν(A|_F)` in `ℓᵖ`.
pub fn nu(a: &BandOperator, f: &[PointId], p: f64) -> Result<NuReport> {
    crate::operator::check_exponent(p)?;
    let f = normalize_set(a, f)?;
    if p == 2.0 {
        nu2(a, &f)
    } else {
        let (_, m) = a.column_matrix(&f);
        let (value, local) = optimizer::minimize(&m, p, RESTARTS, NU_SEED);
        Ok(finish(a, &f, value, &local, Method::Optimizer, 1e-8))
    }
}

/// `p ≠ 2` optimiser without the singular-vector warm start; exposed for
/// cross-checks at `p = 2`.
pub fn nu_optimizer(a: &BandOperator, f: &[PointId], p: f64, warm_start: bool) -> Result<NuReport> {
    crate::operator::check_exponent(p)?;
    let f = normalize_set(a, f)?;
    let (_, m) = a.column_matrix(&f);
    let (value, local) = if warm_start {
        optimizer::minimize(&m, p, RESTARTS, NU_SEED)
    } else {
        optimizer::minimize_cold(&m, p, RESTARTS, NU_SEED)
    };
    Ok(finish(a, &f, value, &local, Method::Optimizer, 1e-8))
}

fn nu2(a: &BandOperator, f: &[PointId]) -> Result<NuReport> {
    let k = a.block_dim();
    let dim = f.len() * k;
    if dim <= DENSE_LIMIT {
        let (_, m) = a.column_matrix(f);
        let (s, v) = linalg::smallest_singular(&m);
        return Ok(finish(a, f, s, &v, Method::ExactSvd, 1e-10));
    }
    // Inverse Krylov iteration on the banded Gram matrix of the columns.
    let b = a.restrict_columns(f);
    let g = b.adjoint().compose(&b)?;
    let mut pos = vec![usize::MAX; a.len()];
    f.iter().enumerate().for_each(|(i, &x)| pos[x] = i);
    let mut bw = 0usize;
    let mut gmax: f64 = 0.0;
    for (x, y, blk) in g.entries() {
        bw = bw.max((pos[x].abs_diff(pos[y]) + 1) * k);
        if x == y {
            for i in 0..k {
                gmax = gmax.max(blk[i * k + i].re);
            }
        }
    }
    bw = bw.min(dim - 1);
    let gij = |i: usize, j: usize| -> C64 {
        let (x, y) = (f[i / k], f[j / k]);
        g.entry(x, y).map_or(C64::new(0.0, 0.0), |blk| blk[(i % k) * k + (j % k)])
    };
    let mut tau = 1e-14 * gmax.max(f64::MIN_POSITIVE);
    let chol = loop {
        let shifted = |i: usize, j: usize| if i == j { gij(i, j) + tau } else { gij(i, j) };
        if let Some(c) = BandCholesky::factor(dim, bw, shifted) {
            break c;
        }
        tau *= 100.0;
    };
    let apply = |x: &[C64], y: &mut [C64]| {
        y.copy_from_slice(x);
        chol.solve(y);
    };
    let (_, v) = linalg::lanczos_top(dim, apply, linalg::start_vector(dim, NU_SEED), 1e-10, crate::operator::MAX_MATVEC)?;
    let mut report = finish(a, f, 0.0, &v, Method::IterativeSvd, 1e-10);
    report.value = report.witness_ratio(a, 2.0);
    Ok(report)
}

/// Localised lower norm: the minimum of `ν(A|_{F ∩ B(x; s)})` over `x ∈ F`.
/// Identical column sets are evaluated once; ties go to the smallest `x`.
pub fn nu_s(a: &BandOperator, f: &[PointId], s: Dist, p: f64) -> Result<NuReport> {
    crate::operator::check_exponent(p)?;
    let f = normalize_set(a, f)?;
    let mut in_f = vec![false; a.len()];
    f.iter().for_each(|&x| in_f[x] = true);
    let mut sets: Vec<Vec<PointId>> = Vec::new();
    let mut index: HashMap<Vec<PointId>, usize> = HashMap::new();
    let mut set_of = Vec::with_capacity(f.len());
    for &x in &f {
        let cols: Vec<PointId> = a.space().ball_unchecked(x, s).into_iter().filter(|&y| in_f[y]).collect();
        let next = sets.len();
        let id = *index.entry(cols.clone()).or_insert(next);
        if id == next {
            sets.push(cols);
        }
        set_of.push(id);
    }
    let reports: Vec<Result<NuReport>> = sets.par_iter().map(|cols| nu(a, cols, p)).collect();
    let reports: Vec<NuReport> = reports.into_iter().collect::<Result<_>>()?;
    let mut best = 0usize;
    for i in 1..f.len() {
        if reports[set_of[i]].value < reports[set_of[best]].value {
            best = i;
        }
    }
    let mut r = reports[set_of[best]].clone();
    r.center = Some(f[best]);
    Ok(r)
}

/// Random-sampling upper estimate of `ν(A|_F)` for tiny `F` (`|F|·k < 6`).
/// Samples are split into fixed chunks with their own seeds, so the result
/// does not depend on the thread count.
pub fn nu_brute_force(a: &BandOperator, f: &[PointId], p: f64, samples: usize, seed: u64) -> Result<NuReport> {
    crate::operator::check_exponent(p)?;
    let f = normalize_set(a, f)?;
    let dim = f.len() * a.block_dim();
    if dim >= 6 {
        return Err(Error::DimensionTooLarge { dim, max: 5 });
    }
    let (_, m) = a.column_matrix(&f);
    const CHUNK: usize = 4096;
    let chunks = samples.div_ceil(CHUNK).max(1);
    let best: Vec<(f64, Vec<C64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let count = CHUNK.min(samples - c * CHUNK);
            let mut best = (f64::INFINITY, vec![C64::new(0.0, 0.0); dim]);
            let mut v = vec![C64::new(0.0, 0.0); dim];
            for _ in 0..count {
                v.iter_mut().for_each(|z| *z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                let r = ratio(&m, &v, p);
                if r < best.0 {
                    best = (r, v.clone());
                }
            }
            best
        })
        .collect();
    let (value, v) = best.into_iter().fold((f64::INFINITY, Vec::new()), |acc, b| if b.0 < acc.0 { b } else { acc });
    Ok(finish(a, &f, value, &v, Method::BruteForce, 0.0))
}

pub(crate) fn ratio(m: &DMatrix<C64>, v: &[C64], p: f64) -> f64 {
    let w = m * nalgebra::DVector::from_column_slice(v);
    let d = linalg::norm_p(v, p);
    if d == 0.0 {
        return f64::INFINITY;
    }
    linalg::norm_p(w.as_slice(), p) / d
}
