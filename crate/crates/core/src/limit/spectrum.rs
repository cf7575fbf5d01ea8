use rayon::prelude::*;
use serde::Serialize;

use super::{limit_operator, window::entry_norm, Direction, LimitWindow};
use crate::error::Result;
use crate::operator::BandOperator;
use crate::space::Dist;

#[derive(Clone, Debug, Serialize)]
pub struct WindowNu {
    pub label: String,
    pub window_nu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stencil_nu: Option<f64>,
    /// The value used in the summary: stencil `ν` when available.
    pub interior_nu: f64,
}

#[derive(Clone, Debug)]
pub struct SpectrumSample {
    pub windows: Vec<LimitWindow>,
    pub nus: Vec<WindowNu>,
    pub min_nu: f64,
    pub argmin: usize,
}

impl SpectrumSample {
    pub const NOTE: &'static str = "sampled, not exhaustive";
}

/// Limit operators along each direction with their interior lower norms.
/// Directions are processed in parallel; the first failing direction (in
/// input order) is reported.
pub fn sample_spectrum(a: &BandOperator, dirs: &[Direction], radius: Dist, tol: f64, tail: usize, p: f64) -> Result<SpectrumSample> {
    if dirs.is_empty() {
        return Err(crate::Error::BadDirection("no directions given".into()));
    }
    let results: Vec<Result<(LimitWindow, WindowNu)>> = dirs
        .par_iter()
        .map(|d| {
            let w = limit_operator(a, d, radius, tol, tail)?;
            let window_nu = w.window_nu(p)?;
            let stencil_nu = w.stencil_nu(p);
            let nu = WindowNu { label: d.label.clone(), window_nu, stencil_nu, interior_nu: stencil_nu.unwrap_or(window_nu) };
            Ok((w, nu))
        })
        .collect();
    let mut windows = Vec::with_capacity(dirs.len());
    let mut nus = Vec::with_capacity(dirs.len());
    for r in results {
        let (w, n) = r?;
        windows.push(w);
        nus.push(n);
    }
    let mut argmin = 0;
    for i in 1..nus.len() {
        if nus[i].interior_nu < nus[argmin].interior_nu {
            argmin = i;
        }
    }
    Ok(SpectrumSample { min_nu: nus[argmin].interior_nu, argmin, windows, nus })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GhostPoint {
    pub radius: Dist,
    pub sup: f64,
}

/// For each radius `r`, the largest entry norm `‖A_xy‖` with `x` or `y`
/// outside `B(centre; r)`.
pub fn ghost_profile(a: &BandOperator, radii: &[Dist]) -> Vec<GhostPoint> {
    let space = a.space();
    let c = space.center();
    let k = a.block_dim();
    let mut reach: Vec<(Dist, f64)> =
        a.entries().map(|(x, y, v)| (space.dist(c, x).max(space.dist(c, y)), entry_norm(v, k))).collect();
    reach.sort_by(|u, v| u.0.cmp(&v.0));
    let mut suffix = vec![0.0f64; reach.len() + 1];
    for i in (0..reach.len()).rev() {
        suffix[i] = suffix[i + 1].max(reach[i].1);
    }
    radii
        .iter()
        .map(|&r| {
            let i = reach.partition_point(|e| e.0 <= r);
            GhostPoint { radius: r, sup: suffix[i] }
        })
        .collect()
}
