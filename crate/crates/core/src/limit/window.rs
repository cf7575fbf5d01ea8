use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{symbol, Direction};
use crate::error::{Error, Result};
use crate::linalg;
use crate::lower_norm::nu;
use crate::operator::{norm2, schur_bound, BandOperator};
use crate::space::{match_bijective, Dist, PointId, Space, SubsetIsometry, Template};
use crate::C64;

/// Windows averaged into the limit matrix, and the stabilisation length
/// required of the metric templates.
pub const DEFAULT_TAIL: usize = 5;

/// A stabilised pointed ball of the limit space.
#[derive(Clone, Debug)]
pub struct LimitSpace {
    pub template: Template,
    pub radius: Dist,
    /// All basepoints within margin.
    pub basepoints: Vec<PointId>,
    /// Index of the first basepoint of the stabilised run.
    pub stabilized_from: usize,
    /// Matchings of the template onto each stabilised ball.
    pub matchings: Vec<SubsetIsometry>,
}

/// Isometry classes among the last basepoints when no stabilisation occurs.
#[derive(Clone, Debug, Serialize)]
pub struct Divergence {
    pub radius: Dist,
    pub basepoints: Vec<PointId>,
    /// Class index of each basepoint's ball.
    pub class_of: Vec<usize>,
    /// Number of points in each class representative.
    pub class_sizes: Vec<usize>,
}

#[derive(Clone, Debug)]
pub enum LimitSpaceOutcome {
    Stabilized(LimitSpace),
    Diverged(Divergence),
}

/// Match pointed balls `B(x_n; R)` against the template cut out at the last
/// basepoint, walking back while the matches succeed.
pub fn limit_space(space: &Space, dir: &Direction, radius: Dist, tail: usize) -> Result<LimitSpaceOutcome> {
    let basepoints = dir.basepoints(space, radius)?;
    let tail = tail.max(1);
    if basepoints.len() < tail {
        return Err(Error::BadDirection(format!(
            "`{}` has {} basepoints within margin {radius}, need {tail}",
            dir.label,
            basepoints.len()
        )));
    }
    let last = *basepoints.last().unwrap();
    let (template, _) = Template::from_ball(space, last, radius);
    let mut matchings = Vec::new();
    for &b in basepoints.iter().rev() {
        match match_bijective(space, &template, b, radius) {
            Some(m) => matchings.push(m),
            None => break,
        }
    }
    matchings.reverse();
    let stabilized_from = basepoints.len() - matchings.len();
    if matchings.len() >= tail {
        return Ok(LimitSpaceOutcome::Stabilized(LimitSpace { template, radius, basepoints, stabilized_from, matchings }));
    }
    let recent = basepoints[basepoints.len() - tail..].to_vec();
    let mut reps: Vec<Template> = Vec::new();
    let mut class_of = Vec::with_capacity(tail);
    for &b in &recent {
        let (t, _) = Template::from_ball(space, b, radius);
        match reps.iter().position(|r| r.is_isometric(&t)) {
            Some(i) => class_of.push(i),
            None => {
                class_of.push(reps.len());
                reps.push(t);
            }
        }
    }
    Ok(LimitSpaceOutcome::Diverged(Divergence {
        radius,
        basepoints: recent,
        class_of,
        class_sizes: reps.iter().map(Template::len).collect(),
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extraction {
    WindowMatch,
    Shift,
}

/// Deviation of one stabilised window from the averaged matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationPoint {
    pub n: usize,
    pub basepoint: PointId,
    pub deviation: f64,
}

/// An extracted limit operator on a pointed ball of the limit space.
#[derive(Clone, Debug)]
pub struct LimitWindow {
    pub label: String,
    pub method: Extraction,
    pub radius: Dist,
    pub template: Template,
    /// The window matrix as an operator on the template.
    pub operator: BandOperator,
    pub cauchy_tail: f64,
    pub tol: f64,
    pub stabilized_from: usize,
    pub tail: Vec<PointId>,
    pub deviations: Vec<DeviationPoint>,
    pub norm: f64,
    /// Schur bound of the source operator.
    pub source_bound: f64,
    pub source_propagation: Dist,
    /// Whether the tail runs away from every genuine boundary face of a box
    /// window, so the limit space is a full lattice.
    pub escapes_boundary: bool,
}

impl LimitWindow {
    pub fn contraction_ok(&self) -> bool {
        self.norm <= self.source_bound + self.tol
    }

    pub fn propagation(&self) -> Dist {
        self.operator.propagation()
    }

    /// Template indices within `r` of the base.
    pub fn ball(&self, r: Dist) -> Vec<usize> {
        self.operator.space().ball_unchecked(self.template.base(), r)
    }

    /// Columns whose rows are fully inside the window.
    pub fn interior(&self) -> Vec<usize> {
        self.ball(self.radius.saturating_sub(self.source_propagation))
    }

    /// `ν` of the window restricted to interior columns.
    pub fn window_nu(&self, p: f64) -> Result<f64> {
        let cols = self.interior();
        if cols.is_empty() {
            return Err(Error::EmptyRestriction);
        }
        Ok(nu(&self.operator, &cols, p)?.value)
    }

    /// `ν` of the bilateral convolution with this window's stencil, when the
    /// window is translation invariant on a full lattice ball (`p = 2`).
    pub fn stencil_nu(&self, p: f64) -> Option<f64> {
        if p != 2.0 {
            return None;
        }
        let taps = symbol::stencil(self)?;
        Some(symbol::min_singular(&taps, self.operator.block_dim(), self.template.offsets()?[0].len()))
    }

    /// Stencil `ν` where available, window `ν` otherwise.
    pub fn interior_nu(&self, p: f64) -> Result<f64> {
        match self.stencil_nu(p) {
            Some(v) => Ok(v),
            None => self.window_nu(p),
        }
    }

    /// Window entries as `(a, b, block)` triplets.
    pub fn triplets(&self) -> Vec<(usize, usize, Vec<C64>)> {
        self.operator.entries().map(|(a, b, v)| (a, b, v.to_vec())).collect()
    }
}

fn dense_window(a: &BandOperator, ids: &[PointId]) -> Vec<C64> {
    let k = a.block_dim();
    let n = ids.len();
    let kk = k * k;
    let mut m = vec![C64::new(0.0, 0.0); n * n * kk];
    for (i, &x) in ids.iter().enumerate() {
        for (j, &y) in ids.iter().enumerate() {
            if let Some(v) = a.entry(x, y) {
                m[(i * n + j) * kk..(i * n + j + 1) * kk].copy_from_slice(v);
            }
        }
    }
    m
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Average the last `tail` windows, certify the Cauchy tail and package the
/// result. `windows[i]` lists the window's points in template order.
#[allow(clippy::too_many_arguments)]
fn assemble(
    a: &BandOperator,
    dir: &Direction,
    method: Extraction,
    template: Template,
    radius: Dist,
    first_n: usize,
    basepoints: &[PointId],
    windows: &[Vec<PointId>],
    tol: f64,
    tail: usize,
) -> Result<LimitWindow> {
    let mats: Vec<Vec<C64>> = windows.par_iter().map(|ids| dense_window(a, ids)).collect();
    let tail_mats = &mats[mats.len() - tail..];
    let mut cauchy = 0.0f64;
    for i in 0..tail_mats.len() {
        for j in i + 1..tail_mats.len() {
            cauchy = cauchy.max(max_diff(&tail_mats[i], &tail_mats[j]));
        }
    }
    // Averaged as offsets from the last window, so identical windows
    // reproduce exactly.
    let last = &tail_mats[tail - 1];
    let mut avg = last.clone();
    for (i, s) in avg.iter_mut().enumerate() {
        let d: C64 = tail_mats.iter().map(|m| m[i] - last[i]).sum();
        *s += d / tail as f64;
    }
    let deviations: Vec<DeviationPoint> = mats
        .iter()
        .enumerate()
        .map(|(i, m)| DeviationPoint { n: first_n + i, basepoint: basepoints[i], deviation: max_diff(m, &avg) })
        .collect();
    if cauchy > tol {
        return Err(Error::CauchyFailure { deviation: cauchy, tol, profile: deviations.iter().map(|d| d.deviation).collect() });
    }
    let k = a.block_dim();
    let kk = k * k;
    let n = template.len();
    let wspace = Arc::new(Space::from_template(format!("{}@{}", a.space().name(), dir.label), &template));
    let mut trip = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let blk = &avg[(i * n + j) * kk..(i * n + j + 1) * kk];
            if blk.iter().any(|z| *z != C64::new(0.0, 0.0)) {
                trip.push((i, j, blk.to_vec()));
            }
        }
    }
    let operator = BandOperator::from_blocks(wspace, k, trip)?;
    let norm = norm2(&operator)?;
    let tail_pts = &basepoints[basepoints.len() - tail..];
    let bd: Option<Vec<Dist>> = tail_pts.iter().map(|&x| a.space().boundary_distance(x)).collect();
    let escapes_boundary = bd.is_some_and(|d| {
        d.iter().all(|&v| v == Dist::MAX) || (d.windows(2).all(|w| w[1] > w[0]) && *d.last().unwrap() > radius)
    });
    Ok(LimitWindow {
        label: dir.label.clone(),
        method,
        radius,
        template,
        operator,
        cauchy_tail: cauchy,
        tol,
        stabilized_from: first_n,
        tail: basepoints[basepoints.len() - tail..].to_vec(),
        deviations,
        norm,
        source_bound: schur_bound(a, 2.0)?,
        source_propagation: a.propagation(),
        escapes_boundary,
    })
}

/// Limit operator along `dir` on the ball of radius `R`, from windows
/// matched at radius `R + prop(A)` and averaged over the last `tail`.
pub fn limit_operator(a: &BandOperator, dir: &Direction, radius: Dist, tol: f64, tail: usize) -> Result<LimitWindow> {
    let tail = tail.max(1);
    let big = radius + a.propagation();
    let ls = match limit_space(a.space(), dir, big, tail)? {
        LimitSpaceOutcome::Stabilized(ls) => ls,
        LimitSpaceOutcome::Diverged(d) => {
            let classes = d.class_sizes.len();
            return Err(Error::NotStabilized { classes, window: tail });
        }
    };
    let keep = ls.template.prefix_len(radius);
    let idx: Vec<usize> = (0..keep).collect();
    let template = ls.template.restrict(&idx);
    let windows: Vec<Vec<PointId>> = ls.matchings.iter().map(|m| m.target[..keep].to_vec()).collect();
    assemble(a, dir, Extraction::WindowMatch, template, radius, ls.stabilized_from, &ls.basepoints[ls.stabilized_from..], &windows, tol, tail)
}

/// Limit operator on a group-structured window: each window is the ball at
/// the basepoint `h` read through `g ↦ h·g`, in the template order of the
/// last basepoint's ball.
pub fn shift_limit(a: &BandOperator, dir: &Direction, radius: Dist, tol: f64, tail: usize) -> Result<LimitWindow> {
    let space = a.space();
    let rank = space.group_rank().ok_or(Error::NotGroup)?;
    let tail = tail.max(1);
    let basepoints = dir.basepoints(space, radius)?;
    if basepoints.len() < tail {
        return Err(Error::BadDirection(format!("`{}` has {} basepoints, need {tail}", dir.label, basepoints.len())));
    }
    let last = *basepoints.last().unwrap();
    let (template, ids) = Template::from_ball(space, last, radius);
    let offsets = group_offsets(space, last, &ids, radius, rank)?;
    let windows: Vec<Vec<PointId>> = basepoints
        .iter()
        .map(|&h| {
            offsets
                .iter()
                .map(|g| space.translate(h, g).ok_or(Error::MarginViolation { point: h, margin: space.margin(h), required: radius }))
                .collect()
        })
        .collect::<Result<_>>()?;
    assemble(a, dir, Extraction::Shift, template, radius, 0, &basepoints, &windows, tol, tail)
}

/// Group elements `g` with `h·g` running over `ids`, by search in the box
/// `[-R, R]^rank` (translations move points by at least their offset in
/// each coordinate for the supported groups).
fn group_offsets(space: &Space, h: PointId, ids: &[PointId], radius: Dist, rank: usize) -> Result<Vec<Vec<i64>>> {
    if let (Some(c0), true) = (space.coords(h), space.box_bounds().is_some()) {
        return Ok(ids.iter().map(|&y| space.coords(y).unwrap().iter().zip(&c0).map(|(a, b)| a - b).collect()).collect());
    }
    let r = radius as i64;
    let side = (2 * r + 1) as usize;
    let mut found: Vec<Option<Vec<i64>>> = vec![None; ids.len()];
    let total = side.checked_pow(rank as u32).filter(|&t| t <= 1 << 24).ok_or(Error::NotGroup)?;
    for mut i in 0..total {
        let g: Vec<i64> = (0..rank)
            .map(|_| {
                let c = (i % side) as i64 - r;
                i /= side;
                c
            })
            .collect();
        if let Some(y) = space.translate(h, &g) {
            if let Some(pos) = ids.iter().position(|&z| z == y) {
                let better = match &found[pos] {
                    None => true,
                    Some(old) => g.iter().map(|v| v.abs()).sum::<i64>() < old.iter().map(|v| v.abs()).sum::<i64>(),
                };
                if better {
                    found[pos] = Some(g);
                }
            }
        }
    }
    found.into_iter().map(|g| g.ok_or(Error::NotGroup)).collect()
}

/// Largest absolute entry difference between two windows on the same
/// template.
pub fn window_distance(a: &LimitWindow, b: &LimitWindow) -> Result<f64> {
    if a.template.len() != b.template.len() || a.operator.block_dim() != b.operator.block_dim() {
        return Err(Error::SpaceMismatch);
    }
    let ids: Vec<usize> = (0..a.template.len()).collect();
    Ok(max_diff(&dense_window(&a.operator, &ids), &dense_window(&b.operator, &ids)))
}

pub(crate) fn entry_norm(block: &[C64], k: usize) -> f64 {
    linalg::block_norm2(block, k)
}
