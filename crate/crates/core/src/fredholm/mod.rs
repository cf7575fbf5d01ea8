//! Parametrices from local inverses, and a combined Fredholmness probe.
//!
//! Local left inverses `B_i` of `A` on the supports `V_i` of a partition of
//! unity are glued to `B' = Σ φ_i^{p/q} B_i φ_i`. Then `B'A = 1 + T` with
//! `T = Σ φ_i^{p/q} B_i [φ_i, A]`, and `B = (1 + T)⁻¹ B'` is a left inverse
//! of `A` away from the indices where no local inverse was found.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::limit::{sample_spectrum, Direction, SpectrumSample, WindowNu};
use crate::linalg;
use crate::lower_norm::{essential_nu, interior_columns};
use crate::operator::{schur_bound, BandOperator};
use crate::partition::{local_norm, make_partition, weighted_sum, PPartition, SumMode};
use crate::space::{Dist, PointId};
use crate::C64;

/// Largest accepted `‖B_i A P_{V_i} − P_{V_i}‖`.
pub const LOCAL_RESIDUAL: f64 = 1e-8;
/// Neumann terms are added until their norm drops below this.
pub const NEUMANN_CUTOFF: f64 = 1e-12;
const MAX_NEUMANN_TERMS: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalFailure {
    pub index: usize,
    pub center: PointId,
    pub residual: f64,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct LocalInverses {
    /// `None` where the index failed.
    pub inverses: Vec<Option<BandOperator>>,
    pub failures: Vec<LocalFailure>,
}

/// Least-squares left inverse of `A P_{V_i}` for every partition index,
/// accepted when the residual is at most `1e-8` and `‖B_i‖ <= M`.
pub fn local_inverses(a: &BandOperator, part: &PPartition, bound_m: f64) -> Result<LocalInverses> {
    if part.at_point.len() != a.len() {
        return Err(Error::SpaceMismatch);
    }
    let k = a.block_dim();
    let p = part.p;
    let results: Vec<Result<std::result::Result<BandOperator, LocalFailure>>> = part
        .functions
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let cols: Vec<PointId> = f.iter().map(|e| e.0).collect();
            let (rows, c) = a.column_matrix(&cols);
            let b = linalg::pinv(&c, 1e-14);
            let mut r = &b * &c;
            for d in 0..r.nrows() {
                r[(d, d)] -= C64::new(1.0, 0.0);
            }
            let residual = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let mut trip = Vec::new();
            for (ia, &x) in cols.iter().enumerate() {
                for (ib, &y) in rows.iter().enumerate() {
                    let blk: Vec<C64> = (0..k * k).map(|e| b[(ia * k + e / k, ib * k + e % k)]).collect();
                    if blk.iter().any(|z| *z != C64::new(0.0, 0.0)) {
                        trip.push((x, y, blk));
                    }
                }
            }
            let op = BandOperator::from_blocks(a.space().clone(), k, trip)?;
            let norm = local_norm(&op, p)?;
            if residual <= LOCAL_RESIDUAL && norm <= bound_m * (1.0 + 1e-9) {
                Ok(Ok(op))
            } else {
                Ok(Err(LocalFailure { index: i, center: part.centers[i], residual, norm }))
            }
        })
        .collect();
    let mut inverses = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r? {
            Ok(b) => inverses.push(Some(b)),
            Err(f) => {
                inverses.push(None);
                failures.push(f);
            }
        }
    }
    Ok(LocalInverses { inverses, failures })
}

/// `Σ_{j=0}^{K} (−T)^j b`, stopping once a term's norm bound is at most
/// `cutoff`. Returns the sum, the number of terms and the bound
/// `‖T‖^{K+1} ‖b‖ / (1 − ‖T‖)` on the distance to `(1 + T)⁻¹ b`.
pub fn neumann_apply(t: &BandOperator, b: &BandOperator, p: f64, cutoff: f64) -> Result<(BandOperator, usize, f64)> {
    let t_norm = local_norm(t, p)?;
    if t_norm >= 1.0 {
        return Err(Error::CommutatorTooLarge(t_norm));
    }
    let minus_t = t.scale(C64::new(-1.0, 0.0));
    let b_norm = local_norm(b, p)?;
    let mut sum = b.clone();
    let mut term = b.clone();
    let mut terms = 1;
    while schur_bound(&term, p)? > cutoff {
        if terms >= MAX_NEUMANN_TERMS {
            return Err(Error::NonConvergence { iterations: terms, last_change: schur_bound(&term, p)? });
        }
        term = minus_t.compose(&term)?;
        sum = sum.add(&term)?;
        terms += 1;
    }
    let bound = t_norm.powi(terms as i32) * b_norm / (1.0 - t_norm);
    Ok((sum, terms, bound))
}

#[derive(Clone, Debug, Serialize)]
pub struct ParametrixReport {
    pub scale: u32,
    pub bound_m: f64,
    pub variation: f64,
    /// `ε N ‖A‖ M`, the sufficient condition `<= 1/2` for `‖T‖ <= 1/2`.
    pub a_priori: f64,
    pub a_priori_ok: bool,
    pub failures: Vec<LocalFailure>,
    pub failure_radius: Dist,
    pub commutator_norm: f64,
    pub neumann_terms: usize,
    pub neumann_error: f64,
    pub norm: f64,
    pub norm_ok: bool,
    pub residual_radius: Dist,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct Parametrix {
    pub operator: BandOperator,
    pub report: ParametrixReport,
}

/// Norm of `(BA − 1)` on vectors supported off `B(centre; radius)`.
pub fn restricted_residual(b: &BandOperator, a: &BandOperator, radius: Dist, p: f64) -> Result<f64> {
    let space = a.space();
    let c = space.center();
    let cols: Vec<PointId> = (0..a.len()).filter(|&x| space.dist(c, x) > radius).collect();
    if cols.is_empty() {
        return Ok(0.0);
    }
    let r = b.compose(a)?.shift_by(C64::new(-1.0, 0.0));
    local_norm(&r.restrict_columns(&cols), p)
}

/// Assemble `B = (1 + T)⁻¹ Σ φ_i^{p/q} B_i φ_i`. The residual is measured
/// off the larger of `residual_radius` and the ball covering all failed
/// supports.
pub fn parametrix(a: &BandOperator, part: &PPartition, bound_m: f64, residual_radius: Dist) -> Result<Parametrix> {
    let p = part.p;
    let prop = a.propagation();
    let space = a.space();
    let variation = part.variation(prop).ok_or(Error::NetFailure(part.scale))?;
    let a_priori = variation * space.growth(prop) as f64 * schur_bound(a, p)? * bound_m;
    let locals = local_inverses(a, part, bound_m)?;
    let interior: Vec<usize> =
        (0..part.len()).filter(|&i| space.margin(part.centers[i]) >= prop).collect();
    let failed_interior = interior.iter().filter(|&&i| locals.inverses[i].is_none()).count();
    if failed_interior == interior.len() {
        return Err(Error::FailuresCoverInterior { failed: locals.failures.len(), total: part.len() });
    }
    let c = space.center();
    let failure_radius = locals
        .failures
        .iter()
        .flat_map(|f| part.functions[f.index].iter().map(|e| space.dist(c, e.0)))
        .max()
        .unwrap_or(0);
    let t = weighted_sum(part, &locals.inverses, SumMode::Commutator, Some(a), bound_m)?;
    let commutator_norm = local_norm(&t.operator, p)?;
    if commutator_norm >= 0.5 {
        return Err(Error::CommutatorTooLarge(commutator_norm));
    }
    let plain = weighted_sum(part, &locals.inverses, SumMode::Plain, None, bound_m)?;
    let (b, neumann_terms, neumann_error) = neumann_apply(&t.operator, &plain.operator, p, NEUMANN_CUTOFF)?;
    let norm = local_norm(&b, p)?;
    let residual_radius = residual_radius.max(failure_radius);
    let residual = restricted_residual(&b, a, residual_radius, p)?;
    let report = ParametrixReport {
        scale: part.scale,
        bound_m,
        variation,
        a_priori,
        a_priori_ok: a_priori <= 0.5,
        failures: locals.failures,
        failure_radius,
        commutator_norm,
        neumann_terms,
        neumann_error,
        norm,
        norm_ok: norm <= 2.0 * bound_m + 1e-8,
        residual_radius,
        residual,
    };
    Ok(Parametrix { operator: b, report })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeConfig {
    pub p: f64,
    pub radius: Dist,
    pub tol: f64,
    pub tail: usize,
    pub scale: u32,
    /// Interior `ν` at or below this counts as zero.
    pub zero_threshold: f64,
    /// Largest accepted restricted parametrix residual.
    pub residual_threshold: f64,
    /// Smallest `min ν` accepted for a positive verdict.
    pub nu_margin: f64,
    /// `M = m_factor / min ν`.
    pub m_factor: f64,
    pub residual_radius: Option<Dist>,
    pub essential_radii: Option<Vec<Dist>>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            radius: 5,
            tol: 1e-9,
            tail: crate::limit::DEFAULT_TAIL,
            scale: 10,
            zero_threshold: 1e-6,
            residual_threshold: 1e-3,
            nu_margin: 1e-6,
            m_factor: 1.2,
            residual_radius: None,
            essential_radii: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    FredholmConsistent,
    NotFredholm,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::FredholmConsistent => "fredholm-consistent",
            Verdict::NotFredholm => "not-fredholm",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub kind: &'static str,
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FredholmVerdict {
    pub verdict: Verdict,
    pub limit_min_nu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_max_inv_norm: Option<f64>,
    pub windows: Vec<WindowNu>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub essential_profile: Vec<(Dist, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parametrix: Option<ParametrixReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parametrix_error: Option<String>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub spectrum: Option<SpectrumSample>,
    #[serde(skip)]
    pub parametrix_operator: Option<BandOperator>,
}

/// Sample limit operators, the essential lower-norm profile and a
/// parametrix, and combine them into a verdict.
pub fn probe(a: &BandOperator, dirs: &[Direction], cfg: &ProbeConfig) -> Result<FredholmVerdict> {
    let spectrum = sample_spectrum(a, dirs, cfg.radius, cfg.tol, cfg.tail, cfg.p)?;
    let mut notes = vec![format!("operator spectrum {} over {} directions", SpectrumSample::NOTE, dirs.len())];
    let space = a.space();
    let radii = match &cfg.essential_radii {
        Some(r) => r.clone(),
        None => {
            let interior = interior_columns(a);
            let c = space.center();
            let reach = interior.iter().map(|&x| space.dist(c, x)).max().unwrap_or(0);
            vec![reach / 8, reach / 4, reach / 2]
        }
    };
    let essential_profile: Vec<(Dist, f64)> =
        essential_nu(a, &radii, cfg.p)?.into_iter().map(|(r, rep)| (r, rep.value)).collect();
    let limit_min_nu = spectrum.min_nu;
    let limit_max_inv_norm = (limit_min_nu > 0.0).then(|| 1.0 / limit_min_nu);
    let mut witness = None;
    if limit_min_nu <= cfg.zero_threshold {
        witness = Some(Witness { kind: "limit-nu", label: spectrum.nus[spectrum.argmin].label.clone(), value: limit_min_nu });
    } else if let Some(&(r, v)) = essential_profile.last() {
        if v <= cfg.zero_threshold {
            witness = Some(Witness { kind: "essential-nu", label: format!("radius {r}"), value: v });
        }
    }
    let (mut parametrix_report, mut parametrix_error, mut parametrix_operator) = (None, None, None);
    if limit_min_nu > 0.0 {
        let m = cfg.m_factor / limit_min_nu;
        let residual_radius = cfg.residual_radius.unwrap_or(3 * cfg.scale);
        match make_partition(space, cfg.scale, cfg.p).and_then(|part| parametrix(a, &part, m, residual_radius)) {
            Ok(par) => {
                parametrix_report = Some(par.report);
                parametrix_operator = Some(par.operator);
            }
            Err(e) => parametrix_error = Some(e.to_string()),
        }
    } else {
        notes.push("parametrix skipped: a sampled limit window has zero lower norm".into());
    }
    let parametrix_passes = parametrix_report
        .as_ref()
        .is_some_and(|r| r.norm_ok && r.residual <= cfg.residual_threshold);
    let verdict = if witness.is_some() {
        Verdict::NotFredholm
    } else if parametrix_passes && limit_min_nu >= cfg.nu_margin {
        Verdict::FredholmConsistent
    } else {
        Verdict::Inconclusive
    };
    if witness.is_some() && parametrix_passes {
        notes.push("parametrix passed despite a zero-ν witness; sampling is too coarse to be trusted".into());
    }
    Ok(FredholmVerdict {
        verdict,
        limit_min_nu,
        limit_max_inv_norm,
        windows: spectrum.nus.clone(),
        witness,
        essential_profile,
        parametrix: parametrix_report,
        parametrix_error,
        notes,
        spectrum: Some(spectrum),
        parametrix_operator,
    })
}
