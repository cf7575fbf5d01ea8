//! Nested witnesses with shrinking supports.
//!
//! Stage 0 finds the best ball of radius `s_n` among the columns; stage
//! `k + 1` searches inside the previous stage's ball `B(α_k; s_{n-k})` for the
//! best ball of radius `s_{n-k-1}`. Each stage value must stay within
//! `ν(A) + δ_n + ... + δ_{n-k}`.

use serde::Serialize;

use super::{nu, nu_s};
use crate::error::{Error, Result};
use crate::operator::BandOperator;
use crate::space::{Dist, PointId};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CascadeStage {
    pub center: PointId,
    pub radius: Dist,
    pub value: f64,
    /// Cumulative `δ` allowance for this stage.
    pub budget: f64,
    pub within_budget: bool,
}

/// `delta` defaults to `δ_k = 2^{-k}` when `None`. Returns `ν(A|_cols)` and
/// the stages.
pub fn witness_cascade(
    a: &BandOperator,
    cols: &[PointId],
    delta: Option<&[f64]>,
    s: &[Dist],
    p: f64,
) -> Result<(f64, Vec<CascadeStage>)> {
    if s.is_empty() {
        return Err(Error::Schedule("empty support schedule".into()));
    }
    for w in s.windows(2) {
        if w[1] <= 2 * w[0] {
            return Err(Error::Schedule(format!("need s[k+1] > 2 s[k], got {} after {}", w[1], w[0])));
        }
    }
    let default: Vec<f64> = (0..s.len()).map(|k| (-(k as f64)).exp2()).collect();
    let delta = delta.unwrap_or(&default);
    if delta.len() != s.len() || delta.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Schedule("delta schedule must be positive and match the support schedule".into()));
    }
    let base = nu(a, cols, p)?.value;
    let n = s.len() - 1;
    let mut stages = Vec::with_capacity(s.len());
    let mut region: Vec<PointId> = cols.to_vec();
    region.sort_unstable();
    region.dedup();
    let mut budget = 0.0;
    for k in 0..=n {
        let radius = s[n - k];
        budget += delta[n - k];
        let r = nu_s(a, &region, radius, p)?;
        let center = r.center.expect("localised reports carry a centre");
        stages.push(CascadeStage { center, radius, value: r.value, budget, within_budget: r.value <= base + budget + 1e-10 });
        let ball = a.space().ball_unchecked(center, radius);
        region = ball.into_iter().filter(|y| region.binary_search(y).is_ok()).collect();
    }
    Ok((base, stages))
}
