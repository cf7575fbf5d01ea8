//! Metric sparsification: capture a fraction `c` of a measure inside pieces
//! of bounded diameter that are pairwise at distance `>= m`.
//!
//! On spaces with lattice coordinates the pieces are blocks of `L` points per
//! axis separated by gaps of `m` points, shifted by the best of the
//! `(L + m)^N` offsets. Averaging over offsets captures exactly
//! `(L/(L + m))^N` of any measure, so some offset does at least that well.
//! Elsewhere a greedy, mass-ordered ball packing is used, without a
//! guaranteed fraction.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{Dist, Norm, PointId, Space};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sparsification {
    pub parts: Vec<Vec<PointId>>,
    pub separation: Dist,
    pub diameter_bound: Dist,
    pub mass_fraction: f64,
    #[serde(skip)]
    pub measure: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_len: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<i64>>,
}

impl Sparsification {
    /// Recheck separation, diameters and captured mass from scratch.
    pub fn verify(&self, space: &Space, target_c: f64) -> bool {
        let mut owner = vec![usize::MAX; space.len()];
        for (i, part) in self.parts.iter().enumerate() {
            for &x in part {
                if owner[x] != usize::MAX {
                    return false;
                }
                owner[x] = i;
            }
            if space.set_diameter(part) > self.diameter_bound {
                return false;
            }
        }
        for (i, a) in self.parts.iter().enumerate() {
            for b in &self.parts[i + 1..] {
                if space.set_distance(a, b) < self.separation {
                    return false;
                }
            }
        }
        let total: f64 = self.measure.iter().sum();
        let kept: f64 = self.parts.iter().flatten().map(|&x| self.measure[x]).sum();
        kept >= target_c * total * (1.0 - 1e-12)
    }
}

pub trait Sparsifier: Sync {
    /// Diameter bound `f_c(m)` for which every measure admits an
    /// `m`-separated sparsification capturing at least `c`, if known.
    fn constants(&self, space: &Space, c: f64, m: Dist) -> Option<Dist>;

    fn sparsify(&self, space: &Space, measure: &[f64], m: Dist, target_c: f64) -> Result<Sparsification>;
}

/// Offset block construction on spaces with coordinates. `block_len: None`
/// uses `L = 3m`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BlockSparsifier {
    pub block_len: Option<u32>,
}

/// Greedy packing of balls of radius `radius` (default `m`) in decreasing
/// mass order.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedySparsifier {
    pub radius: Option<Dist>,
}

fn block_diameter(space: &Space, l: u32) -> Dist {
    let dim = space.dim().max(1);
    space.norm().unwrap_or(Norm::L1).length(&vec![l as i64 - 1; dim])
}

/// Smallest `L` with `(L / (L + m))^N >= c`.
pub fn block_len_for(c: f64, m: Dist, dim: usize) -> u32 {
    let per_axis = c.powf(1.0 / dim.max(1) as f64);
    if per_axis >= 1.0 {
        return u32::MAX;
    }
    let mut l = ((m as f64) * per_axis / (1.0 - per_axis)).ceil().max(1.0) as u32;
    while l > 1 && ((l - 1) as f64 / (l - 1 + m) as f64) >= per_axis {
        l -= 1;
    }
    while (l as f64 / (l + m) as f64) < per_axis {
        l += 1;
    }
    l
}

fn check_measure(space: &Space, measure: &[f64]) -> Result<f64> {
    if measure.len() != space.len() || measure.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::BadMeasure);
    }
    let total: f64 = measure.iter().sum();
    if total <= 0.0 {
        return Err(Error::BadMeasure);
    }
    Ok(total)
}

impl Sparsifier for BlockSparsifier {
    fn constants(&self, space: &Space, c: f64, m: Dist) -> Option<Dist> {
        if !space.is_lattice_like() || !(c > 0.0 && c < 1.0) {
            return None;
        }
        let l = block_len_for(c, m, space.dim());
        (l != u32::MAX).then(|| block_diameter(space, l))
    }

    fn sparsify(&self, space: &Space, measure: &[f64], m: Dist, target_c: f64) -> Result<Sparsification> {
        let total = check_measure(space, measure)?;
        if !space.is_lattice_like() {
            return GreedySparsifier::default().sparsify(space, measure, m, target_c);
        }
        let l = self.block_len.unwrap_or(3 * m.max(1));
        let dim = space.dim();
        let coords: Vec<Vec<i64>> = (0..space.len()).map(|x| space.coords(x).expect("lattice-like")).collect();
        let lo: Vec<i64> = (0..dim).map(|k| coords.iter().map(|c| c[k]).min().unwrap_or(0)).collect();
        let period = (l + m) as i64;
        let offsets = (period as usize).pow(dim as u32);
        let offset_vec = |mut i: usize| -> Vec<i64> {
            let mut o = vec![0i64; dim];
            for k in (0..dim).rev() {
                o[k] = (i % period as usize) as i64;
                i /= period as usize;
            }
            o
        };
        let kept = |o: &[i64], c: &[i64]| (0..dim).all(|k| (c[k] - lo[k] - o[k]).rem_euclid(period) < l as i64);
        let masses: Vec<f64> = (0..offsets)
            .into_par_iter()
            .map(|i| {
                let o = offset_vec(i);
                coords.iter().zip(measure).filter(|(c, _)| kept(&o, c)).map(|(_, w)| w).sum()
            })
            .collect();
        let mut best = 0;
        for i in 1..offsets {
            if masses[i] > masses[best] {
                best = i;
            }
        }
        let o = offset_vec(best);
        let mut parts: std::collections::BTreeMap<Vec<i64>, Vec<PointId>> = Default::default();
        for (x, c) in coords.iter().enumerate() {
            if measure[x] > 0.0 && kept(&o, c) {
                let key: Vec<i64> = (0..dim).map(|k| (c[k] - lo[k] - o[k]).div_euclid(period)).collect();
                parts.entry(key).or_default().push(x);
            }
        }
        let fraction = masses[best] / total;
        if fraction < target_c {
            return Err(Error::Shortfall { best_c: fraction, target_c, block_len: l, m });
        }
        Ok(Sparsification {
            parts: parts.into_values().collect(),
            separation: m,
            diameter_bound: block_diameter(space, l),
            mass_fraction: fraction,
            measure: measure.to_vec(),
            block_len: Some(l),
            offset: Some(o),
        })
    }
}

impl Sparsifier for GreedySparsifier {
    fn constants(&self, _: &Space, _: f64, _: Dist) -> Option<Dist> {
        None
    }

    fn sparsify(&self, space: &Space, measure: &[f64], m: Dist, target_c: f64) -> Result<Sparsification> {
        let total = check_measure(space, measure)?;
        let radius = self.radius.unwrap_or(m);
        let mut order: Vec<PointId> = (0..space.len()).filter(|&x| measure[x] > 0.0).collect();
        order.sort_by(|&a, &b| measure[b].total_cmp(&measure[a]).then(a.cmp(&b)));
        let mut available = vec![true; space.len()];
        let mut parts = Vec::new();
        let mut kept = 0.0;
        for &x in &order {
            if !available[x] {
                continue;
            }
            let part: Vec<PointId> =
                space.ball_unchecked(x, radius).into_iter().filter(|&y| available[y] && measure[y] > 0.0).collect();
            kept += part.iter().map(|&y| measure[y]).sum::<f64>();
            for y in space.neighborhood(&part, m.saturating_sub(1)) {
                available[y] = false;
            }
            parts.push(part);
        }
        let fraction = kept / total;
        if fraction < target_c {
            return Err(Error::Shortfall { best_c: fraction, target_c, block_len: 2 * radius, m });
        }
        Ok(Sparsification {
            parts,
            separation: m,
            diameter_bound: 2 * radius,
            mass_fraction: fraction,
            measure: measure.to_vec(),
            block_len: None,
            offset: None,
        })
    }
}

/// Block construction where coordinates exist, greedy packing otherwise.
pub fn sparsify(space: &Space, measure: &[f64], m: Dist, target_c: f64) -> Result<Sparsification> {
    if space.is_lattice_like() {
        BlockSparsifier::default().sparsify(space, measure, m, target_c)
    } else {
        GreedySparsifier::default().sparsify(space, measure, m, target_c)
    }
}
