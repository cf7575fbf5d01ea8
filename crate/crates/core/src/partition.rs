//! Metric `p`-partitions of unity and the operator sums built from them.
//!
//! Functions are piecewise-linear bumps `ψ_i = max(0, 1 − d(·, c_i)/(2L))`
//! around the points of an `L`-net, normalised so that `Σ_i φ_iᵖ = 1`. The
//! `(r, ε)`-variation is measured exactly rather than estimated.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{check_exponent, norm2, schur_bound, BandOperator};
use crate::space::{Dist, PointId, Space};
use crate::C64;

#[derive(Clone, Debug, Serialize)]
pub struct PPartition {
    pub centers: Vec<PointId>,
    pub scale: u32,
    pub p: f64,
    pub multiplicity: usize,
    pub support_diameter: Dist,
    /// `(r, ε(r))` for `r = 0..=3L`: the largest
    /// `(Σ_i |φ_i(x) − φ_i(y)|ᵖ)^{1/p}` over pairs with `d(x, y) <= r`.
    pub variation_table: Vec<(Dist, f64)>,
    /// Per function, `(x, φ_i(x))` over its support in id order.
    #[serde(skip)]
    pub functions: Vec<Vec<(PointId, f64)>>,
    /// Per point, `(i, φ_i(x))` over the functions not vanishing there.
    #[serde(skip)]
    pub at_point: Vec<Vec<(usize, f64)>>,
}

fn net(space: &Space, l: u32) -> Vec<PointId> {
    let mut centers = Vec::new();
    let mut covered = vec![false; space.len()];
    let mark = |c: PointId, covered: &mut Vec<bool>| {
        for y in space.ball_unchecked(c, l) {
            covered[y] = true;
        }
    };
    if let Some((lo, _)) = space.box_bounds() {
        for x in 0..space.len() {
            let c = space.coords(x).expect("box windows have coordinates");
            if c.iter().zip(lo).all(|(a, b)| (a - b) % l as i64 == 0) {
                centers.push(x);
                mark(x, &mut covered);
            }
        }
    }
    for x in 0..space.len() {
        if !covered[x] {
            centers.push(x);
            mark(x, &mut covered);
        }
    }
    centers.sort_unstable();
    centers
}

impl PPartition {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn value(&self, i: usize, x: PointId) -> f64 {
        let list = &self.at_point[x];
        list.binary_search_by_key(&i, |e| e.0).map_or(0.0, |j| list[j].1)
    }

    /// Measured `ε(r)`; `None` beyond the tabulated range.
    pub fn variation(&self, r: Dist) -> Option<f64> {
        self.variation_table.get(r as usize).map(|e| e.1)
    }

    /// `Σ_i φ_i(x)ᵖ`.
    pub fn power_sum(&self, x: PointId) -> f64 {
        self.at_point[x].iter().map(|(_, v)| v.powf(self.p)).sum()
    }

    fn pair_variation(&self, x: PointId, y: PointId) -> f64 {
        let (a, b) = (&self.at_point[x], &self.at_point[y]);
        let (mut i, mut j) = (0, 0);
        let mut s = 0.0;
        while i < a.len() || j < b.len() {
            let ka = a.get(i).map_or(usize::MAX, |e| e.0);
            let kb = b.get(j).map_or(usize::MAX, |e| e.0);
            let d = if ka == kb {
                i += 1;
                j += 1;
                a[i - 1].1 - b[j - 1].1
            } else if ka < kb {
                i += 1;
                a[i - 1].1
            } else {
                j += 1;
                b[j - 1].1
            };
            s += d.abs().powf(self.p);
        }
        s.powf(1.0 / self.p)
    }

    /// `Σ_i φ_i(x)^{p−1} φ_i(y)`, the entry weight of the averaging map.
    pub fn overlap(&self, x: PointId, y: PointId) -> f64 {
        let (a, b) = (&self.at_point[x], &self.at_point[y]);
        let mut j = 0;
        let mut s = 0.0;
        for &(i, v) in a {
            while j < b.len() && b[j].0 < i {
                j += 1;
            }
            if j < b.len() && b[j].0 == i {
                s += v.powf(self.p - 1.0) * b[j].1;
            }
        }
        s
    }
}

/// Partition at scale `L` on an `L`-net (lattice-aligned on box windows).
pub fn make_partition(space: &Space, scale: u32, p: f64) -> Result<PPartition> {
    check_exponent(p)?;
    if scale == 0 || space.is_empty() {
        return Err(Error::NetFailure(scale));
    }
    let centers = net(space, scale);
    let two_l = 2 * scale;
    let mut at_point: Vec<Vec<(usize, f64)>> = vec![Vec::new(); space.len()];
    for (i, &c) in centers.iter().enumerate() {
        for y in space.ball_unchecked(c, two_l - 1) {
            at_point[y].push((i, 1.0 - space.dist(c, y) as f64 / two_l as f64));
        }
    }
    for list in at_point.iter_mut() {
        let norm = list.iter().map(|(_, v)| v.powf(p)).sum::<f64>().powf(1.0 / p);
        list.iter_mut().for_each(|e| e.1 /= norm);
    }
    let mut functions: Vec<Vec<(PointId, f64)>> = vec![Vec::new(); centers.len()];
    for (x, list) in at_point.iter().enumerate() {
        for &(i, v) in list {
            functions[i].push((x, v));
        }
    }
    let multiplicity = at_point.iter().map(Vec::len).max().unwrap_or(0);
    let support_diameter = support_diameter(space, &centers, &functions);
    let mut part = PPartition {
        centers,
        scale,
        p,
        multiplicity,
        support_diameter,
        variation_table: Vec::new(),
        functions,
        at_point,
    };
    let rmax = 3 * scale;
    let per_point: Vec<Vec<f64>> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let mut best = vec![0.0f64; rmax as usize + 1];
            for y in space.ball_unchecked(x, rmax) {
                let d = space.dist(x, y) as usize;
                best[d] = best[d].max(part.pair_variation(x, y));
            }
            best
        })
        .collect();
    let mut table = vec![0.0f64; rmax as usize + 1];
    for row in &per_point {
        for (d, v) in row.iter().enumerate() {
            table[d] = table[d].max(*v);
        }
    }
    for d in 1..table.len() {
        table[d] = table[d].max(table[d - 1]);
    }
    part.variation_table = table.into_iter().enumerate().map(|(r, v)| (r as Dist, v)).collect();
    Ok(part)
}

/// Exact support diameters, evaluated once per distinct support shape on
/// spaces with coordinates.
fn support_diameter(space: &Space, centers: &[PointId], functions: &[Vec<(PointId, f64)>]) -> Dist {
    let mut cache: HashMap<Vec<Vec<i64>>, Dist> = HashMap::new();
    let mut best = 0;
    for (i, f) in functions.iter().enumerate() {
        let supp: Vec<PointId> = f.iter().map(|e| e.0).collect();
        let d = match space.coords(centers[i]) {
            Some(c0) => {
                let shape: Vec<Vec<i64>> = supp
                    .iter()
                    .map(|&y| space.coords(y).unwrap().iter().zip(&c0).map(|(a, b)| a - b).collect())
                    .collect();
                *cache.entry(shape).or_insert_with(|| space.set_diameter(&supp))
            }
            None => space.set_diameter(&supp),
        };
        best = best.max(d);
    }
    best
}

/// `M(A) = Σ_i φ_i^{p/q} A φ_i`, i.e. `M(A)_xy = (Σ_i φ_i(x)^{p−1} φ_i(y)) A_xy`.
pub fn average(a: &BandOperator, part: &PPartition) -> Result<BandOperator> {
    if part.at_point.len() != a.len() {
        return Err(Error::SpaceMismatch);
    }
    Ok(a.map_entries(|x, y| part.overlap(x, y)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumMode {
    Plain,
    Commutator,
}

#[derive(Clone, Debug)]
pub struct WeightedSum {
    pub operator: BandOperator,
    /// Certified norm bound: `M` (plain) or `ε N ‖A‖ M` (commutator).
    pub bound: f64,
    pub variation: f64,
}

/// Certified operator norm used to check local bounds: the Schur bound, or
/// the Krylov estimate at `p = 2` when that is sharper.
pub(crate) fn local_norm(b: &BandOperator, p: f64) -> Result<f64> {
    let s = schur_bound(b, p)?;
    if p == 2.0 {
        Ok(s.min(norm2(b)?))
    } else {
        Ok(s)
    }
}

/// `Σ_{i∈J} φ_i^{p/q} B_i φ_i` (plain) or `Σ_{i∈J} φ_i^{p/q} B_i [φ_i, A]`
/// (commutator), with `J` the indices carrying a local operator.
pub fn weighted_sum(
    part: &PPartition,
    locals: &[Option<BandOperator>],
    mode: SumMode,
    a: Option<&BandOperator>,
    bound_m: f64,
) -> Result<WeightedSum> {
    let p = part.p;
    let space: Arc<Space> = match (a, locals.iter().flatten().next()) {
        (Some(a), _) => a.space().clone(),
        (None, Some(b)) => b.space().clone(),
        (None, None) => {
            if mode == SumMode::Commutator {
                return Err(Error::MissingOperator);
            }
            return Err(Error::EmptyRestriction);
        }
    };
    let k = locals.iter().flatten().next().map_or(1, |b| b.block_dim());
    for (i, b) in locals.iter().enumerate() {
        if let Some(b) = b {
            if b.len() != part.at_point.len() {
                return Err(Error::SpaceMismatch);
            }
            let n = local_norm(b, p)?;
            if n > bound_m * (1.0 + 1e-9) {
                return Err(Error::UnboundedLocal { index: i, norm: n, bound: bound_m });
            }
        }
    }
    let kk = k * k;
    let (variation, bound) = match mode {
        SumMode::Plain => (0.0, bound_m),
        SumMode::Commutator => {
            let a = a.ok_or(Error::MissingOperator)?;
            let eps = part.variation(a.propagation()).ok_or(Error::NetFailure(part.scale))?;
            let n = a.space().growth(a.propagation()) as f64;
            (eps, eps * n * schur_bound(a, p)? * bound_m)
        }
    };
    // Per-index contributions, accumulated row by row in index order.
    let contributions: Vec<Vec<(PointId, PointId, Vec<C64>)>> = locals
        .par_iter()
        .enumerate()
        .filter_map(|(i, b)| b.as_ref().map(|b| (i, b)))
        .map(|(i, b)| {
            let mut out = Vec::new();
            for &(x, fx) in &part.functions[i] {
                let left = fx.powf(p - 1.0);
                let mut row: BTreeMap<PointId, Vec<C64>> = BTreeMap::new();
                for (z, bxz) in b.row(x) {
                    match mode {
                        SumMode::Plain => {
                            let fz = part.value(i, z);
                            if fz != 0.0 {
                                let e = row.entry(z).or_insert_with(|| vec![C64::new(0.0, 0.0); kk]);
                                e.iter_mut().zip(bxz).for_each(|(s, v)| *s += v * (left * fz));
                            }
                        }
                        SumMode::Commutator => {
                            let a = a.expect("checked above");
                            let fz = part.value(i, z);
                            for (y, azy) in a.row(z) {
                                let w = fz - part.value(i, y);
                                if w == 0.0 {
                                    continue;
                                }
                                let e = row.entry(y).or_insert_with(|| vec![C64::new(0.0, 0.0); kk]);
                                for r in 0..k {
                                    for c in 0..k {
                                        let mut s = C64::new(0.0, 0.0);
                                        for l in 0..k {
                                            s += bxz[r * k + l] * azy[l * k + c];
                                        }
                                        e[r * k + c] += s * (left * w);
                                    }
                                }
                            }
                        }
                    }
                }
                out.extend(row.into_iter().map(|(y, v)| (x, y, v)));
            }
            out
        })
        .collect();
    let mut rows: Vec<BTreeMap<PointId, Vec<C64>>> = vec![BTreeMap::new(); space.len()];
    for list in contributions {
        for (x, y, v) in list {
            let e = rows[x].entry(y).or_insert_with(|| vec![C64::new(0.0, 0.0); kk]);
            e.iter_mut().zip(&v).for_each(|(s, t)| *s += t);
        }
    }
    let rows = rows.into_iter().map(|m| m.into_iter().collect()).collect();
    Ok(WeightedSum { operator: BandOperator::from_rows(space, k, rows), bound, variation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::gen;
    use crate::space::{Descriptor, Norm};

    fn zwin(lo: i64, hi: i64) -> Arc<Space> {
        Arc::new(Space::build("z", Descriptor::Lattice { lo: vec![lo], hi: vec![hi], norm: Norm::L1 }).unwrap())
    }

    #[test]
    fn normalised_and_varies_less_at_larger_scale() {
        let s = zwin(-100, 100);
        let p10 = make_partition(&s, 10, 2.0).unwrap();
        for x in 0..s.len() {
            assert!((p10.power_sum(x) - 1.0).abs() < 1e-12);
        }
        let p5 = make_partition(&s, 5, 2.0).unwrap();
        let p20 = make_partition(&s, 20, 2.0).unwrap();
        assert!(p20.variation(1).unwrap() < p5.variation(1).unwrap());
        assert!(p10.support_diameter <= 38);
    }

    #[test]
    fn single_function_when_scale_covers_space() {
        let s = zwin(0, 5);
        let part = make_partition(&s, 50, 3.0).unwrap();
        assert_eq!(part.len(), 1);
        assert!(part.functions[0].iter().all(|(_, v)| (v - 1.0).abs() < 1e-15));
        assert_eq!(part.variation(10), Some(0.0));
        assert!(matches!(make_partition(&s, 0, 2.0), Err(Error::NetFailure(0))));
    }

    #[test]
    fn average_fixes_identity_and_diagonals() {
        let s = zwin(-30, 30);
        let part = make_partition(&s, 4, 1.5).unwrap();
        let id = BandOperator::identity(s.clone(), 1);
        assert!(average(&id, &part).unwrap().max_entry_diff(&id).unwrap() < 1e-12);
        let d = BandOperator::diagonal(s.clone(), |x| C64::new(x as f64, 1.0));
        assert!(average(&d, &part).unwrap().max_entry_diff(&d).unwrap() < 1e-12);
    }

    #[test]
    fn weighted_sums() {
        let s = zwin(-40, 40);
        let part = make_partition(&s, 6, 2.0).unwrap();
        let id = BandOperator::identity(s.clone(), 1);
        let locals: Vec<Option<BandOperator>> = vec![Some(id.clone()); part.len()];
        let plain = weighted_sum(&part, &locals, SumMode::Plain, None, 1.0).unwrap();
        assert!(plain.operator.max_entry_diff(&id).unwrap() < 1e-12);
        let d = BandOperator::diagonal(s.clone(), |x| C64::new(x as f64 * 0.01, 0.0));
        let com = weighted_sum(&part, &locals, SumMode::Commutator, Some(&d), 1.0).unwrap();
        assert!(com.operator.is_zero());
        let t = gen::tridiagonal(s.clone(), C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let com = weighted_sum(&part, &locals, SumMode::Commutator, Some(&t), 1.0).unwrap();
        assert!(norm2(&com.operator).unwrap() <= com.bound);
        assert!(matches!(weighted_sum(&part, &locals, SumMode::Commutator, None, 1.0), Err(Error::MissingOperator)));
        let big: Vec<Option<BandOperator>> = vec![Some(id.scale(C64::new(3.0, 0.0))); part.len()];
        assert!(matches!(weighted_sum(&part, &big, SumMode::Plain, None, 1.0), Err(Error::UnboundedLocal { .. })));
    }
}
