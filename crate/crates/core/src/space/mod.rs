//! Strongly discrete, bounded-geometry metric spaces.
//!
//! A [`Space`] is a finite window onto such a space. Points carry dense ids
//! `0..n` and every deterministic choice in the crate breaks ties by id.
//! Distances are non-negative integers: real-valued inputs are rounded up on
//! ingestion, which keeps the value set discrete and preserves the triangle
//! inequality.
//!
//! Two backends exist. Box windows of `ℤᴺ` (and the `ℕ`/quadrant windows cut
//! out of them) compute distances from coordinates and never materialise a
//! distance matrix, so very long windows stay cheap. Everything else stores a
//! dense integer matrix.

mod io;
mod isometry;
mod translation;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::SpaceFile;
pub use isometry::{match_bijective, match_windows, SubsetIsometry, Template};
pub use translation::PartialTranslation;

pub type PointId = usize;
pub type Dist = u32;

/// Norm used to restrict the Euclidean metric to a lattice window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    /// Length of an integer vector, rounded up to an integer.
    pub fn length(self, v: &[i64]) -> Dist {
        let d = match self {
            Norm::L1 => v.iter().map(|c| c.unsigned_abs()).sum::<u64>(),
            Norm::Linf => v.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0),
            Norm::L2 => ceil_sqrt(v.iter().map(|&c| (c as i128 * c as i128) as u128).sum()),
        };
        Dist::try_from(d).unwrap_or(Dist::MAX)
    }

    fn within(self, partial: u128, r: Dist) -> bool {
        match self {
            Norm::L2 => partial <= (r as u128) * (r as u128),
            _ => partial <= r as u128,
        }
    }

    fn accumulate(self, partial: u128, step: u64) -> u128 {
        match self {
            Norm::L1 => partial + step as u128,
            Norm::L2 => partial + (step as u128) * (step as u128),
            Norm::Linf => partial.max(step as u128),
        }
    }
}

fn ceil_sqrt(n: u128) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    if r * r == n {
        r as u64
    } else {
        r as u64 + 1
    }
}

/// How a space was generated. Serialised into space files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "kebab-case")]
pub enum Descriptor {
    /// Box window `[lo, hi]` of the group `ℤᴺ`; every face is a truncation.
    Lattice { lo: Vec<i64>, hi: Vec<i64>, norm: Norm },
    /// `{0, ..., max}` inside `ℕ`; only the upper end is a truncation.
    NatWindow { max: i64 },
    /// `{0, ..., max}²` inside `ℕ²`; the upper faces are truncations.
    Quadrant { max: i64, norm: Norm },
    /// Disjoint union of finite tori `ℤ/m₁ × ... × ℤ/m_k` with the word
    /// metric of the standard generators, components at mutual distance
    /// `separation`.
    BoxSpace { components: Vec<Vec<i64>>, separation: Dist },
    /// Explicit symmetric distance matrix.
    Explicit { distances: Vec<Vec<f64>> },
    /// Shortest-path metric of a weighted undirected graph.
    Graph { n: usize, edges: Vec<(usize, usize, f64)> },
}

#[derive(Clone, Debug)]
struct Grid {
    lo: Vec<i64>,
    hi: Vec<i64>,
    strides: Vec<usize>,
    norm: Norm,
    trunc_lo: Vec<bool>,
    trunc_hi: Vec<bool>,
}

impl Grid {
    fn new(lo: Vec<i64>, hi: Vec<i64>, norm: Norm, trunc_lo: Vec<bool>, trunc_hi: Vec<bool>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidDescriptor("lattice bounds must be non-empty and of equal length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidDescriptor("lattice lower bound exceeds upper bound".into()));
        }
        let mut strides = vec![1usize; lo.len()];
        for k in (0..lo.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (hi[k + 1] - lo[k + 1] + 1) as usize;
        }
        Ok(Self { lo, hi, strides, norm, trunc_lo, trunc_hi })
    }

    fn len(&self) -> usize {
        self.strides[0] * (self.hi[0] - self.lo[0] + 1) as usize
    }

    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn coords(&self, id: PointId) -> Vec<i64> {
        let mut rem = id;
        self.strides
            .iter()
            .zip(&self.lo)
            .map(|(&s, &lo)| {
                let q = rem / s;
                rem %= s;
                lo + q as i64
            })
            .collect()
    }

    fn id_of(&self, c: &[i64]) -> Option<PointId> {
        if c.len() != self.dim() {
            return None;
        }
        let mut id = 0usize;
        for k in 0..c.len() {
            if c[k] < self.lo[k] || c[k] > self.hi[k] {
                return None;
            }
            id += (c[k] - self.lo[k]) as usize * self.strides[k];
        }
        Some(id)
    }

    fn dist(&self, x: PointId, y: PointId) -> Dist {
        let (a, b) = (self.coords(x), self.coords(y));
        let diff: Vec<i64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
        self.norm.length(&diff)
    }

    /// Visit ball members in increasing id order.
    fn visit_ball(&self, c: &[i64], r: Dist, f: &mut impl FnMut(PointId)) {
        self.visit_axis(0, c, r, 0, 0, f);
    }

    fn visit_axis(&self, k: usize, c: &[i64], r: Dist, partial: u128, base: usize, f: &mut impl FnMut(PointId)) {
        let lo = self.lo[k].max(c[k] - r as i64);
        let hi = self.hi[k].min(c[k] + r as i64);
        for x in lo..=hi {
            let p = self.norm.accumulate(partial, (x - c[k]).unsigned_abs());
            if !self.norm.within(p, r) {
                continue;
            }
            let id = base + (x - self.lo[k]) as usize * self.strides[k];
            if k + 1 == self.dim() {
                f(id);
            } else {
                self.visit_axis(k + 1, c, r, p, id, f);
            }
        }
    }

    fn margin(&self, x: PointId) -> Dist {
        let c = self.coords(x);
        let mut m = u64::MAX;
        for k in 0..c.len() {
            if self.trunc_lo[k] {
                m = m.min((c[k] - self.lo[k]) as u64);
            }
            if self.trunc_hi[k] {
                m = m.min((self.hi[k] - c[k]) as u64);
            }
        }
        Dist::try_from(m).unwrap_or(Dist::MAX)
    }

    fn boundary_distance(&self, x: PointId) -> Dist {
        let c = self.coords(x);
        let mut m = u64::MAX;
        for k in 0..c.len() {
            if !self.trunc_lo[k] {
                m = m.min((c[k] - self.lo[k]) as u64);
            }
            if !self.trunc_hi[k] {
                m = m.min((self.hi[k] - c[k]) as u64);
            }
        }
        Dist::try_from(m).unwrap_or(Dist::MAX)
    }

    fn diameter(&self) -> Dist {
        let ext: Vec<i64> = self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).collect();
        self.norm.length(&ext)
    }
}

#[derive(Clone, Debug)]
enum Metric {
    Grid(Grid),
    Dense(Vec<Dist>),
}

#[derive(Clone, Debug)]
struct Tori {
    /// Component index of every point.
    component: Vec<usize>,
    /// First id of every component.
    starts: Vec<usize>,
    moduli: Vec<Vec<i64>>,
}

impl Tori {
    fn local(&self, x: PointId) -> (usize, Vec<i64>) {
        let c = self.component[x];
        let mut rem = x - self.starts[c];
        let m = &self.moduli[c];
        let mut out = vec![0; m.len()];
        for k in (0..m.len()).rev() {
            out[k] = (rem % m[k] as usize) as i64;
            rem /= m[k] as usize;
        }
        (c, out)
    }

    fn id(&self, comp: usize, local: &[i64]) -> PointId {
        let m = &self.moduli[comp];
        let mut id = 0usize;
        for k in 0..m.len() {
            id = id * m[k] as usize + local[k].rem_euclid(m[k]) as usize;
        }
        self.starts[comp] + id
    }
}

#[derive(Clone, Debug)]
enum Group {
    Lattice,
    Tori(Tori),
}

/// A finite, strongly discrete, bounded-geometry metric space.
#[derive(Clone, Debug)]
pub struct Space {
    name: String,
    descriptor: Option<Descriptor>,
    n: usize,
    metric: Metric,
    /// Row-major coordinates for dense spaces cut out of a lattice.
    stored_coords: Option<(usize, Vec<i64>)>,
    group: Option<Group>,
    center: PointId,
    diameter: Dist,
    /// Attained distances (dense backend only).
    values: Vec<Dist>,
    /// `growth[i]` is the largest ball at radius `values[i]` (dense only).
    growth: Vec<usize>,
}

impl Space {
    pub fn build(name: impl Into<String>, descriptor: Descriptor) -> Result<Self> {
        let name = name.into();
        let mut space = match &descriptor {
            Descriptor::Lattice { lo, hi, norm } => {
                let d = lo.len();
                let grid = Grid::new(lo.clone(), hi.clone(), *norm, vec![true; d], vec![true; d])?;
                let mut s = Self::from_grid(name, grid);
                s.group = Some(Group::Lattice);
                s
            }
            Descriptor::NatWindow { max } => {
                let grid = Grid::new(vec![0], vec![*max], Norm::L1, vec![false], vec![true])?;
                Self::from_grid(name, grid)
            }
            Descriptor::Quadrant { max, norm } => {
                let grid = Grid::new(vec![0, 0], vec![*max, *max], *norm, vec![false; 2], vec![true; 2])?;
                Self::from_grid(name, grid)
            }
            Descriptor::BoxSpace { components, separation } => Self::box_space(name, components, *separation)?,
            Descriptor::Explicit { distances } => Self::from_distance_matrix(name, distances)?,
            Descriptor::Graph { n, edges } => Self::graph(name, *n, edges)?,
        };
        space.descriptor = Some(descriptor);
        Ok(space)
    }

    fn from_grid(name: String, grid: Grid) -> Self {
        let origin: Vec<i64> = grid.lo.iter().zip(&grid.hi).map(|(&l, &h)| 0i64.clamp(l, h)).collect();
        let center = grid.id_of(&origin).expect("clamped origin lies in the box");
        let diameter = grid.diameter();
        Self {
            name,
            descriptor: None,
            n: grid.len(),
            metric: Metric::Grid(grid),
            stored_coords: None,
            group: None,
            center,
            diameter,
            values: Vec::new(),
            growth: Vec::new(),
        }
    }

    /// Validates and ingests an explicit distance matrix (rounded up).
    pub fn from_distance_matrix(name: impl Into<String>, m: &[Vec<f64>]) -> Result<Self> {
        let n = m.len();
        if n == 0 {
            return Err(Error::InvalidDescriptor("empty distance matrix".into()));
        }
        for (row, r) in m.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { row, len: r.len(), expected: n });
            }
        }
        for x in 0..n {
            for y in 0..n {
                let v = m[x][y];
                if !v.is_finite() || v < 0.0 || v > Dist::MAX as f64 {
                    return Err(Error::NotDiscrete { x, y, value: v });
                }
                if x == y && v != 0.0 {
                    return Err(Error::NotDiscrete { x, y, value: v });
                }
                if x != y && v == 0.0 {
                    return Err(Error::ZeroDistance { x, y });
                }
                if m[y][x] != v {
                    return Err(Error::NonSymmetric { x, y, dxy: v, dyx: m[y][x] });
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let via = m[x][y] + m[y][z];
                    if m[x][z] > via * (1.0 + 1e-12) {
                        return Err(Error::TriangleViolation { x, y, z, dxz: m[x][z], via });
                    }
                }
            }
        }
        let d: Vec<Dist> = m.iter().flat_map(|r| r.iter().map(|&v| v.ceil() as Dist)).collect();
        Ok(Self::from_dense(name.into(), n, d))
    }

    fn from_dense(name: String, n: usize, d: Vec<Dist>) -> Self {
        let mut values: Vec<Dist> = d.clone();
        values.sort_unstable();
        values.dedup();
        let mut growth = vec![0usize; values.len()];
        let mut counts = vec![0usize; values.len()];
        for x in 0..n {
            counts.iter_mut().for_each(|c| *c = 0);
            for &v in &d[x * n..(x + 1) * n] {
                counts[values.binary_search(&v).expect("value present")] += 1;
            }
            let mut acc = 0;
            for (i, c) in counts.iter().enumerate() {
                acc += c;
                growth[i] = growth[i].max(acc);
            }
        }
        let diameter = *values.last().unwrap_or(&0);
        Self {
            name,
            descriptor: None,
            n,
            metric: Metric::Dense(d),
            stored_coords: None,
            group: None,
            center: 0,
            diameter,
            values,
            growth,
        }
    }

    fn box_space(name: String, components: &[Vec<i64>], separation: Dist) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDescriptor("box space needs at least one component".into()));
        }
        let rank = components[0].len();
        if rank == 0 || components.iter().any(|c| c.len() != rank || c.iter().any(|&m| m < 1)) {
            return Err(Error::InvalidDescriptor("box space components must share a positive rank".into()));
        }
        let mut starts = Vec::new();
        let mut component = Vec::new();
        for (i, m) in components.iter().enumerate() {
            starts.push(component.len());
            let size: i64 = m.iter().product();
            component.extend(std::iter::repeat_n(i, size as usize));
        }
        let tori = Tori { component, starts, moduli: components.to_vec() };
        let n = tori.component.len();
        let mut max_diam = 0;
        for m in components {
            max_diam = max_diam.max(m.iter().map(|&k| (k / 2) as Dist).sum::<Dist>());
        }
        if components.len() > 1 && 2 * separation < max_diam {
            return Err(Error::InvalidDescriptor(format!(
                "separation {separation} too small for component diameter {max_diam}"
            )));
        }
        let locals: Vec<(usize, Vec<i64>)> = (0..n).map(|x| tori.local(x)).collect();
        let mut d = vec![0 as Dist; n * n];
        for x in 0..n {
            for y in 0..n {
                let (cx, lx) = &locals[x];
                let (cy, ly) = &locals[y];
                d[x * n + y] = if cx != cy {
                    separation
                } else {
                    let m = &tori.moduli[*cx];
                    (0..rank)
                        .map(|k| {
                            let a = (lx[k] - ly[k]).abs();
                            a.min(m[k] - a) as Dist
                        })
                        .sum()
                };
                if x != y && d[x * n + y] == 0 {
                    return Err(Error::ZeroDistance { x, y });
                }
            }
        }
        let mut s = Self::from_dense(name, n, d);
        s.group = Some(Group::Tori(tori));
        Ok(s)
    }

    fn graph(name: String, n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDescriptor("graph has no vertices".into()));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::UnknownPoint(a.max(b)));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::NotDiscrete { x: a, y: b, value: w });
            }
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        let mut m = vec![vec![f64::INFINITY; n]; n];
        for s in 0..n {
            // Dijkstra with a linear scan; graphs here are small.
            let dist = &mut m[s];
            dist[s] = 0.0;
            let mut done = vec![false; n];
            for _ in 0..n {
                let Some(u) = (0..n).filter(|&u| !done[u] && dist[u].is_finite()).min_by(|&a, &b| dist[a].total_cmp(&dist[b])) else {
                    break;
                };
                done[u] = true;
                for &(v, w) in &adj[u] {
                    if dist[u] + w < dist[v] {
                        dist[v] = dist[u] + w;
                    }
                }
            }
        }
        if let Some((x, y)) = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).find(|&(x, y)| !m[x][y].is_finite()) {
            return Err(Error::InvalidDescriptor(format!("graph is disconnected: no path from {x} to {y}")));
        }
        let d: Vec<Dist> = m.iter().flat_map(|r| r.iter().map(|&v| v.ceil() as Dist)).collect();
        Ok(Self::from_dense(name, n, d))
    }

    /// Dense space from a template, keeping lattice offsets as coordinates.
    pub fn from_template(name: impl Into<String>, t: &Template) -> Self {
        let n = t.len();
        let d: Vec<Dist> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| t.dist(a, b)).collect();
        let mut s = Self::from_dense(name.into(), n, d);
        s.center = t.base();
        if let Some(off) = t.offsets() {
            let dim = off.first().map_or(0, |o| o.len());
            s.stored_coords = Some((dim, off.iter().flatten().copied().collect()));
        }
        s
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn descriptor(&self) -> Option<&Descriptor> {
        self.descriptor.as_ref()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Designated center used by essential and ghost profiles.
    pub fn center(&self) -> PointId {
        self.center
    }

    pub fn with_center(mut self, c: PointId) -> Result<Self> {
        self.check(c)?;
        self.center = c;
        Ok(self)
    }

    pub fn diameter(&self) -> Dist {
        self.diameter
    }

    pub fn check(&self, x: PointId) -> Result<()> {
        if x < self.n {
            Ok(())
        } else {
            Err(Error::UnknownPoint(x))
        }
    }

    #[inline]
    pub fn dist(&self, x: PointId, y: PointId) -> Dist {
        match &self.metric {
            Metric::Grid(g) => g.dist(x, y),
            Metric::Dense(d) => d[x * self.n + y],
        }
    }

    /// Closed ball `{y : d(center, y) <= radius}` in increasing id order.
    pub fn ball(&self, center: PointId, radius: Dist) -> Result<Vec<PointId>> {
        self.check(center)?;
        Ok(self.ball_unchecked(center, radius))
    }

    pub(crate) fn ball_unchecked(&self, center: PointId, radius: Dist) -> Vec<PointId> {
        let mut out = Vec::new();
        match &self.metric {
            Metric::Grid(g) => g.visit_ball(&g.coords(center), radius, &mut |y| out.push(y)),
            Metric::Dense(d) => {
                let row = &d[center * self.n..(center + 1) * self.n];
                out.extend(row.iter().enumerate().filter(|(_, &v)| v <= radius).map(|(y, _)| y));
            }
        }
        out
    }

    /// Points within `radius` of some point of `set`, in id order.
    pub fn neighborhood(&self, set: &[PointId], radius: Dist) -> Vec<PointId> {
        let mut mark = vec![false; self.n];
        for &x in set {
            match &self.metric {
                Metric::Grid(g) => g.visit_ball(&g.coords(x), radius, &mut |y| mark[y] = true),
                Metric::Dense(d) => {
                    for (y, &v) in d[x * self.n..(x + 1) * self.n].iter().enumerate() {
                        if v <= radius {
                            mark[y] = true;
                        }
                    }
                }
            }
        }
        mark.iter().enumerate().filter(|(_, &m)| m).map(|(y, _)| y).collect()
    }

    /// Largest ball cardinality at radius `r`, i.e. `N(r)`.
    pub fn growth(&self, r: Dist) -> usize {
        match &self.metric {
            Metric::Grid(g) => {
                let mid: Vec<i64> = g.lo.iter().zip(&g.hi).map(|(l, h)| (l + h).div_euclid(2)).collect();
                let mut count = 0;
                g.visit_ball(&mid, r, &mut |_| count += 1);
                count
            }
            Metric::Dense(_) => match self.values.binary_search(&r) {
                Ok(i) => self.growth[i],
                Err(0) => 0,
                Err(i) => self.growth[i - 1],
            },
        }
    }

    /// Sorted attained distance values.
    pub fn value_set(&self) -> Vec<Dist> {
        match &self.metric {
            Metric::Grid(_) => (0..=self.diameter).collect(),
            Metric::Dense(_) => self.values.clone(),
        }
    }

    /// Distance from `x` to the nearest truncation face of the window.
    /// Genuinely finite spaces report `Dist::MAX`.
    pub fn margin(&self, x: PointId) -> Dist {
        match &self.metric {
            Metric::Grid(g) => g.margin(x),
            Metric::Dense(_) => Dist::MAX,
        }
    }

    /// Coordinate distance from `x` to the nearest genuine (non-truncated)
    /// face of a box window; `Dist::MAX` when every face is a truncation.
    /// `None` for spaces without a box structure.
    pub fn boundary_distance(&self, x: PointId) -> Option<Dist> {
        match &self.metric {
            Metric::Grid(g) => Some(g.boundary_distance(x)),
            Metric::Dense(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.metric {
            Metric::Grid(g) => g.dim(),
            Metric::Dense(_) => self.stored_coords.as_ref().map_or(0, |c| c.0),
        }
    }

    /// Lattice coordinates, when the space has them.
    pub fn coords(&self, x: PointId) -> Option<Vec<i64>> {
        match &self.metric {
            Metric::Grid(g) => Some(g.coords(x)),
            Metric::Dense(_) => self.stored_coords.as_ref().map(|(d, c)| c[x * d..(x + 1) * d].to_vec()),
        }
    }

    pub fn point_at(&self, c: &[i64]) -> Option<PointId> {
        match &self.metric {
            Metric::Grid(g) => g.id_of(c),
            Metric::Dense(_) => {
                let (d, all) = self.stored_coords.as_ref()?;
                (0..self.n).find(|&x| &all[x * d..(x + 1) * d] == c)
            }
        }
    }

    /// Whether the space is a box window of a lattice (block sparsification
    /// and lattice-aligned nets apply).
    pub fn is_lattice_like(&self) -> bool {
        matches!(self.metric, Metric::Grid(_)) || self.stored_coords.is_some()
    }

    /// Lattice bounds of a box window.
    pub fn box_bounds(&self) -> Option<(&[i64], &[i64])> {
        match &self.metric {
            Metric::Grid(g) => Some((&g.lo, &g.hi)),
            Metric::Dense(_) => None,
        }
    }

    pub fn norm(&self) -> Option<Norm> {
        match &self.metric {
            Metric::Grid(g) => Some(g.norm),
            Metric::Dense(_) => None,
        }
    }

    pub fn is_group(&self) -> bool {
        self.group.is_some()
    }

    /// `x · g` for the group structure, if defined and inside the window.
    pub fn translate(&self, x: PointId, g: &[i64]) -> Option<PointId> {
        match (self.group.as_ref()?, &self.metric) {
            (Group::Lattice, Metric::Grid(grid)) => {
                let c: Vec<i64> = grid.coords(x).iter().zip(g).map(|(a, b)| a + b).collect();
                grid.id_of(&c)
            }
            (Group::Tori(t), _) => {
                let (comp, local) = t.local(x);
                if local.len() != g.len() {
                    return None;
                }
                let moved: Vec<i64> = local.iter().zip(g).map(|(a, b)| a + b).collect();
                Some(t.id(comp, &moved))
            }
            _ => None,
        }
    }

    /// Rank of the translation group, if any.
    pub fn group_rank(&self) -> Option<usize> {
        match self.group.as_ref()? {
            Group::Lattice => Some(self.dim()),
            Group::Tori(t) => Some(t.moduli[0].len()),
        }
    }

    /// Right translations `ρ_g`, one per requested offset, restricted to the
    /// window. `None` for spaces without group structure or offsets of the
    /// wrong rank.
    pub fn right_translations(&self, offsets: &[Vec<i64>]) -> Option<Vec<PartialTranslation>> {
        let rank = match self.group.as_ref()? {
            Group::Lattice => self.dim(),
            Group::Tori(t) => t.moduli[0].len(),
        };
        offsets
            .iter()
            .map(|g| {
                if g.len() != rank {
                    return None;
                }
                let pairs: Vec<(PointId, PointId)> =
                    (0..self.n).filter_map(|x| self.translate(x, g).map(|y| (x, y))).collect();
                PartialTranslation::new(self, pairs).ok()
            })
            .collect()
    }

    /// Connected components of the graph joining points at distance `<= scale`.
    pub fn components(&self, scale: Dist) -> Vec<Vec<PointId>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for x in 0..self.n {
            for y in self.ball_unchecked(x, scale) {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<PointId>> = Default::default();
        for x in 0..self.n {
            let r = find(&mut parent, x);
            groups.entry(r).or_default().push(x);
        }
        groups.into_values().collect()
    }

    /// Diameter of a point set.
    pub fn set_diameter(&self, set: &[PointId]) -> Dist {
        let mut d = 0;
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                d = d.max(self.dist(a, b));
            }
        }
        d
    }

    pub fn set_distance(&self, a: &[PointId], b: &[PointId]) -> Dist {
        let mut d = Dist::MAX;
        for &x in a {
            for &y in b {
                d = d.min(self.dist(x, y));
            }
        }
        d
    }
}
