use serde::{Deserialize, Serialize};

use super::{Dist, PointId, Space};

/// A finite pointed metric space with a fixed labeling.
///
/// Templates cut out of a ball are labeled canonically: by distance from the
/// base, then by sorted distance profile, then by id in the source space. The
/// ball of radius `R` is therefore a prefix of any larger ball template.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Template {
    base: usize,
    n: usize,
    distances: Vec<Dist>,
    /// Lattice offsets from the base, when the source space has coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offsets: Option<Vec<Vec<i64>>>,
}

impl Template {
    /// Template from a row-major distance matrix; no metric validation.
    pub fn new(base: usize, distances: Vec<Vec<Dist>>) -> Self {
        let n = distances.len();
        assert!(base < n.max(1), "template base out of range");
        Self { base, n, distances: distances.into_iter().flatten().collect(), offsets: None }
    }

    /// Canonically labeled template of `B(center; radius)`, with the space ids
    /// in template order.
    pub fn from_ball(space: &Space, center: PointId, radius: Dist) -> (Self, Vec<PointId>) {
        let ball = space.ball_unchecked(center, radius);
        let profile = |y: PointId| {
            let mut p: Vec<Dist> = ball.iter().map(|&z| space.dist(y, z)).collect();
            p.sort_unstable();
            p
        };
        let mut keyed: Vec<(Dist, Vec<Dist>, PointId)> =
            ball.iter().map(|&y| (space.dist(center, y), profile(y), y)).collect();
        keyed.sort();
        let ids: Vec<PointId> = keyed.into_iter().map(|k| k.2).collect();
        let n = ids.len();
        let mut distances = Vec::with_capacity(n * n);
        for &a in &ids {
            distances.extend(ids.iter().map(|&b| space.dist(a, b)));
        }
        let offsets = space.coords(center).map(|c0| {
            ids.iter()
                .map(|&y| space.coords(y).unwrap().iter().zip(&c0).map(|(a, b)| a - b).collect())
                .collect()
        });
        (Self { base: 0, n, distances, offsets }, ids)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn base(&self) -> usize {
        self.base
    }

    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> Dist {
        self.distances[a * self.n + b]
    }

    pub fn offsets(&self) -> Option<&[Vec<i64>]> {
        self.offsets.as_deref()
    }

    pub fn diameter(&self) -> Dist {
        self.distances.iter().copied().max().unwrap_or(0)
    }

    /// Number of leading points within `r` of the base. For canonically
    /// labeled templates these form the sub-ball of radius `r`.
    pub fn prefix_len(&self, r: Dist) -> usize {
        (0..self.n).filter(|&a| self.dist(self.base, a) <= r).count()
    }

    /// Sub-template on the given indices (in that order), base re-mapped.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let base = idx.iter().position(|&a| a == self.base).unwrap_or(0);
        let distances = idx.iter().flat_map(|&a| idx.iter().map(move |&b| (a, b))).map(|(a, b)| self.dist(a, b)).collect();
        let offsets = self.offsets.as_ref().map(|o| idx.iter().map(|&a| o[a].clone()).collect());
        Self { base, n: idx.len(), distances, offsets }
    }

    /// Pointed isometry test against another template.
    pub fn is_isometric(&self, other: &Template) -> bool {
        if self.n != other.n {
            return false;
        }
        let cands: Vec<usize> = (0..other.n).collect();
        search(self, &cands, other.base, |a, b| other.dist(a, b), true).is_some()
    }
}

/// A distance-preserving map from template indices onto space points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetIsometry {
    /// Template indices, in template order.
    pub source: Vec<usize>,
    /// Image of each source index.
    pub target: Vec<PointId>,
    /// Whether the image is the whole candidate ball.
    pub onto: bool,
}

impl SubsetIsometry {
    pub fn map(&self, a: usize) -> PointId {
        self.target[a]
    }

    pub fn preimage(&self, y: PointId) -> Option<usize> {
        self.target.iter().position(|&t| t == y)
    }
}

/// For each candidate `(center, radius)`, the lexicographically least pointed
/// isometric embedding of the template into `B(center; radius)` sending the
/// template base to `center`, or `None`.
pub fn match_windows(space: &Space, template: &Template, candidates: &[(PointId, Dist)]) -> Vec<Option<SubsetIsometry>> {
    candidates
        .iter()
        .map(|&(c, r)| {
            if c >= space.len() {
                return None;
            }
            let ball = space.ball_unchecked(c, r);
            let target = search(template, &ball, c, |a, b| space.dist(a, b), false)?;
            Some(SubsetIsometry { source: (0..template.len()).collect(), onto: target.len() == ball.len(), target })
        })
        .collect()
}

/// Pointed isometry of the template onto the whole ball `B(center; radius)`.
pub fn match_bijective(space: &Space, template: &Template, center: PointId, radius: Dist) -> Option<SubsetIsometry> {
    let ball = space.ball_unchecked(center, radius);
    if ball.len() != template.len() {
        return None;
    }
    let target = search(template, &ball, center, |a, b| space.dist(a, b), true)?;
    Some(SubsetIsometry { source: (0..template.len()).collect(), target, onto: true })
}

fn sorted_profile(points: &[usize], from: usize, d: &impl Fn(usize, usize) -> Dist) -> Vec<Dist> {
    let mut p: Vec<Dist> = points.iter().map(|&z| d(from, z)).collect();
    p.sort_unstable();
    p
}

/// Backtracking search. Template points are assigned base first, then in
/// index order; candidates are tried in increasing id order, so the first
/// complete assignment is lexicographically least.
fn search(t: &Template, cands: &[usize], center: usize, d: impl Fn(usize, usize) -> Dist, bijective: bool) -> Option<Vec<usize>> {
    let n = t.len();
    if n == 0 {
        return Some(Vec::new());
    }
    if !cands.contains(&center) {
        return None;
    }
    let order: Vec<usize> = std::iter::once(t.base).chain((0..n).filter(|&a| a != t.base)).collect();
    let tidx: Vec<usize> = (0..n).collect();
    let tdist = |a: usize, b: usize| t.dist(a, b);
    // Candidate lists per template point, pruned by distance to the base and
    // (for bijections) by the sorted distance profile.
    let cand_profiles: Option<Vec<Vec<Dist>>> = bijective.then(|| cands.iter().map(|&y| sorted_profile(cands, y, &d)).collect());
    let mut options: Vec<Vec<usize>> = Vec::with_capacity(n);
    for &a in &order {
        let want = t.dist(t.base, a);
        let tprof = bijective.then(|| sorted_profile(&tidx, a, &tdist));
        let opts: Vec<usize> = cands
            .iter()
            .enumerate()
            .filter(|&(i, &y)| {
                d(center, y) == want
                    && match (&tprof, &cand_profiles) {
                        (Some(tp), Some(cp)) => *tp == cp[i],
                        _ => true,
                    }
            })
            .map(|(_, &y)| y)
            .collect();
        if opts.is_empty() {
            return None;
        }
        options.push(opts);
    }
    let mut image = vec![usize::MAX; n];
    let mut used: Vec<usize> = Vec::with_capacity(n);
    let mut cursor = vec![0usize; n];
    let mut level = 0usize;
    loop {
        if level == n {
            return Some(image);
        }
        let a = order[level];
        let mut placed = false;
        while cursor[level] < options[level].len() {
            let y = options[level][cursor[level]];
            cursor[level] += 1;
            if used.contains(&y) {
                continue;
            }
            let fits = order[..level].iter().all(|&b| d(y, image[b]) == t.dist(a, b));
            if fits {
                image[a] = y;
                used.push(y);
                placed = true;
                break;
            }
        }
        if placed {
            level += 1;
            if level < n {
                cursor[level] = 0;
            }
        } else {
            if level == 0 {
                return None;
            }
            level -= 1;
            let prev = order[level];
            image[prev] = usize::MAX;
            used.pop();
        }
    }
}
