use super::{Dist, PointId, Space};
use crate::error::{Error, Result};

/// A bijection `t: D → R` between subsets of a space, stored as sorted
/// `(x, t(x))` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialTranslation {
    pairs: Vec<(PointId, PointId)>,
    displacement: Dist,
}

impl PartialTranslation {
    pub fn new(space: &Space, mut pairs: Vec<(PointId, PointId)>) -> Result<Self> {
        pairs.sort_unstable();
        let mut seen = vec![false; space.len()];
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateEntry { x: w[0].0, y: w[1].0 });
            }
        }
        let mut displacement = 0;
        for &(x, y) in &pairs {
            space.check(x)?;
            space.check(y)?;
            if std::mem::replace(&mut seen[y], true) {
                return Err(Error::DuplicateEntry { x, y });
            }
            displacement = displacement.max(space.dist(x, y));
        }
        Ok(Self { pairs, displacement })
    }

    pub fn identity(points: &[PointId]) -> Self {
        let mut pairs: Vec<_> = points.iter().map(|&x| (x, x)).collect();
        pairs.sort_unstable();
        pairs.dedup();
        Self { pairs, displacement: 0 }
    }

    pub fn pairs(&self) -> &[(PointId, PointId)] {
        &self.pairs
    }

    pub fn domain(&self) -> Vec<PointId> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn range(&self) -> Vec<PointId> {
        let mut r: Vec<_> = self.pairs.iter().map(|p| p.1).collect();
        r.sort_unstable();
        r
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn displacement(&self) -> Dist {
        self.displacement
    }

    pub fn apply(&self, x: PointId) -> Option<PointId> {
        self.pairs.binary_search_by_key(&x, |p| p.0).ok().map(|i| self.pairs[i].1)
    }

    pub fn inverse(&self) -> Self {
        let mut pairs: Vec<_> = self.pairs.iter().map(|&(x, y)| (y, x)).collect();
        pairs.sort_unstable();
        Self { pairs, displacement: self.displacement }
    }
}
