use std::collections::HashMap;

use crate::error::{Error, Result};

/// A split of `B` into three classes with `s(B_i) ∩ t(B_i) = ∅`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    pub classes: [Vec<u64>; 3],
}

impl Coloring {
    /// Independent check: classes partition `b` and no class contains both
    /// `a` and some `a'` with `s(a') = t(a)`.
    pub fn verify(&self, b: &[u64], s: &[u64], t: &[u64]) -> bool {
        let mut class_of: HashMap<u64, usize> = HashMap::new();
        for (i, c) in self.classes.iter().enumerate() {
            for &a in c {
                if class_of.insert(a, i).is_some() {
                    return false;
                }
            }
        }
        if class_of.len() != b.len() || b.iter().any(|a| !class_of.contains_key(a)) {
            return false;
        }
        let s_of: HashMap<u64, usize> = b.iter().zip(s).map(|(&a, &sa)| (sa, class_of[&a])).collect();
        b.iter().zip(t).all(|(a, ta)| s_of.get(ta) != Some(&class_of[a]))
    }
}

/// Three-colour `B` given bijections `s, t: B → C` (as value lists aligned
/// with `b`) with `s(a) ≠ t(a)`. Follows the orbits of `u = s⁻¹ ∘ t`,
/// alternating two classes and putting the last point of an odd orbit into
/// the third.
pub fn three_color(b: &[u64], s: &[u64], t: &[u64]) -> Result<Coloring> {
    let n = b.len();
    if s.len() != n || t.len() != n {
        return Err(Error::ColoringPrecondition { witness: 0, reason: "maps must have one value per element".into() });
    }
    let mut pos: HashMap<u64, usize> = HashMap::with_capacity(n);
    for (i, &a) in b.iter().enumerate() {
        if pos.insert(a, i).is_some() {
            return Err(Error::ColoringPrecondition { witness: a, reason: "element listed twice".into() });
        }
    }
    let mut s_inv: HashMap<u64, usize> = HashMap::with_capacity(n);
    for (i, &v) in s.iter().enumerate() {
        if s_inv.insert(v, i).is_some() {
            return Err(Error::ColoringPrecondition { witness: b[i], reason: "s is not injective".into() });
        }
    }
    let mut t_seen: HashMap<u64, usize> = HashMap::with_capacity(n);
    for (i, &v) in t.iter().enumerate() {
        if t_seen.insert(v, i).is_some() {
            return Err(Error::ColoringPrecondition { witness: b[i], reason: "t is not injective".into() });
        }
        if !s_inv.contains_key(&v) {
            return Err(Error::ColoringPrecondition { witness: b[i], reason: "s and t have different ranges".into() });
        }
        if s[i] == v {
            return Err(Error::ColoringPrecondition { witness: b[i], reason: "s(a) = t(a)".into() });
        }
    }
    let u = |i: usize| s_inv[&t[i]];
    let mut class = vec![usize::MAX; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| b[i]);
    for &start in &order {
        if class[start] != usize::MAX {
            continue;
        }
        let mut orbit = vec![start];
        let mut cur = u(start);
        while cur != start {
            orbit.push(cur);
            cur = u(cur);
        }
        for (j, &i) in orbit.iter().enumerate() {
            class[i] = j % 2;
        }
        if orbit.len() % 2 == 1 {
            class[*orbit.last().unwrap()] = 2;
        }
    }
    let mut classes: [Vec<u64>; 3] = Default::default();
    for &i in &order {
        classes[class[i]].push(b[i]);
    }
    Ok(Coloring { classes })
}
