use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{PointId, Space};

/// How basepoints are generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    /// `x_n = start + n·step`, `n = 0, 1, ...`
    Linear { start: Vec<i64>, step: Vec<i64> },
    /// First coordinate `⌊e^{rate·n}⌋` for `n = 1, 2, ...`, keeping only
    /// values `>= start[0]`; the other coordinates are taken from `start`.
    Exponential { start: Vec<i64>, rate: f64 },
    /// Explicit point ids.
    Points { ids: Vec<PointId> },
}

/// A sequence of basepoints running off to infinity inside a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub label: String,
    #[serde(flatten)]
    pub rule: Rule,
}

const MAX_TERMS: usize = 1 << 20;

fn parse_vec(s: &str) -> Result<Vec<i64>> {
    s.split(':')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Error::BadDirection(format!("bad coordinate `{t}`"))))
        .collect()
}

fn parse_rate(s: &str) -> Result<f64> {
    let bad = || Error::BadDirection(format!("bad exponential rate `{s}`"));
    match s.strip_suffix("pi") {
        Some("") => Ok(PI),
        Some(m) => m.parse::<f64>().map(|v| v * PI).map_err(|_| bad()),
        None => s.parse::<f64>().map_err(|_| bad()),
    }
}

impl Direction {
    pub fn linear(label: impl Into<String>, start: Vec<i64>, step: Vec<i64>) -> Self {
        Self { label: label.into(), rule: Rule::Linear { start, step } }
    }

    pub fn exponential(label: impl Into<String>, start: Vec<i64>, rate: f64) -> Self {
        Self { label: label.into(), rule: Rule::Exponential { start, rate } }
    }

    pub fn points(label: impl Into<String>, ids: Vec<PointId>) -> Self {
        Self { label: label.into(), rule: Rule::Points { ids } }
    }

    /// Parse `"x0,step"`, `"x0,exp:RATE"` (RATE may end in `pi`) or
    /// `"ids:a;b;c"`. Vector coordinates are separated by `:`.
    pub fn parse(spec: &str) -> Result<Self> {
        let label = spec.to_string();
        if let Some(rest) = spec.strip_prefix("ids:") {
            let ids = rest
                .split(';')
                .map(|t| t.trim().parse::<PointId>().map_err(|_| Error::BadDirection(format!("bad point id `{t}`"))))
                .collect::<Result<_>>()?;
            return Ok(Self::points(label, ids));
        }
        let (x0, rule) = spec.split_once(',').ok_or_else(|| Error::BadDirection(format!("expected `x0,step` or `x0,rule`, got `{spec}`")))?;
        let start = parse_vec(x0)?;
        if let Some(rate) = rule.strip_prefix("exp:") {
            return Ok(Self::exponential(label, start, parse_rate(rate)?));
        }
        let step = parse_vec(rule)?;
        if step.len() != start.len() {
            return Err(Error::BadDirection("start and step have different ranks".into()));
        }
        Ok(Self::linear(label, start, step))
    }

    /// Basepoints inside the window with margin at least `margin`.
    ///
    /// Generated rules drop points too close to a truncation face; explicit
    /// point lists are rejected instead. Distances to the window centre must
    /// be non-decreasing.
    pub fn basepoints(&self, space: &Space, margin: u32) -> Result<Vec<PointId>> {
        let pts: Vec<PointId> = match &self.rule {
            Rule::Points { ids } => {
                for &x in ids {
                    space.check(x)?;
                    let m = space.margin(x);
                    if m < margin {
                        return Err(Error::MarginViolation { point: x, margin: m, required: margin });
                    }
                }
                ids.clone()
            }
            Rule::Linear { start, step } => {
                if step.iter().all(|&s| s == 0) {
                    return Err(Error::BadDirection("zero step".into()));
                }
                let mut out = Vec::new();
                for n in 0..MAX_TERMS as i64 {
                    let c: Vec<i64> = start.iter().zip(step).map(|(a, s)| a + n * s).collect();
                    match space.point_at(&c) {
                        Some(x) => out.push(x),
                        None if n == 0 => continue,
                        None => break,
                    }
                }
                out.into_iter().filter(|&x| space.margin(x) >= margin).collect()
            }
            Rule::Exponential { start, rate } => {
                if !(*rate > 0.0) || start.is_empty() {
                    return Err(Error::BadDirection("exponential rule needs a positive rate and a start".into()));
                }
                let mut out = Vec::new();
                for n in 1.. {
                    let v = (rate * n as f64).exp().floor();
                    if !v.is_finite() || v > i64::MAX as f64 / 2.0 {
                        break;
                    }
                    let v = v as i64;
                    if v < start[0] {
                        continue;
                    }
                    let mut c = start.clone();
                    c[0] = v;
                    match space.point_at(&c) {
                        Some(x) => out.push(x),
                        None => break,
                    }
                }
                out.into_iter().filter(|&x| space.margin(x) >= margin).collect()
            }
        };
        if pts.is_empty() {
            return Err(Error::BadDirection(format!("`{}` has no basepoints with margin {margin}", self.label)));
        }
        let c = space.center();
        if pts.windows(2).any(|w| space.dist(c, w[1]) < space.dist(c, w[0])) {
            return Err(Error::BadDirection(format!("`{}` moves back towards the centre", self.label)));
        }
        Ok(pts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Descriptor, Norm};

    #[test]
    fn parse_and_generate() {
        let s = Space::build("n", Descriptor::NatWindow { max: 1000 }).unwrap();
        let d = Direction::parse("100,100").unwrap();
        let b = d.basepoints(&s, 5).unwrap();
        assert_eq!(b.len(), 9);
        assert_eq!(s.coords(b[0]).unwrap(), vec![100]);
        let e = Direction::parse("20,exp:1").unwrap();
        let b = e.basepoints(&s, 0).unwrap();
        let xs: Vec<i64> = b.iter().map(|&x| s.coords(x).unwrap()[0]).collect();
        assert_eq!(xs, vec![20, 54, 148, 403]);
        assert!((parse_rate("2pi").unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!(matches!(Direction::parse("ids:3;1").unwrap().basepoints(&s, 0), Err(Error::BadDirection(_))));
        assert!(matches!(Direction::parse("ids:999").unwrap().basepoints(&s, 5), Err(Error::MarginViolation { .. })));
        assert!(Direction::parse("1,2:3").is_err());
    }

    #[test]
    fn quadrant_ray() {
        let s = Space::build("q", Descriptor::Quadrant { max: 30, norm: Norm::Linf }).unwrap();
        let d = Direction::parse("0:2,1:0").unwrap();
        let b = d.basepoints(&s, 2).unwrap();
        assert_eq!(s.coords(*b.last().unwrap()).unwrap(), vec![28, 2]);
    }
}
