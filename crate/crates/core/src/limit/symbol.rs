//! Lower norms of translation-invariant windows through their symbols.
//!
//! A window that is translation invariant on the interior of a full lattice
//! ball is a piece of the convolution `(Av)(x) = Σ_h a(h) v(x + h)` on
//! `ℓ²(ℤᴺ)`, whose lower norm is `min_θ σ_min(Σ_h a(h) e^{i h·θ})`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::LimitWindow;
use crate::C64;

/// Relative tolerance for entry equality across interior rows.
const MATCH_TOL: f64 = 1e-12;

/// The window stencil `a(h)` read off the base row, if every interior row
/// repeats it and the limit space is a full lattice.
pub(crate) fn stencil(w: &LimitWindow) -> Option<Vec<(Vec<i64>, Vec<C64>)>> {
    if !w.escapes_boundary {
        return None;
    }
    let off = w.template.offsets()?;
    let op = &w.operator;
    let base = w.template.base();
    let pos: HashMap<&[i64], usize> = off.iter().enumerate().map(|(i, o)| (o.as_slice(), i)).collect();
    let taps: Vec<(Vec<i64>, Vec<C64>)> = op
        .row(base)
        .map(|(b, v)| (off[b].iter().zip(&off[base]).map(|(x, y)| x - y).collect(), v.to_vec()))
        .collect();
    let scale = op.entry_sup().max(1.0);
    for a in w.interior() {
        if op.row(a).count() != taps.len() {
            return None;
        }
        for (h, v) in &taps {
            let target: Vec<i64> = off[a].iter().zip(h).map(|(x, y)| x + y).collect();
            let b = *pos.get(target.as_slice())?;
            let got = op.entry(a, b)?;
            if got.iter().zip(v).any(|(x, y)| (x - y).norm() > MATCH_TOL * scale) {
                return None;
            }
        }
    }
    Some(taps)
}

fn sigma_min(taps: &[(Vec<i64>, Vec<C64>)], k: usize, theta: &[f64]) -> f64 {
    let mut m = vec![C64::new(0.0, 0.0); k * k];
    for (h, v) in taps {
        let phase: f64 = h.iter().zip(theta).map(|(a, t)| *a as f64 * t).sum();
        let e = C64::from_polar(1.0, phase);
        m.iter_mut().zip(v).for_each(|(s, x)| *s += x * e);
    }
    if k == 1 {
        return m[0].norm();
    }
    let mat = DMatrix::from_row_slice(k, k, &m);
    mat.singular_values().min()
}

/// Golden-section minimisation of `f` on `[lo, hi]`.
fn golden(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-13 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `min_θ σ_min(symbol(θ))` by a grid scan refined with coordinate-wise
/// golden-section steps around the best grid point.
pub(crate) fn min_singular(taps: &[(Vec<i64>, Vec<C64>)], k: usize, dim: usize) -> f64 {
    if taps.is_empty() {
        return 0.0;
    }
    let per_axis: usize = match dim {
        0 | 1 => 4096,
        2 => 256,
        _ => ((1u64 << 18) as f64).powf(1.0 / dim as f64).floor().max(4.0) as usize,
    };
    let step = 2.0 * PI / per_axis as f64;
    let total = per_axis.pow(dim.max(1) as u32);
    let mut best = (f64::INFINITY, vec![0.0; dim.max(1)]);
    for mut i in 0..total {
        let theta: Vec<f64> = (0..dim.max(1))
            .map(|_| {
                let t = (i % per_axis) as f64 * step;
                i /= per_axis;
                t
            })
            .collect();
        let v = sigma_min(taps, k, &theta);
        if v < best.0 {
            best = (v, theta);
        }
    }
    let (mut value, mut theta) = best;
    for _ in 0..4 {
        for ax in 0..theta.len() {
            let mut t = theta.clone();
            let (x, v) = golden(
                |s| {
                    t[ax] = s;
                    sigma_min(taps, k, &t)
                },
                theta[ax] - step,
                theta[ax] + step,
            );
            if v < value {
                value = v;
                theta[ax] = x;
            }
        }
    }
    value
}
