//! Small dense and banded kernels shared by the norm and inverse routines.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Spectral norm of a row-major `k×k` block.
pub fn block_norm2(block: &[C64], k: usize) -> f64 {
    if k == 1 {
        return block[0].norm();
    }
    let m = DMatrix::from_row_slice(k, k, block);
    m.singular_values().max()
}

/// Riesz–Thorin bound `‖B‖₁^{1/p} ‖B‖_∞^{1/q}` on the ℓᵖ norm of a block;
/// exact spectral norm at `p = 2`.
pub fn block_norm_p(block: &[C64], k: usize, p: f64) -> f64 {
    if k == 1 {
        return block[0].norm();
    }
    if p == 2.0 {
        return block_norm2(block, k);
    }
    let col = (0..k).map(|j| (0..k).map(|i| block[i * k + j].norm()).sum::<f64>()).fold(0.0, f64::max);
    let row = (0..k).map(|i| (0..k).map(|j| block[i * k + j].norm()).sum::<f64>()).fold(0.0, f64::max);
    col.powf(1.0 / p) * row.powf(1.0 - 1.0 / p)
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_p(v: &[C64], p: f64) -> f64 {
    if p == 2.0 {
        return norm2(v);
    }
    v.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Deterministic start vector: all ones plus a small seeded perturbation so
/// it cannot be exactly orthogonal to the dominant eigenvector.
pub fn start_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(1.0 + 1e-3 * rng.gen_range(-1.0..1.0), 1e-3 * rng.gen_range(-1.0..1.0))).collect();
    let s = norm2(&v);
    v.iter_mut().for_each(|z| *z /= s);
    v
}

/// Smallest singular value and right singular vector of a dense matrix,
/// padding with zero rows when it is wide (the kernel is then nontrivial).
pub fn smallest_singular(mat: &DMatrix<C64>) -> (f64, Vec<C64>) {
    let (m, n) = mat.shape();
    if n == 0 {
        return (f64::INFINITY, Vec::new());
    }
    let padded;
    let a = if m < n {
        padded = mat.clone().resize_vertically(n, C64::new(0.0, 0.0));
        &padded
    } else {
        mat
    };
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, &s) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("non-empty");
    let v: Vec<C64> = v_t.row(idx).iter().map(|z| z.conj()).collect();
    (s, v)
}

/// Moore–Penrose pseudo-inverse with relative cutoff `rcond`.
pub fn pinv(mat: &DMatrix<C64>, rcond: f64) -> DMatrix<C64> {
    let (m, n) = mat.shape();
    if m == 0 || n == 0 {
        return DMatrix::zeros(n, m);
    }
    let svd = mat.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let mut out = DMatrix::<C64>::zeros(n, m);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > rcond * smax && s > 0.0 {
            let vi = v_t.row(i).adjoint();
            let ui = u.column(i).adjoint();
            out += (vi * ui) / C64::new(s, 0.0);
        }
    }
    out
}

/// Largest eigenpair of a Hermitian positive semidefinite operator by
/// restarted Lanczos with full reorthogonalisation. Stops once the Ritz
/// residual bounds the eigenvalue error by `tol` relative.
pub fn lanczos_top(
    n: usize,
    mut apply: impl FnMut(&[C64], &mut [C64]),
    start: Vec<C64>,
    tol: f64,
    max_matvec: usize,
) -> Result<(f64, Vec<C64>)> {
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }
    let m = n.min(64);
    let mut x = start;
    let mut used = 0usize;
    let mut last = f64::INFINITY;
    loop {
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let s = norm2(&x);
        if s == 0.0 {
            return Ok((0.0, x));
        }
        basis.push(x.iter().map(|z| z / s).collect());
        let mut w = vec![C64::new(0.0, 0.0); n];
        let mut breakdown = false;
        for j in 0..m {
            apply(&basis[j], &mut w);
            used += 1;
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            // Full reorthogonalisation, twice for stability.
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let b = norm2(&w);
            beta.push(b);
            if j + 1 == m || b <= 1e-14 * a.abs().max(1e-300) {
                breakdown = b <= 1e-14 * a.abs().max(1e-300);
                break;
            }
            basis.push(w.iter().map(|z| z / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = t.symmetric_eigen();
        let (imax, &theta) = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let y = eig.eigenvectors.column(imax);
        let resid = beta[k - 1] * y[k - 1].abs();
        let mut ritz = vec![C64::new(0.0, 0.0); n];
        for (i, q) in basis.iter().take(k).enumerate() {
            ritz.iter_mut().zip(q).for_each(|(r, qi)| *r += qi * y[i]);
        }
        if breakdown || resid <= tol * theta.abs() || theta == 0.0 {
            return Ok((theta.max(0.0), ritz));
        }
        if used >= max_matvec {
            return Err(Error::NonConvergence { iterations: used, last_change: (theta - last).abs() });
        }
        last = theta;
        x = ritz;
    }
}

/// Cholesky factor of a Hermitian positive definite band matrix, stored by
/// rows of the lower band.
pub struct BandCholesky {
    n: usize,
    bw: usize,
    /// `l[i * (bw + 1) + (i - j)]` holds `L[i][j]` for `i - bw <= j <= i`.
    l: Vec<C64>,
}

impl BandCholesky {
    /// Factor `G`, given as a function on the band `|i - j| <= bw`.
    pub fn factor(n: usize, bw: usize, g: impl Fn(usize, usize) -> C64) -> Option<Self> {
        let w = bw + 1;
        let mut l = vec![C64::new(0.0, 0.0); n * w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut s = g(i, j);
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)].conj();
                }
                if i == j {
                    if !(s.re > 0.0) || !s.re.is_finite() {
                        return None;
                    }
                    l[i * w] = C64::new(s.re.sqrt(), 0.0);
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Some(Self { n, bw, l })
    }

    /// Solve `G x = b` in place.
    pub fn solve(&self, b: &mut [C64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let mut s = b[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.l[i * w + (i - k)] * b[k];
            }
            b[i] = s / self.l[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + self.bw + 1).min(self.n) {
                s -= self.l[k * w + (k - i)].conj() * b[k];
            }
            b[i] = s / self.l[i * w];
        }
    }
}
