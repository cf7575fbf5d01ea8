use super::BandOperator;
use crate::error::{Error, Result};
use crate::linalg;

pub(crate) const NORM_SEED: u64 = 0x5eed_0f_a11;
pub(crate) const MAX_MATVEC: usize = 10_000;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::BadExponent(p))
    }
}

/// Certified upper bound on `‖A‖_{ℓᵖ → ℓᵖ}`: the smaller of
/// `sup ‖A_xy‖ · N(prop)` and the Schur test
/// `(max column ℓ¹)^{1/p} (max row ℓ¹)^{1/q}` on the scalar matrix.
pub fn schur_bound(a: &BandOperator, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if a.is_zero() {
        return Ok(0.0);
    }
    let k = a.block_dim();
    let n = a.len();
    let block_sup = a.entries().map(|(_, _, b)| linalg::block_norm_p(b, k, p)).fold(0.0, f64::max);
    let coarse = block_sup * a.space().growth(a.propagation()) as f64;
    let mut row = vec![0.0f64; n * k];
    let mut col = vec![0.0f64; n * k];
    for (x, y, b) in a.entries() {
        for i in 0..k {
            for j in 0..k {
                let v = b[i * k + j].norm();
                row[x * k + i] += v;
                col[y * k + j] += v;
            }
        }
    }
    let rmax = row.iter().copied().fold(0.0, f64::max);
    let cmax = col.iter().copied().fold(0.0, f64::max);
    let schur = if p == 2.0 { (cmax * rmax).sqrt() } else { cmax.powf(1.0 / p) * rmax.powf(1.0 - 1.0 / p) };
    Ok(coarse.min(schur))
}

/// Largest singular value of `A` on `ℓ²`, via Krylov iteration on `A*A`
/// from the all-ones start vector (lightly perturbed).
pub fn norm2(a: &BandOperator) -> Result<f64> {
    if a.is_zero() {
        return Ok(0.0);
    }
    let adj = a.adjoint();
    let dim = a.len() * a.block_dim();
    let apply = |x: &[num_complex::Complex64], y: &mut [num_complex::Complex64]| {
        let ax = a.apply_slice(x);
        y.copy_from_slice(&adj.apply_slice(&ax));
    };
    let (mu, _) = linalg::lanczos_top(dim, apply, linalg::start_vector(dim, NORM_SEED), 1e-10, MAX_MATVEC)?;
    Ok(mu.sqrt())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64 as C64;

    use super::*;
    use crate::operator::gen;
    use crate::space::{Descriptor, Norm, Space};

    fn zwin(n: i64) -> Arc<Space> {
        Arc::new(Space::build("z", Descriptor::Lattice { lo: vec![1], hi: vec![n], norm: Norm::L1 }).unwrap())
    }

    #[test]
    fn simple_bounds() {
        let s = zwin(40);
        assert_eq!(schur_bound(&BandOperator::identity(s.clone(), 1), 2.0).unwrap(), 1.0);
        assert_eq!(schur_bound(&gen::shift(s.clone(), 1), 3.0).unwrap(), 1.0);
        let t = gen::tridiagonal(s, C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        assert_eq!(schur_bound(&t, 2.0).unwrap(), 2.0);
        assert!(schur_bound(&t, 1.0).is_err());
    }

    #[test]
    fn tridiagonal_norm() {
        let s = zwin(100);
        let t = gen::tridiagonal(s.clone(), C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let exact = 2.0 * (std::f64::consts::PI / 101.0).cos();
        let got = norm2(&t).unwrap();
        assert!((got - exact).abs() < 1e-9 * exact, "{got} vs {exact}");
        assert!(got <= schur_bound(&t, 2.0).unwrap());
        assert!((norm2(&BandOperator::identity(s.clone(), 1)).unwrap() - 1.0).abs() < 1e-12);
        let e0 = BandOperator::from_triplets(s, vec![(0, 0, C64::new(1.0, 0.0))]).unwrap();
        assert!((norm2(&e0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_start_is_harmless() {
        let s = zwin(2);
        let m = C64::new(-1.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let a = BandOperator::from_triplets(s, vec![(0, 0, one), (0, 1, m), (1, 0, m), (1, 1, one)]).unwrap();
        assert!((norm2(&a).unwrap() - 2.0).abs() < 1e-10);
    }
}
