use rayon::prelude::*;

use super::{nu, NuReport};
use crate::error::{Error, Result};
use crate::operator::BandOperator;
use crate::space::{Dist, PointId};

/// Points at least `prop(A)` away from the truncation faces of the window,
/// where the rows of `A` are not cut off.
pub fn interior_columns(a: &BandOperator) -> Vec<PointId> {
    let r = a.propagation();
    (0..a.len()).filter(|&x| a.space().margin(x) >= r).collect()
}

/// `ν` of `A` restricted to interior columns outside `B(center; ρ)`, for
/// each exclusion radius `ρ`.
pub fn essential_nu(a: &BandOperator, radii: &[Dist], p: f64) -> Result<Vec<(Dist, NuReport)>> {
    let interior = interior_columns(a);
    let space = a.space();
    let c = space.center();
    radii
        .par_iter()
        .map(|&rho| {
            let cols: Vec<PointId> = interior.iter().copied().filter(|&x| space.dist(c, x) > rho).collect();
            if cols.is_empty() {
                return Err(Error::ExclusionExhausts { radius: rho });
            }
            Ok((rho, nu(a, &cols, p)?))
        })
        .collect()
}
