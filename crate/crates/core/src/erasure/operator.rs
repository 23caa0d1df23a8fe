use nalgebra::DMatrix;

use super::{solve_rejected, Construction, ErasureSet};
use crate::error::{Error, Result};
use crate::frame::{DualPair, Tolerances};
use crate::linalg::singular_extremes;
use crate::scalar::Scalar;

/// Materializes `T = I - sum_{i in E} z_i x_i^H` (so `T h = h - sum <h, x_i> z_i`)
/// and LU-solves `T V = Z_{E^c}`.
pub(super) fn construct<T: Scalar>(
    pair: &DualPair<T>,
    erasure: &ErasureSet,
    tol: &Tolerances,
) -> Result<Construction<T>> {
    let r = pair.frame().dim();
    let xe = pair.frame().select(erasure.erased());
    let ze = pair.dual().select_columns(erasure.erased());
    let zc = pair.dual().select_columns(erasure.complement());

    let op = DMatrix::<T>::identity(r, r) - ze * xe.adjoint();
    let (lo, hi) = singular_extremes(&op);
    let relative_sigma_min = if hi > 0.0 { lo / hi } else { 0.0 };
    let singular = || Error::SingularOperator { relative_sigma_min };
    if relative_sigma_min <= tol.singular {
        return Err(singular());
    }
    let vectors = op.clone().lu().solve(&zc).ok_or_else(singular)?;
    if solve_rejected(&op, &vectors, &zc, tol.residual) {
        return Err(singular());
    }
    Ok(Construction {
        vectors,
        steps: Vec::new(),
        condition_estimate: Some(hi / lo),
    })
}
