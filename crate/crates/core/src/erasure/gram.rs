use nalgebra::DMatrix;

use super::{solve_rejected, Construction, ErasureSet};
use crate::error::{Error, Result};
use crate::frame::{DualPair, Tolerances};
use crate::linalg::singular_extremes;
use crate::scalar::Scalar;

/// The `k x k` matrix `A[i][j] = <z_{E[j]}, x_{E[i]}> - delta_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErasureGram<T: Scalar> {
    pub matrix: DMatrix<T>,
    /// `sigma_max / sigma_min`; infinite when `A` is exactly singular.
    pub condition_estimate: f64,
}

impl<T: Scalar> ErasureGram<T> {
    /// `sigma_min / sigma_max`, zero for the zero matrix.
    pub fn relative_sigma_min(&self) -> f64 {
        if self.condition_estimate.is_finite() {
            self.condition_estimate.recip()
        } else {
            0.0
        }
    }
}

pub fn erasure_gram<T: Scalar>(pair: &DualPair<T>, erasure: &ErasureSet) -> Result<ErasureGram<T>> {
    if pair.frame().count() != erasure.count() {
        return Err(Error::DimensionMismatch {
            expected: pair.frame().count(),
            found: erasure.count(),
        });
    }
    let xe = pair.frame().select(erasure.erased());
    let ze = pair.dual().select_columns(erasure.erased());
    Ok(gram_from(&xe, &ze))
}

fn gram_from<T: Scalar>(xe: &DMatrix<T>, ze: &DMatrix<T>) -> ErasureGram<T> {
    // (X_E^H Z_E)[i][j] = sum_l conj(x_i[l]) z_j[l] = <z_j, x_i>
    let mut matrix = xe.ad_mul(ze);
    for i in 0..matrix.nrows() {
        matrix[(i, i)] -= T::one();
    }
    let (lo, hi) = singular_extremes(&matrix);
    let condition_estimate = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    ErasureGram {
        matrix,
        condition_estimate,
    }
}

/// Solves `A alpha = [<z_n, x_i>]_{i in E, n in E^c}` in one factorization
/// and forms `V = Z_{E^c} - Z_E alpha`.
pub(super) fn construct<T: Scalar>(
    pair: &DualPair<T>,
    erasure: &ErasureSet,
    tol: &Tolerances,
) -> Result<Construction<T>> {
    let xe = pair.frame().select(erasure.erased());
    let ze = pair.dual().select_columns(erasure.erased());
    let zc = pair.dual().select_columns(erasure.complement());

    let gram = gram_from(&xe, &ze);
    let singular = || Error::SingularGram {
        relative_sigma_min: gram.relative_sigma_min(),
    };
    if gram.relative_sigma_min() <= tol.singular {
        return Err(singular());
    }
    let rhs = xe.ad_mul(&zc);
    let alpha = gram.matrix.clone().lu().solve(&rhs).ok_or_else(singular)?;
    if solve_rejected(&gram.matrix, &alpha, &rhs, tol.residual) {
        return Err(singular());
    }
    let vectors = zc - ze * alpha;
    Ok(Construction {
        vectors,
        steps: Vec::new(),
        condition_estimate: Some(gram.condition_estimate),
    })
}
