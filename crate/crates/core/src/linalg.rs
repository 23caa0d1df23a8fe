//! Small dense helpers shared by the frame and erasure code.

use nalgebra::{DMatrix, DVector};

use crate::scalar::{to_f64, Scalar};

/// `<u, v> = sum_i u_i conj(v_i)`: linear in `u`, conjugate-linear in `v`.
pub fn inner<T: Scalar>(u: &DVector<T>, v: &DVector<T>) -> T {
    v.dotc(u)
}

/// Singular values as `f64`, in the order nalgebra returns them.
pub fn singular_values<T: Scalar>(m: &DMatrix<T>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone()
        .singular_values()
        .iter()
        .map(|&s| to_f64::<T>(s))
        .collect()
}

/// Largest singular value.
pub fn spectral_norm<T: Scalar>(m: &DMatrix<T>) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// `(sigma_min, sigma_max)` of a nonempty matrix.
pub fn singular_extremes<T: Scalar>(m: &DMatrix<T>) -> (f64, f64) {
    singular_values(m)
        .into_iter()
        .fold((f64::INFINITY, 0.0), |(lo, hi), s| (lo.min(s), hi.max(s)))
}

/// Number of singular values strictly above `rel_tol * sigma_max`.
pub fn numerical_rank<T: Scalar>(m: &DMatrix<T>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Largest columnwise relative difference
/// `max_n |a_n - b_n| / max(|a_n|, |b_n|)`, with `0/0 = 0`.
pub fn max_column_rel_diff<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "column comparison needs equal shapes");
    a.column_iter()
        .zip(b.column_iter())
        .map(|(ca, cb)| {
            let diff = to_f64::<T>((ca - cb).norm());
            let scale = to_f64::<T>(ca.norm()).max(to_f64::<T>(cb.norm()));
            if diff == 0.0 {
                0.0
            } else {
                diff / scale
            }
        })
        .fold(0.0, f64::max)
}

pub fn all_finite<T: Scalar>(m: &DMatrix<T>) -> bool {
    m.iter().all(|x| {
        let (re, im) = x.parts();
        re.is_finite() && im.is_finite()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn inner_product_conjugates_second_slot() {
        let u = DVector::from_vec(vec![Complex64::new(0.0, 1.0)]);
        let v = DVector::from_vec(vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(inner(&u, &v), Complex64::new(0.0, 1.0));
        assert_eq!(inner(&v, &u), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn rank_and_norm_of_small_matrices() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(numerical_rank(&m, 1e-10), 2);
        let c = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(numerical_rank(&c, 1e-10), 1);
        assert_eq!(numerical_rank(&DMatrix::<f64>::zeros(2, 2), 1e-10), 0);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -5.0]));
        assert!((spectral_norm(&d) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn column_difference_is_relative() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 100.0]);
        let b = DMatrix::from_row_slice(1, 2, &[1.0, 101.0]);
        assert!((max_column_rel_diff(&a, &b) - 1.0 / 101.0).abs() < 1e-15);
        assert_eq!(
            max_column_rel_diff(&DMatrix::<f64>::zeros(2, 2), &DMatrix::zeros(2, 2)),
            0.0
        );
    }
}
