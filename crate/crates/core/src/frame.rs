//! Dense finite frames, their analysis/synthesis/frame operators, and dual
//! frames.
//!
//! A frame for an `r`-dimensional space is stored as an `r x N` matrix whose
//! column `n` is the element `x_n`. With the inner product
//! `<u, v> = sum_i u_i conj(v_i)`, the analysis operator is `X^H`, synthesis
//! is `X`, and the frame operator is `S = X X^H`. A matrix `Z` of the same
//! shape is a dual of `X` exactly when `Z X^H = I`.

use nalgebra::{ComplexField, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, numerical_rank, spectral_norm};
use crate::scalar::{real, to_f64, Scalar};

/// Numerical thresholds used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative singular value cutoff for numerical rank.
    pub rank: f64,
    /// Absolute bound on `||Z X^H - I||_2` for a matrix to count as a dual.
    pub duality: f64,
    /// Absolute bound below which an iterative denominator counts as zero.
    pub denominator: f64,
    /// Condition estimate above which a warning is attached.
    pub condition: f64,
    /// Relative singular value below which a Gram matrix or operator is singular.
    pub singular: f64,
    /// Relative backward error above which a linear solve is rejected.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-10,
            duality: 1e-9,
            denominator: 1e-12,
            condition: 1e12,
            singular: 1e-12,
            residual: 1e-6,
        }
    }
}

/// Non-fatal diagnostics attached to a result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Warning {
    IllConditioned { estimate: f64, limit: f64 },
    ConditionExceeded { estimate: f64, limit: f64 },
    ResidualAboveTolerance { residual: f64, tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T: Scalar> {
    elements: DMatrix<T>,
}

impl<T: Scalar> Frame<T> {
    /// Validates `matrix` as a frame: at least as many columns as rows, all
    /// entries finite, and numerical rank equal to the row count.
    pub fn new(matrix: DMatrix<T>, rank_tol: f64) -> Result<Self> {
        let (dim, count) = matrix.shape();
        if dim == 0 || count == 0 {
            return Err(Error::BadShape(format!("empty {dim}x{count} matrix")));
        }
        if count < dim {
            return Err(Error::BadShape(format!(
                "{count} elements cannot span a space of dimension {dim}"
            )));
        }
        if !all_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let rank = numerical_rank(&matrix, rank_tol);
        if rank < dim {
            return Err(Error::NotAFrame { rank, dim });
        }
        Ok(Self { elements: matrix })
    }

    /// A frame with standard normal entries.
    pub fn random(dim: usize, count: usize, seed: u64, rank_tol: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(random_matrix(dim, count, &mut rng), rank_tol)
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn count(&self) -> usize {
        self.elements.ncols()
    }

    pub fn elements(&self) -> &DMatrix<T> {
        &self.elements
    }

    pub fn into_elements(self) -> DMatrix<T> {
        self.elements
    }

    /// The `r x |indices|` matrix of the selected elements, in the given order.
    pub fn select(&self, indices: &[usize]) -> DMatrix<T> {
        self.elements.select_columns(indices)
    }

    /// `(<h, x_n>)_n`.
    pub fn analysis(&self, h: &DVector<T>) -> Result<DVector<T>> {
        check_len(self.dim(), h.len())?;
        Ok(self.elements.ad_mul(h))
    }

    /// `sum_n c_n x_n`.
    pub fn synthesis(&self, coeffs: &DVector<T>) -> Result<DVector<T>> {
        check_len(self.count(), coeffs.len())?;
        Ok(&self.elements * coeffs)
    }

    /// `S = X X^H`, Hermitian positive definite for a frame.
    pub fn frame_operator(&self) -> DMatrix<T> {
        &self.elements * self.elements.adjoint()
    }

    /// Optimal frame bounds: the extreme eigenvalues of the frame operator.
    pub fn bounds(&self) -> FrameBounds {
        let eig = self.frame_operator().symmetric_eigenvalues();
        let (lower, upper) = eig
            .iter()
            .map(|&l| to_f64::<T>(l))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
                (lo.min(l), hi.max(l))
            });
        FrameBounds { lower, upper }
    }
}

/// Optimal lower and upper frame bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    pub fn is_tight(&self, tol: f64) -> bool {
        self.upper - self.lower <= tol * self.upper
    }
}

/// A frame together with a verified dual.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPair<T: Scalar> {
    frame: Frame<T>,
    dual: DMatrix<T>,
    is_canonical: bool,
    duality_residual: f64,
    warnings: Vec<Warning>,
}

impl<T: Scalar> DualPair<T> {
    /// Pairs `frame` with `dual` after checking `||Z X^H - I||_2 <= tol.duality`.
    /// The result is never flagged canonical.
    pub fn new(frame: Frame<T>, dual: DMatrix<T>, tol: &Tolerances) -> Result<Self> {
        if dual.shape() != frame.elements.shape() {
            return Err(Error::BadShape(format!(
                "dual is {}x{}, frame is {}x{}",
                dual.nrows(),
                dual.ncols(),
                frame.dim(),
                frame.count()
            )));
        }
        if !all_finite(&dual) {
            return Err(Error::NonFinite);
        }
        let residual = full_duality_error(&frame, &dual);
        if !(residual <= tol.duality) {
            return Err(Error::NotADual {
                residual,
                tolerance: tol.duality,
            });
        }
        Ok(Self {
            frame,
            dual,
            is_canonical: false,
            duality_residual: residual,
            warnings: Vec::new(),
        })
    }

    pub fn frame(&self) -> &Frame<T> {
        &self.frame
    }

    pub fn dual(&self) -> &DMatrix<T> {
        &self.dual
    }

    pub fn is_canonical(&self) -> bool {
        self.is_canonical
    }

    pub fn duality_residual(&self) -> f64 {
        self.duality_residual
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }
}

pub fn make_frame<T: Scalar>(matrix: DMatrix<T>, rank_tol: f64) -> Result<Frame<T>> {
    Frame::new(matrix, rank_tol)
}

/// `||V X_I^H - I||_2`, where `X_I` holds the frame elements at `indices`
/// and column `j` of `v` is the dual element paired with `indices[j]`.
pub fn duality_error<T: Scalar>(
    frame: &Frame<T>,
    v: &DMatrix<T>,
    indices: &[usize],
) -> Result<f64> {
    check_len(frame.dim(), v.nrows())?;
    check_len(indices.len(), v.ncols())?;
    if let Some(&bad) = indices.iter().find(|&&i| i >= frame.count()) {
        return Err(Error::BadShape(format!(
            "index {bad} out of range for a frame with {} elements",
            frame.count()
        )));
    }
    let sub = frame.select(indices);
    Ok(identity_defect(v * sub.adjoint()))
}

fn full_duality_error<T: Scalar>(frame: &Frame<T>, dual: &DMatrix<T>) -> f64 {
    identity_defect(dual * frame.elements.adjoint())
}

fn identity_defect<T: Scalar>(mut m: DMatrix<T>) -> f64 {
    for i in 0..m.nrows() {
        m[(i, i)] -= T::one();
    }
    spectral_norm(&m)
}

/// The canonical dual `Y = S^{-1} X`, via a Cholesky solve of `S Y = X`.
pub fn canonical_dual<T: Scalar>(frame: &Frame<T>, tol: &Tolerances) -> Result<DualPair<T>> {
    let chol = frame.frame_operator().cholesky().ok_or_else(|| {
        Error::FactorizationFailed("frame operator is not positive definite".into())
    })?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag
        .iter()
        .map(|d| d.modulus_f64())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        });
    let estimate = (hi / lo).powi(2);
    let dual = chol.solve(frame.elements());

    let mut warnings = Vec::new();
    if !(estimate <= tol.condition) {
        warnings.push(Warning::IllConditioned {
            estimate,
            limit: tol.condition,
        });
    }
    Ok(finish_canonical(frame.clone(), dual, tol, warnings))
}

/// The canonical dual as the adjoint of the Moore-Penrose pseudoinverse of
/// the synthesis matrix, computed from an SVD.
pub fn pinv_dual<T: Scalar>(frame: &Frame<T>, tol: &Tolerances) -> DualPair<T> {
    let dual = pinv_adjoint(frame.elements());
    finish_canonical(frame.clone(), dual, tol, Vec::new())
}

fn finish_canonical<T: Scalar>(
    frame: Frame<T>,
    dual: DMatrix<T>,
    tol: &Tolerances,
    mut warnings: Vec<Warning>,
) -> DualPair<T> {
    let residual = full_duality_error(&frame, &dual);
    if !(residual <= tol.duality) {
        warnings.push(Warning::ResidualAboveTolerance {
            residual,
            tolerance: tol.duality,
        });
    }
    DualPair {
        frame,
        dual,
        is_canonical: true,
        duality_residual: residual,
        warnings,
    }
}

/// `(X^+)^H = U diag(1/sigma) V^H` for `X = U diag(sigma) V^H`. Singular
/// values at or below `max(r, N) * eps * sigma_max` are treated as zero.
pub(crate) fn pinv_adjoint<T: Scalar>(x: &DMatrix<T>) -> DMatrix<T> {
    let (r, n) = x.shape();
    let svd = x.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let mut v_t = svd.v_t.expect("right singular vectors requested");
    let top = svd
        .singular_values
        .iter()
        .map(|&s| to_f64::<T>(s))
        .fold(0.0, f64::max);
    let cutoff = r.max(n) as f64 * f64::EPSILON * top;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if to_f64::<T>(s) > cutoff {
            v_t.row_mut(i).scale_mut(s.recip());
        } else {
            v_t.row_mut(i).fill(T::zero());
        }
    }
    u * v_t
}

/// A non-canonical dual `Z = Y + W (I - P)`, where `P = X^H S^{-1} X` is the
/// projection onto the range of the analysis operator and `W` has standard
/// normal entries scaled by `spread`. Since `W P = (W X^H) Y`, the `N x N`
/// projection is never formed.
///
/// For a basis (`N = r`) and for `spread = 0` the canonical dual is returned
/// unchanged.
pub fn random_dual<T: Scalar>(
    pair: &DualPair<T>,
    seed: u64,
    spread: f64,
    tol: &Tolerances,
) -> Result<DualPair<T>> {
    if !pair.is_canonical {
        return Err(Error::NotCanonical);
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::Config(format!(
            "spread must be finite and nonnegative, got {spread}"
        )));
    }
    let frame = &pair.frame;
    let y = &pair.dual;
    let dual = if frame.count() == frame.dim() || spread == 0.0 {
        y.clone()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w: DMatrix<T> = random_matrix(frame.dim(), frame.count(), &mut rng);
        w *= T::from_real(real::<T>(spread));
        // W(I - P) with P built from an orthonormal basis of the range of
        // the analysis operator, so the residual does not scale with |W X^H|.
        let q = frame.elements.adjoint().qr().q();
        let wq = &w * &q;
        w -= wq * q.adjoint();
        w + y
    };
    DualPair::new(frame.clone(), dual, tol)
}

pub(crate) fn random_matrix<T: Scalar, R: rand::Rng>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<T> {
    // Column-major fill so the stream order matches storage order.
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = T::sample_normal(rng);
        }
    }
    m
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
