//! Erasure sets and duals of the reduced frame `(x_n)_{n in E^c}`.
//!
//! Three constructions start from a dual `Z` of the full frame:
//!
//! * [`Method::Iterative`]: one rank-one update of the surviving dual
//!   elements per erased index, dividing by `1 - <v_e, x_e>`.
//! * [`Method::GramSolve`]: one `k x k` solve against
//!   `A = [<z_j, x_i>]_{i,j in E} - I` with all `N - k` right-hand sides
//!   batched, then `v_n = z_n - sum_i alpha_{ni} z_i`.
//! * [`Method::OperatorInverse`]: `v_n = (I - sum_{i in E} z_i x_i^H)^{-1} z_n`
//!   with the `r x r` operator materialized and LU-solved.
//!
//! Starting from the canonical dual all three give the canonical dual of the
//! reduced frame whenever the surviving elements span. From an arbitrary dual
//! they may break down (a vanishing denominator, a singular `A`, a singular
//! operator); when the iterative route goes through, the other two do as
//! well and all three coincide.

mod equivalence;
mod gram;
mod iterative;
mod operator;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{duality_error, DualPair, Frame, Tolerances, Warning};
use crate::linalg::numerical_rank;
use crate::scalar::Scalar;

pub use equivalence::{equivalence_check, EquivalenceReport, MethodOutcome, PairwiseDifference};
pub use gram::{erasure_gram, ErasureGram};
pub use iterative::IterativeReduction;

/// Indices of lost coefficients, 0-based, in traversal order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasureSet {
    count: usize,
    erased: Vec<usize>,
    complement: Vec<usize>,
}

impl ErasureSet {
    /// `erased` must be nonempty, duplicate free, and a proper subset of
    /// `0..count`. Its order is the order the iterative method visits.
    pub fn new(count: usize, erased: Vec<usize>) -> Result<Self> {
        if erased.is_empty() {
            return Err(Error::InvalidErasure("erasure set is empty".into()));
        }
        let mut hit = vec![false; count];
        for &i in &erased {
            if i >= count {
                return Err(Error::InvalidErasure(format!(
                    "index {} out of range 1..={count}",
                    i + 1
                )));
            }
            if std::mem::replace(&mut hit[i], true) {
                return Err(Error::InvalidErasure(format!("index {} repeated", i + 1)));
            }
        }
        if erased.len() >= count {
            return Err(Error::InvalidErasure(
                "cannot erase every frame element".into(),
            ));
        }
        let complement = (0..count).filter(|&i| !hit[i]).collect();
        Ok(Self {
            count,
            erased,
            complement,
        })
    }

    /// Same as [`ErasureSet::new`] with 1-based indices.
    pub fn from_one_based(count: usize, erased: &[usize]) -> Result<Self> {
        let zero_based = erased
            .iter()
            .map(|&i| {
                i.checked_sub(1)
                    .ok_or_else(|| Error::InvalidErasure("indices are 1-based; got 0".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(count, zero_based)
    }

    /// Parses a comma separated list of 1-based indices such as `"1,4,7"`.
    pub fn parse_one_based(count: usize, text: &str) -> Result<Self> {
        let indices = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::InvalidErasure(format!("`{s}` is not an index")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_one_based(count, &indices)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn k(&self) -> usize {
        self.erased.len()
    }

    pub fn erased(&self) -> &[usize] {
        &self.erased
    }

    /// Surviving indices in ascending order.
    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.erased.iter().map(|i| i + 1).collect()
    }

    /// The first `j` erased indices (`E_j`), `1 <= j <= k`.
    pub fn prefix(&self, j: usize) -> Result<Self> {
        if j == 0 || j > self.k() {
            return Err(Error::InvalidErasure(format!(
                "prefix length {j} outside 1..={}",
                self.k()
            )));
        }
        Self::new(self.count, self.erased[..j].to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Iterative,
    #[serde(rename = "gram")]
    GramSolve,
    #[serde(rename = "operator")]
    OperatorInverse,
}

impl Method {
    pub const ALL: [Method; 3] = [
        Method::Iterative,
        Method::GramSolve,
        Method::OperatorInverse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Iterative => "iterative",
            Method::GramSolve => "gram",
            Method::OperatorInverse => "operator",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iter" | "iterative" => Ok(Method::Iterative),
            "gram" => Ok(Method::GramSolve),
            "op" | "operator" => Ok(Method::OperatorInverse),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Output of a construction before verification: the reduced dual vectors
/// in complement order plus construction diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction<T: Scalar> {
    pub vectors: DMatrix<T>,
    /// Iterative denominators `1 - <v_e, x_e>`, one per step.
    pub steps: Vec<T>,
    pub condition_estimate: Option<f64>,
}

/// A verified dual of the reduced frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDual<T: Scalar> {
    erased: Vec<usize>,
    indices: Vec<usize>,
    vectors: DMatrix<T>,
    method: Method,
    steps: Vec<T>,
    duality_residual: f64,
    condition_estimate: Option<f64>,
    warnings: Vec<Warning>,
}

impl<T: Scalar> ReducedDual<T> {
    /// Verifies a raw construction against the reduced frame.
    pub fn verify(
        frame: &Frame<T>,
        erasure: &ErasureSet,
        method: Method,
        construction: Construction<T>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let residual = duality_error(frame, &construction.vectors, erasure.complement())?;
        let mut warnings = Vec::new();
        if let Some(estimate) = construction.condition_estimate {
            if !(estimate <= tol.condition) {
                warnings.push(Warning::ConditionExceeded {
                    estimate,
                    limit: tol.condition,
                });
            }
        }
        if !(residual <= tol.duality) {
            warnings.push(Warning::ResidualAboveTolerance {
                residual,
                tolerance: tol.duality,
            });
        }
        Ok(Self {
            erased: erasure.erased().to_vec(),
            indices: erasure.complement().to_vec(),
            vectors: construction.vectors,
            method,
            steps: construction.steps,
            duality_residual: residual,
            condition_estimate: construction.condition_estimate,
            warnings,
        })
    }

    /// Surviving indices; column `j` of [`ReducedDual::vectors`] pairs with `indices()[j]`.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn erased(&self) -> &[usize] {
        &self.erased
    }

    pub fn vectors(&self) -> &DMatrix<T> {
        &self.vectors
    }

    pub fn into_vectors(self) -> DMatrix<T> {
        self.vectors
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn steps(&self) -> &[T] {
        &self.steps
    }

    pub fn duality_residual(&self) -> f64 {
        self.duality_residual
    }

    pub fn condition_estimate(&self) -> Option<f64> {
        self.condition_estimate
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }
}

/// Whether the surviving elements still span the space.
pub fn mrc_check<T: Scalar>(frame: &Frame<T>, erasure: &ErasureSet, rank_tol: f64) -> Result<bool> {
    check_count(frame, erasure)?;
    if erasure.complement().len() < frame.dim() {
        return Ok(false);
    }
    let reduced = frame.select(erasure.complement());
    Ok(numerical_rank(&reduced, rank_tol) == frame.dim())
}

fn check_count<T: Scalar>(frame: &Frame<T>, erasure: &ErasureSet) -> Result<()> {
    if frame.count() != erasure.count() {
        return Err(Error::DimensionMismatch {
            expected: frame.count(),
            found: erasure.count(),
        });
    }
    Ok(())
}

fn require_mrc<T: Scalar>(
    pair: &DualPair<T>,
    erasure: &ErasureSet,
    tol: &Tolerances,
) -> Result<()> {
    if mrc_check(pair.frame(), erasure, tol.rank)? {
        Ok(())
    } else {
        Err(Error::MrcViolated)
    }
}

/// Runs one construction without the MRC check or verification.
pub fn construct<T: Scalar>(
    pair: &DualPair<T>,
    erasure: &ErasureSet,
    method: Method,
    tol: &Tolerances,
) -> Result<Construction<T>> {
    check_count(pair.frame(), erasure)?;
    match method {
        Method::Iterative => {
            let mut run = IterativeReduction::new(pair, erasure, tol.denominator)?;
            while run.step()? {}
            Ok(run.finish())
        }
        Method::GramSolve => gram::construct(pair, erasure, tol),
        Method::OperatorInverse => operator::construct(pair, erasure, tol),
    }
}

/// Checks the MRC, constructs with `method`, and verifies the result.
pub fn reduced_dual<T: Scalar>(
    pair: &DualPair<T>,
    erasure: &ErasureSet,
    method: Method,
    tol: &Tolerances,
) -> Result<ReducedDual<T>> {
    require_mrc(pair, erasure, tol)?;
    let built = construct(pair, erasure, method, tol)?;
    ReducedDual::verify(pair.frame(), erasure, method, built, tol)
}

pub fn reduced_dual_iterative<T: Scalar>(
    pair: &DualPair<T>,
    erasure: &ErasureSet,
    tol: &Tolerances,
) -> Result<ReducedDual<T>> {
    reduced_dual(pair, erasure, Method::Iterative, tol)
}

pub fn reduced_dual_gram<T: Scalar>(
    pair: &DualPair<T>,
    erasure: &ErasureSet,
    tol: &Tolerances,
) -> Result<ReducedDual<T>> {
    reduced_dual(pair, erasure, Method::GramSolve, tol)
}

pub fn reduced_dual_operator<T: Scalar>(
    pair: &DualPair<T>,
    erasure: &ErasureSet,
    tol: &Tolerances,
) -> Result<ReducedDual<T>> {
    reduced_dual(pair, erasure, Method::OperatorInverse, tol)
}

/// `sum_{n in E^c} coeffs[n] v_n`; erased entries of `coeffs` are ignored.
pub fn reconstruct<T: Scalar>(
    reduced: &ReducedDual<T>,
    frame: &Frame<T>,
    coeffs: &DVector<T>,
) -> Result<DVector<T>> {
    if coeffs.len() != frame.count() {
        return Err(Error::DimensionMismatch {
            expected: frame.count(),
            found: coeffs.len(),
        });
    }
    if reduced.vectors.nrows() != frame.dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.dim(),
            found: reduced.vectors.nrows(),
        });
    }
    if reduced.indices.iter().any(|&i| i >= frame.count()) {
        return Err(Error::BadShape(
            "reduced dual indices exceed the frame size".into(),
        ));
    }
    let kept = DVector::from_iterator(
        reduced.indices.len(),
        reduced.indices.iter().map(|&i| coeffs[i]),
    );
    Ok(&reduced.vectors * kept)
}

/// Guards a `k x k` or `r x r` solve: rejects when the relative backward
/// error `|A X - B| / (|A| |X| + |B|)` exceeds `limit`.
pub(crate) fn solve_rejected<T: Scalar>(
    a: &DMatrix<T>,
    x: &DMatrix<T>,
    b: &DMatrix<T>,
    limit: f64,
) -> bool {
    let residual = crate::scalar::to_f64::<T>((a * x - b).norm());
    let scale = crate::scalar::to_f64::<T>(a.norm()) * crate::scalar::to_f64::<T>(x.norm())
        + crate::scalar::to_f64::<T>(b.norm());
    !residual.is_finite() || (scale > 0.0 && residual > limit * scale)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// `(e1, e1, e2)` with its canonical dual.
    pub fn small_pair() -> DualPair<f64> {
        let x = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        crate::frame::canonical_dual(&Frame::new(x, 1e-10).unwrap(), &Tolerances::default())
            .unwrap()
    }

    /// `X = (e1, e1, e1, e2, .., e_r)` with the dual `(e1, -e1/2, e1/2, e2, .., e_r)`.
    pub fn collinear_triple(r: usize) -> DualPair<f64> {
        let n = r + 2;
        let mut x = DMatrix::zeros(r, n);
        let mut z = DMatrix::zeros(r, n);
        for (j, w) in [1.0, -0.5, 0.5].into_iter().enumerate() {
            x[(0, j)] = 1.0;
            z[(0, j)] = w;
        }
        for i in 1..r {
            x[(i, i + 2)] = 1.0;
            z[(i, i + 2)] = 1.0;
        }
        DualPair::new(Frame::new(x, 1e-10).unwrap(), z, &Tolerances::default()).unwrap()
    }
}
