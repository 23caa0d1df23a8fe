use nalgebra::{DMatrix, DVector};

use super::{Construction, ErasureSet};
use crate::error::{Error, Result};
use crate::frame::{DualPair, Frame};
use crate::scalar::Scalar;

/// The step-by-step reduction. After `j` steps the surviving columns hold a
/// dual of `(x_n)_{n not in E_j}`, where `E_j` is the first `j` erased
/// indices; with a canonical starting dual it is the canonical dual.
///
/// Step `j` with `e = E[j]` computes `d = 1 - <v_e, x_e>`, then for every
/// surviving `n != e` applies `v_n += (<v_n, x_e> / d) v_e`.
#[derive(Debug, Clone)]
pub struct IterativeReduction<'a, T: Scalar> {
    frame: &'a Frame<T>,
    erasure: &'a ErasureSet,
    v: DMatrix<T>,
    removed: Vec<bool>,
    denominators: Vec<T>,
    denom_tol: f64,
}

impl<'a, T: Scalar> IterativeReduction<'a, T> {
    pub fn new(pair: &'a DualPair<T>, erasure: &'a ErasureSet, denom_tol: f64) -> Result<Self> {
        if pair.frame().count() != erasure.count() {
            return Err(Error::DimensionMismatch {
                expected: pair.frame().count(),
                found: erasure.count(),
            });
        }
        Ok(Self {
            frame: pair.frame(),
            erasure,
            v: pair.dual().clone(),
            removed: vec![false; erasure.count()],
            denominators: Vec::with_capacity(erasure.k()),
            denom_tol,
        })
    }

    pub fn steps_done(&self) -> usize {
        self.denominators.len()
    }

    pub fn is_done(&self) -> bool {
        self.steps_done() == self.erasure.k()
    }

    /// Removes the next erased index. Returns `Ok(false)` once all `k`
    /// steps have run.
    pub fn step(&mut self) -> Result<bool> {
        let j = self.steps_done();
        let Some(&e) = self.erasure.erased().get(j) else {
            return Ok(false);
        };
        let xe: DVector<T> = self.frame.elements().column(e).conjugate();
        // products[n] = sum_l v_n[l] conj(x_e[l]) = <v_n, x_e>
        let products = self.v.tr_mul(&xe);
        let denom = T::one() - products[e];
        let magnitude = denom.modulus_f64();
        if !(magnitude > self.denom_tol) {
            return Err(Error::DenominatorVanishes {
                step: j + 1,
                value: magnitude,
            });
        }
        let ve = self.v.column(e).clone_owned();
        self.removed[e] = true;
        for n in 0..self.v.ncols() {
            if self.removed[n] {
                continue;
            }
            let alpha = products[n] / denom;
            self.v.column_mut(n).axpy(alpha, &ve, T::one());
        }
        self.denominators.push(denom);
        Ok(true)
    }

    /// Denominators `1 - <v_e, x_e>` recorded so far.
    pub fn denominators(&self) -> &[T] {
        &self.denominators
    }

    /// The current family: surviving indices (ascending) and their vectors.
    pub fn current(&self) -> (Vec<usize>, DMatrix<T>) {
        let indices: Vec<usize> = (0..self.removed.len())
            .filter(|&n| !self.removed[n])
            .collect();
        let vectors = self.v.select_columns(&indices);
        (indices, vectors)
    }

    /// The surviving vectors in complement order. Meaningful once every
    /// step has run.
    pub fn finish(self) -> Construction<T> {
        Construction {
            vectors: self.v.select_columns(self.erasure.complement()),
            steps: self.denominators,
            condition_estimate: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erasure::fixtures::small_pair;
    use crate::frame::{canonical_dual, duality_error, random_dual, Tolerances};

    #[test]
    fn every_intermediate_family_is_a_dual() {
        let tol = Tolerances::default();
        let frame = Frame::<f64>::random(8, 14, 2, tol.rank).unwrap();
        let canonical = canonical_dual(&frame, &tol).unwrap();
        let random = random_dual(&canonical, 3, 1.0, &tol).unwrap();
        let e = ErasureSet::new(14, vec![13, 2, 7, 5]).unwrap();
        for pair in [&canonical, &random] {
            let mut run = IterativeReduction::new(pair, &e, tol.denominator).unwrap();
            while run.step().unwrap() {
                let (indices, v) = run.current();
                assert_eq!(indices.len(), 14 - run.steps_done());
                let err = duality_error(&frame, &v, &indices).unwrap();
                assert!(err <= 1e-9, "step {}: {err:e}", run.steps_done());
            }
            assert!(run.is_done());
            assert!(!run.step().unwrap());
        }
    }

    #[test]
    fn canonical_intermediates_are_canonical() {
        let tol = Tolerances::default();
        let frame = Frame::<f64>::random(6, 10, 9, tol.rank).unwrap();
        let pair = canonical_dual(&frame, &tol).unwrap();
        let e = ErasureSet::new(10, vec![1, 4, 8]).unwrap();
        let mut run = IterativeReduction::new(&pair, &e, tol.denominator).unwrap();
        while run.step().unwrap() {
            let (indices, v) = run.current();
            let sub = Frame::new(frame.select(&indices), tol.rank).unwrap();
            let oracle = crate::frame::pinv_dual(&sub, &tol);
            assert!(crate::linalg::max_column_rel_diff(&v, oracle.dual()) < 1e-10);
        }
    }

    #[test]
    fn denominator_recorded_per_step() {
        let pair = small_pair();
        let e = ErasureSet::new(3, vec![0]).unwrap();
        let mut run = IterativeReduction::new(&pair, &e, 1e-12).unwrap();
        assert!(run.step().unwrap());
        assert_eq!(run.denominators(), &[0.5]);
    }
}
