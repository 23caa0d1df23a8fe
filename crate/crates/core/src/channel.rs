//! Encode, erase, reconstruct: a transmission over a channel that loses
//! frame coefficients.

use nalgebra::DVector;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::erasure::{construct, mrc_check, reconstruct, ErasureSet, Method, ReducedDual};
use crate::error::{Error, Result};
use crate::frame::{random_matrix, DualPair, Tolerances};
use crate::scalar::{to_f64, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum TransmissionStatus {
    Recovered,
    MrcViolated,
    ConstructionFailed { failure: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionReport {
    pub signal_norm: f64,
    /// 1-based erased indices.
    pub erased: Vec<usize>,
    pub method: Method,
    pub recon_error_rel: Option<f64>,
    pub mrc_ok: bool,
    #[serde(flatten)]
    pub status: TransmissionStatus,
}

impl TransmissionReport {
    pub fn recovered(&self) -> bool {
        self.status == TransmissionStatus::Recovered
    }
}

/// Sends `h` as its frame coefficients, drops the entries at `erasure`, and
/// reconstructs from the survivors with a reduced dual built by `method`.
///
/// Only a signal of the wrong length is an error; MRC violations and
/// construction failures are reported in the status.
pub fn transmit<T: Scalar>(
    pair: &DualPair<T>,
    erasure: &ErasureSet,
    h: &DVector<T>,
    method: Method,
    tol: &Tolerances,
) -> Result<TransmissionReport> {
    let frame = pair.frame();
    let mut coeffs = frame.analysis(h)?;
    for &i in erasure.erased() {
        coeffs[i] = T::zero();
    }
    let signal_norm = to_f64::<T>(h.norm());
    let mut report = TransmissionReport {
        signal_norm,
        erased: erasure.one_based(),
        method,
        recon_error_rel: None,
        mrc_ok: mrc_check(frame, erasure, tol.rank)?,
        status: TransmissionStatus::MrcViolated,
    };
    if !report.mrc_ok {
        return Ok(report);
    }
    let built = construct(pair, erasure, method, tol)
        .and_then(|c| ReducedDual::verify(frame, erasure, method, c, tol));
    let reduced = match built {
        Ok(reduced) => reduced,
        Err(err) if err.is_construction_failure() => {
            report.status = TransmissionStatus::ConstructionFailed {
                failure: err.kind().to_string(),
                reason: err.to_string(),
            };
            return Ok(report);
        }
        Err(err) => return Err(err),
    };
    let estimate = reconstruct(&reduced, frame, &coeffs)?;
    let error = to_f64::<T>((estimate - h).norm());
    report.recon_error_rel = Some(if signal_norm > 0.0 {
        error / signal_norm
    } else {
        error
    });
    report.status = TransmissionStatus::Recovered;
    Ok(report)
}

/// A uniformly random `k`-subset of `0..n`, ascending, determined by `seed`.
pub fn random_erasure(n: usize, k: usize, seed: u64) -> Result<ErasureSet> {
    if k == 0 || k >= n {
        return Err(Error::BadK { n, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut erased = index::sample(&mut rng, n, k).into_vec();
    erased.sort_unstable();
    ErasureSet::new(n, erased)
}

/// A standard normal signal of length `dim`.
pub fn random_signal<T: Scalar>(dim: usize, seed: u64) -> DVector<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_matrix::<T, _>(dim, 1, &mut rng)
        .column(0)
        .into_owned()
}

/// `trials` transmissions, each with its own random erasure of size `k` and
/// random signal. Trial `t` uses seeds derived from `seed + t`.
pub fn transmit_batch<T: Scalar>(
    pair: &DualPair<T>,
    k: usize,
    trials: usize,
    seed: u64,
    method: Method,
    tol: &Tolerances,
) -> Result<Vec<TransmissionReport>> {
    (0..trials as u64)
        .map(|t| {
            let trial_seed = seed.wrapping_add(t);
            let erasure = random_erasure(pair.frame().count(), k, trial_seed)?;
            let h = random_signal::<T>(pair.frame().dim(), trial_seed ^ 0x5eed_5157);
            transmit(pair, &erasure, &h, method, tol)
        })
        .collect()
}
