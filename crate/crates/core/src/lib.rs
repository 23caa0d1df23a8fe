//! Dual frames that compensate for erased frame coefficients.
//!
//! A signal `h` is sent as its frame coefficients `<h, x_n>`. When the
//! coefficients at a set `E` are lost and the surviving elements still span,
//! `h` is recovered exactly from a dual of the reduced frame
//! `(x_n)_{n not in E}`. This crate builds such duals from a dual of the
//! full frame, either the canonical one or any other:
//!
//! * [`erasure::reduced_dual_iterative`]: `k` rank-one updates,
//! * [`erasure::reduced_dual_gram`]: one `k x k` solve,
//! * [`erasure::reduced_dual_operator`]: one `r x r` solve,
//!
//! and compares them against the SVD pseudo-inverse in [`bench`].
//!
//! All numerics are generic over [`Scalar`] (`f32`, `f64` and their complex
//! counterparts). The aliases below fix the common choices.
//!
//! ```
//! use frame_erasure::{canonical_dual, reduced_dual_gram, ErasureSet, Frame64, Tolerances};
//! use nalgebra::DMatrix;
//!
//! let tol = Tolerances::default();
//! let x = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
//! let pair = canonical_dual(&Frame64::new(x, tol.rank).unwrap(), &tol).unwrap();
//! let erased = ErasureSet::new(3, vec![0]).unwrap();
//! let reduced = reduced_dual_gram(&pair, &erased, &tol).unwrap();
//! assert!(reduced.duality_residual() < 1e-12);
//! ```

pub mod bench;
pub mod channel;
pub mod erasure;
pub mod error;
pub mod frame;
pub mod io;
pub mod linalg;
pub mod scalar;

pub use channel::{random_erasure, transmit, TransmissionReport, TransmissionStatus};
pub use erasure::{
    equivalence_check, mrc_check, reconstruct, reduced_dual, reduced_dual_gram,
    reduced_dual_iterative, reduced_dual_operator, ErasureSet, Method, ReducedDual,
};
pub use error::{Error, Result};
pub use frame::{
    canonical_dual, duality_error, make_frame, pinv_dual, random_dual, DualPair, Frame,
    FrameBounds, Tolerances, Warning,
};
pub use scalar::{Field, Scalar};

pub use nalgebra;
pub use num_complex::{Complex32, Complex64};

pub type Frame64 = Frame<f64>;
pub type Frame32 = Frame<f32>;
pub type FrameC64 = Frame<Complex64>;
pub type FrameC32 = Frame<Complex32>;

pub type DualPair64 = DualPair<f64>;
pub type DualPairC64 = DualPair<Complex64>;

pub type ReducedDual64 = ReducedDual<f64>;
pub type ReducedDualC64 = ReducedDual<Complex64>;
