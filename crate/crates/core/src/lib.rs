//! Single-input state-feedback pole placement.
//!
//! Given `(A, b)` and a self-conjugate target spectrum, every `place_*`
//! function returns a gain `k` such that `A + b k^T` has the targets as
//! eigenvalues, together with [`Diagnostics`] computed by independent oracles.
//!
//! ```
//! use nalgebra::{dmatrix, dvector};
//! use polplace::{place_ackermann, Spectrum, StateSpace};
//!
//! let sys = StateSpace::new(dmatrix![0.0, 1.0; 0.0, 0.0], dvector![0.0, 1.0]).unwrap();
//! let gain = place_ackermann(&sys, &Spectrum::real(&[-1.0, -2.0])).unwrap();
//! assert!((gain.k[0] + 2.0).abs() < 1e-12 && (gain.k[1] + 3.0).abs() < 1e-12);
//! ```

// `!(x >= t)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod placement;
pub mod poly;
pub mod spectrum;
pub mod subspace;
pub mod verify;

pub use error::{ErrorClass, PlaceError, Result};
pub use linalg::{Matrix, Vector};
pub use num_complex::Complex64;
pub use placement::{
    place_ackermann, place_bass_gura, place_eigenpair, place_general, place_initial, Gain, Method, StateSpace,
};
pub use poly::Polynomial;
pub use spectrum::Spectrum;
pub use subspace::{place_partial, place_sequential, place_simon_mitter, AssignmentPlan, StepRecord};
pub use verify::{Diagnostics, Warning, WarningTag};
