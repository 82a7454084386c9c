//! Jacobi diffusion toolkit: transition densities by several independent
//! analytic routes, path simulation of Jacobi and squared Bessel processes,
//! drift estimators computed from paths, and the large-deviation rate
//! functions of those estimators together with Monte Carlo checks.

// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod params;
pub mod quad;
pub mod specfun;
pub mod levy;
pub mod semigroup;
pub mod sim;
pub mod inference;
pub mod ldp;
pub mod harness;
pub mod verify;

pub use error::{Error, Result};
pub use params::{JacobiParams, SeriesControl};
