//! Collective cavity-mediated cooling of many trapped particles.
//!
//! The crate integrates the semiclassical moment equations for the phonon,
//! photon and collective-dipole variables, predicts the exponential cooling
//! rates, and cross-checks both against exact small-scale quantum models:
//! Lindblad propagation on the Dicke ladder and the linear three-mode bosonic
//! covariance dynamics.
//!
//! Frequencies are plain `f64` values in one user-chosen unit (by convention
//! the cavity decay rate); times are in the reciprocal unit. `ħ = 1`.

// `!(v > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod integrator;
pub mod model;
pub mod moments;
pub mod quantum;

pub use error::{Error, Result};
pub use model::{check_regime, derive_couplings, DerivedCouplings, PhysicalParams, RegimeReport};
pub use moments::{MomentState, Scenario, ScenarioKind};
