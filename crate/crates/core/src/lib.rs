//! Modular-variable laser cooling of a harmonic oscillator coupled to a
//! two-level spin.
//!
//! The crate is organised by physical layer:
//!
//! * [`oscillator`] - phase-space conventions, truncated Fock space,
//!   thermal states, displacement operators and entropy helpers.
//! * [`semiclassical`] - grid-based Bayesian update of one quadrature and the
//!   closed-form classical energy after a cooling round.
//! * [`protocol`] - the exact quantum round: Kraus operators, the
//!   characteristic-function calculus, the quantum energy formula, parameter
//!   optimisation and multi-round schedules.
//! * [`noise`] - density-matrix simulation of the pulse sequence with the
//!   experimental noise model.
//! * [`measurement`] - characteristic-function readout and blue-sideband
//!   models with their fitters.
//! * [`doppler`] - linearised Doppler-cooling theory and its mapping onto the
//!   modular-variable picture.
//! * [`cli`] - the batch front-end used by the `modcool` binary.
//!
//! Energies are dimensionless throughout, in units of `ħω`. Quadratures
//! follow `q = (a + a†)/2`, `p = (a − a†)/(2i)` so that `[q, p] = i/2` and
//! `H/ħω = q² + p²`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod doppler;
mod error;
pub mod measurement;
pub mod noise;
pub mod optimize;
pub mod oscillator;
pub mod protocol;
pub mod semiclassical;
pub mod special;
pub mod stats;

pub use error::{Error, ErrorClass, Result};
pub use oscillator::{DisplacementOperator, FockSpace, FockState, ThermalSpec, C64};

/// `(e − 1)/e`, the optimal per-round energy contraction in the large-n̄ limit.
pub const CONTRACTION_FACTOR: f64 = 1.0 - 1.0 / std::f64::consts::E;
