//! Single-mode oscillator primitives in a truncated Fock basis.

mod displacement;
mod entropy;
mod quadrature;
mod state;
mod thermal;

pub use displacement::{displacement_element, DisplacementOperator};
pub use entropy::{
    achieved_round_factor, entropy_large_nbar, entropy_thermal, ideal_reduction_factor,
    optimality_gap, reset_entropy_budget,
};
pub use quadrature::{sideband_coupling, FockSpace, QuadratureBasis};
pub use state::{mean_energy, FockState, Moments};
pub use thermal::ThermalSpec;

pub type C64 = num_complex::Complex64;

/// Largest `|γ|²/dim` accepted when building a displacement.
pub const DISPLACEMENT_GUARD: f64 = 1.0 / 8.0;

/// Fraction of the highest Fock levels inspected by truncation-health checks.
pub const TAIL_FRACTION: f64 = 0.1;

/// Tail mass in [`TAIL_FRACTION`] of the top levels above which a state is
/// treated as badly truncated.
pub const TAIL_LIMIT: f64 = 1e-4;
