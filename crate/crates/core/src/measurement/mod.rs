//! Diagnostic measurements and their fitters.

mod bsb;
pub mod lm;
mod readout;

pub use bsb::{
    fit_tails, sideband_rabi_frequencies, simulate_bsb, BsbCurve, BsbSettings, DecayEnvelope,
    FitTailsOptions, RabiScaling, TailReport, LAMB_DICKE_LEVEL_LIMIT,
};
pub use readout::{
    fit_nbar, readout_alphas, simulate_readout, thermal_fraction_nbar, FullReadoutModel,
    LambDickeOrder, NbarFit, ReadoutCurve, ReadoutModel, ReadoutSimulator, GAUSSIAN_WIDTH_CONSTANT,
};
