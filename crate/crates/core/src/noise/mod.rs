//! Open-system simulation of the pulse sequence with the experimental noise
//! model: spin and motional dephasing, heating, frequency noise, calibration
//! fluctuations, radial-mode Rabi modulation and reset recoil.

mod config;
mod experiment;
mod propagate;
mod radial;
mod repump;

pub use config::{
    DephasingKernel, EmissionPattern, MainsHarmonic, NoiseConfig, RecoilConfig, RecoilPhoton,
    MAINS_FREQUENCY, STEPS_PER_RATE,
};
pub use experiment::{run_noisy_experiment, ExperimentSetup, NoisyResult, NoisyRow};
pub use propagate::{DriveConfig, Pauli, Propagator, PulseContext};
pub use radial::{debye_waller, sample_radial_rabi_scale, RadialMode, RadialModes};
pub use repump::{repump, repump_in, sample_recoil_kicks};
