use std::f64::consts::PI;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    repump_in, sample_radial_rabi_scale, DriveConfig, NoiseConfig, Pauli, Propagator, PulseContext,
    RadialModes,
};
use crate::measurement::{thermal_fraction_nbar, LambDickeOrder};
use crate::oscillator::{FockSpace, FockState, QuadratureBasis, ThermalSpec, C64};
use crate::protocol::{NbarEstimator, RoundOrder, RoundSettings, ScheduleOptions};
use crate::semiclassical::RoundParams;
use crate::stats::{bootstrap_mean_ci, keyed_rng, mean};
use crate::{Error, Result};

/// Everything besides the initial state that defines a simulated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSetup {
    /// Parameter policy, estimator and contraction order. `closed_loop`
    /// makes each trajectory pick its parameters from its own estimate.
    pub schedule: ScheduleOptions,
    pub noise: NoiseConfig,
    pub radial: RadialModes,
    /// Axial trap frequency in rad/s (sets the radial temperatures).
    pub axial_omega: f64,
    /// Carrier Rabi frequency in rad/s.
    pub rabi: f64,
    pub lamb_dicke: f64,
    pub drive_order: LambDickeOrder,
    /// Duration of each spin reset in s.
    pub repump_duration: f64,
    pub bootstrap: usize,
}

impl Default for ExperimentSetup {
    fn default() -> Self {
        let lamb_dicke = 0.05;
        Self {
            schedule: ScheduleOptions::default(),
            noise: NoiseConfig::default(),
            radial: RadialModes::default(),
            axial_omega: 2.0 * PI * 1.7e6,
            rabi: 2.0 * PI * 10e3 / lamb_dicke,
            lamb_dicke,
            drive_order: LambDickeOrder::Leading,
            repump_duration: 20e-6,
            bootstrap: 1000,
        }
    }
}

impl ExperimentSetup {
    /// No noise, no spectator modes and a leading-order drive: the
    /// simulation then reduces to the ideal Kraus-map schedule.
    pub fn ideal() -> Self {
        Self {
            noise: NoiseConfig::none(),
            radial: RadialModes::none(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        self.radial.validate()?;
        if !(self.rabi > 0.0 && self.lamb_dicke > 0.0 && self.axial_omega > 0.0) {
            return Err(Error::invalid(
                "rabi, lamb_dicke and axial_omega must be positive",
            ));
        }
        if !(self.repump_duration >= 0.0) {
            return Err(Error::invalid("repump duration must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyRow {
    pub round: usize,
    pub nbar_mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyResult {
    pub rows: Vec<NoisyRow>,
    /// `trajectories[i][r]` is the estimate of trajectory `i` after round `r`.
    pub trajectories: Vec<Vec<f64>>,
}

/// Static draws of one trajectory.
struct Draws {
    nbar: f64,
    ctx: PulseContext,
}

fn draw_static(
    initial: &ThermalSpec,
    setup: &ExperimentSetup,
    seed: u64,
    index: u64,
) -> Result<Draws> {
    let mut rng = keyed_rng(seed, index, 0);
    let noise = &setup.noise;
    let normal = |sd: f64| Normal::new(0.0, sd).map_err(|e| Error::invalid(e.to_string()));
    let cap = initial.nbar() + 3.0 * noise.nbar_sd;
    let nbar = (initial.nbar() + normal(noise.nbar_sd)?.sample(&mut rng)).clamp(0.0, cap);
    let radial = setup.radial.at_equal_temperature(nbar, setup.axial_omega);
    let rabi_scale = (1.0 + normal(noise.rabi_sd)?.sample(&mut rng))
        * sample_radial_rabi_scale(&radial, &mut rng);
    let axial_offset = 2.0 * PI * normal(noise.freq_jitter_sd)?.sample(&mut rng);
    let laser_detuning = 2.0 * PI * normal(noise.detuning_sd)?.sample(&mut rng);
    let period = 1.0 / super::MAINS_FREQUENCY;
    let time = rand::Rng::random::<f64>(&mut rng) * period;
    Ok(Draws {
        nbar,
        ctx: PulseContext {
            time,
            since_reset: 0.0,
            axial_offset,
            laser_detuning,
            rabi_scale,
        },
    })
}

/// The pulse list of one round: measure, correct, reset, for each quadrature.
fn round_pulses(settings: &RoundSettings, order: RoundOrder) -> [(C64, Pauli); 4] {
    let pos = |p: &RoundParams| {
        [
            (C64::new(0.0, p.epsilon), Pauli::Y),
            (C64::new(p.alpha, 0.0), Pauli::X),
        ]
    };
    let mom = |p: &RoundParams| {
        [
            (C64::new(p.epsilon, 0.0), Pauli::Y),
            (C64::new(0.0, -p.alpha), Pauli::X),
        ]
    };
    let (a, b) = match order {
        RoundOrder::PositionFirst => (pos(&settings.position), mom(&settings.momentum)),
        RoundOrder::MomentumFirst => (mom(&settings.momentum), pos(&settings.position)),
    };
    [a[0], a[1], b[0], b[1]]
}

struct Shared<'a> {
    setup: &'a ExperimentSetup,
    propagator: Propagator,
    position_basis: QuadratureBasis,
    space: FockSpace,
    /// Per-round settings for open-loop runs.
    planned: Vec<(RoundSettings, ThermalSpec)>,
}

fn run_trajectory(
    initial: &ThermalSpec,
    rounds: usize,
    shared: &Shared,
    seed: u64,
    index: u64,
) -> Result<Vec<f64>> {
    let setup = shared.setup;
    let draws = draw_static(initial, setup, seed, index)?;
    let mut ctx = draws.ctx;
    let dim = shared.space.dim();
    let mut state = FockState::thermal(&ThermalSpec::new(draws.nbar)?, dim)?.with_spin_up();
    let policy = &setup.schedule.policy;
    let mut estimate = draws.nbar;
    let mut series = vec![draws.nbar];
    for r in 0..rounds {
        let (settings, assumed) = if setup.schedule.closed_loop {
            let assumed = ThermalSpec::new(estimate.max(0.0))?;
            (policy.settings(r, &assumed)?, assumed)
        } else {
            shared.planned[r]
        };
        let mut rng = keyed_rng(seed, index, 1 + r as u64);
        for (k, (gamma, pauli)) in round_pulses(&settings, setup.schedule.order)
            .into_iter()
            .enumerate()
        {
            if gamma.norm() > 0.0 {
                let drive =
                    DriveConfig::for_displacement(gamma, pauli, setup.rabi, setup.lamb_dicke)?;
                state = shared.propagator.evolve_pulse(&state, &drive, &mut ctx)?;
            }
            if k % 2 == 1 {
                state = shared
                    .propagator
                    .evolve_free(&state, setup.repump_duration, &mut ctx)?;
                state = repump_in(
                    &shared.position_basis,
                    &state,
                    &setup.noise.recoil,
                    &mut rng,
                )?;
                ctx.since_reset = 0.0;
            }
        }
        let osc = state.oscillator();
        let guess = estimate * policy.predicted_ratio(&settings, &assumed);
        estimate = match setup.schedule.estimator {
            NbarEstimator::Expectation => osc.mean_occupation(),
            NbarEstimator::ThermalFraction => thermal_fraction_nbar(&shared.space, &osc, guess)?,
        };
        series.push(estimate);
    }
    Ok(series)
}

/// Simulates `trajectories` independent runs of the full pulse and reset
/// sequence and aggregates the per-round occupation estimates.
///
/// Trajectory `i` draws from RNG streams keyed by `(seed, i, stage)`, so the
/// result does not depend on the thread count.
pub fn run_noisy_experiment(
    initial: &ThermalSpec,
    rounds: usize,
    setup: &ExperimentSetup,
    trajectories: usize,
    seed: u64,
) -> Result<NoisyResult> {
    if trajectories == 0 {
        return Err(Error::invalid("need at least one trajectory"));
    }
    setup.validate()?;
    let dim = match setup.schedule.dim {
        Some(d) => d,
        None => ScheduleOptions::default_dim(initial.nbar() + 3.0 * setup.noise.nbar_sd)?,
    };
    let mut planned = Vec::with_capacity(rounds);
    let mut analytic = initial.nbar();
    for r in 0..rounds {
        let assumed = ThermalSpec::new(analytic)?;
        let settings = setup.schedule.policy.settings(r, &assumed)?;
        analytic *= setup.schedule.policy.predicted_ratio(&settings, &assumed);
        planned.push((settings, assumed));
    }
    let shared = Shared {
        setup,
        propagator: Propagator::new(dim, setup.drive_order, setup.lamb_dicke, &setup.noise)?,
        position_basis: QuadratureBasis::bare(dim),
        space: FockSpace::new(dim)?,
        planned,
    };
    let series: Vec<Vec<f64>> = (0..trajectories as u64)
        .into_par_iter()
        .map(|i| run_trajectory(initial, rounds, &shared, seed, i))
        .collect::<Result<_>>()?;
    let rows = (0..=rounds)
        .map(|r| {
            let values: Vec<f64> = series.iter().map(|s| s[r]).collect();
            let (ci_low, ci_high) = if values.len() > 1 {
                bootstrap_mean_ci(
                    &values,
                    setup.bootstrap,
                    &mut keyed_rng(seed, u64::MAX, r as u64),
                )
            } else {
                (values[0], values[0])
            };
            NoisyRow {
                round: r,
                nbar_mean: mean(&values),
                ci_low,
                ci_high,
            }
        })
        .collect();
    Ok(NoisyResult {
        rows,
        trajectories: series,
    })
}
