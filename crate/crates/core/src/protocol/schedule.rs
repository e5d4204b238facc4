use serde::{Deserialize, Serialize};

use super::{optimize_epsilon, quantum_energy, CoolingRound, RoundOrder};
use crate::measurement::thermal_fraction_nbar;
use crate::oscillator::{FockSpace, FockState, ThermalSpec};
use crate::semiclassical::{
    classical_energy, optimal_classical_alpha, optimal_classical_params, RoundParams,
};
use crate::{Error, Result};

/// Parameters of both contractions of one round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundSettings {
    pub position: RoundParams,
    pub momentum: RoundParams,
}

impl RoundSettings {
    pub fn symmetric(epsilon: f64, alpha: f64) -> Self {
        Self {
            position: RoundParams::position(epsilon, alpha),
            momentum: RoundParams::momentum(epsilon, alpha),
        }
    }
}

/// How each round's `(ε, α)` is chosen from the occupation it is assumed to
/// start from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ParameterSchedule {
    /// Classical optimum `ε = 1/(4s)`, `α = s/√e`.
    Auto,
    /// `ε` scaled from the classical optimum, `α` re-optimised classically.
    ScaledEpsilon { factor: f64 },
    /// Quantum optimum from [`optimize_epsilon`].
    QuantumOptimal,
    /// Explicit per-round settings.
    Explicit { rounds: Vec<RoundSettings> },
}

impl ParameterSchedule {
    pub fn settings(&self, round: usize, assumed: &ThermalSpec) -> Result<RoundSettings> {
        let s = assumed.width();
        Ok(match self {
            ParameterSchedule::Auto => {
                let p = optimal_classical_params(assumed);
                RoundSettings::symmetric(p.epsilon, p.alpha)
            }
            ParameterSchedule::ScaledEpsilon { factor } => {
                let eps = factor * 0.25 / s;
                RoundSettings::symmetric(eps, optimal_classical_alpha(eps, s))
            }
            ParameterSchedule::QuantumOptimal => {
                let o = optimize_epsilon(assumed)?;
                RoundSettings::symmetric(o.epsilon, o.alpha)
            }
            ParameterSchedule::Explicit { rounds } => *rounds.get(round).ok_or_else(|| {
                Error::Config(format!(
                    "explicit schedule has no entry for round {}",
                    round + 1
                ))
            })?,
        })
    }

    /// Predicted energy ratio of one round on a thermal state: the classical
    /// formula, or the quantum one for the quantum-optimal policy.
    pub fn predicted_ratio(&self, settings: &RoundSettings, assumed: &ThermalSpec) -> f64 {
        let e = match self {
            ParameterSchedule::QuantumOptimal => {
                let q = quantum_energy(settings.position.epsilon, settings.position.alpha, assumed);
                let p = quantum_energy(settings.momentum.epsilon, settings.momentum.alpha, assumed);
                0.5 * (q + p)
            }
            _ => {
                let q =
                    classical_energy(settings.position.epsilon, settings.position.alpha, assumed);
                let p =
                    classical_energy(settings.momentum.epsilon, settings.momentum.alpha, assumed);
                0.5 * (q + p)
            }
        };
        e / assumed.energy()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleMode {
    /// Re-assume a thermal state each round and scale n̄ by the predicted
    /// energy ratio.
    Analytic,
    /// Propagate the density matrix through the exact Kraus map.
    Fock,
}

/// How the occupation of a propagated state is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NbarEstimator {
    /// Gaussian fit of a noise-free readout curve, as in the experiment.
    #[default]
    ThermalFraction,
    /// `⟨n̂⟩`.
    Expectation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleOptions {
    pub policy: ParameterSchedule,
    pub estimator: NbarEstimator,
    /// Fock truncation; defaults to [`ScheduleOptions::default_dim`].
    pub dim: Option<usize>,
    pub order: RoundOrder,
    /// Choose each round's parameters from the estimated occupation of the
    /// propagated state rather than the analytic prediction.
    pub closed_loop: bool,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            policy: ParameterSchedule::Auto,
            estimator: NbarEstimator::ThermalFraction,
            dim: None,
            order: RoundOrder::PositionFirst,
            closed_loop: false,
        }
    }
}

/// Multiple of the thermal truncation heuristic used for propagated states.
/// Cooling leaves non-thermal high-energy tails, and the state between the
/// two pulses of a contraction is displaced, so both need extra levels.
pub const FOCK_DIM_FACTOR: usize = 2;

impl ScheduleOptions {
    /// `FOCK_DIM_FACTOR` times the thermal default for the given occupation.
    pub fn default_dim(nbar: f64) -> Result<usize> {
        Ok(FOCK_DIM_FACTOR * ThermalSpec::new(nbar)?.default_dim())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub round: usize,
    pub nbar_analytic: f64,
    pub nbar_fock: Option<f64>,
    /// Mean energy in ħω: of the propagated state in Fock mode, of the
    /// assumed thermal state otherwise.
    pub energy: f64,
    pub settings: Option<RoundSettings>,
}

#[derive(Debug, Clone)]
pub struct ScheduleRun {
    pub rows: Vec<ScheduleRow>,
    pub final_state: Option<FockState>,
}

/// Runs `rounds` cooling rounds from a thermal state. Row 0 is the input.
pub fn run_schedule(
    initial: &ThermalSpec,
    rounds: usize,
    mode: ScheduleMode,
    options: &ScheduleOptions,
) -> Result<ScheduleRun> {
    let mut rows = vec![ScheduleRow {
        round: 0,
        nbar_analytic: initial.nbar(),
        nbar_fock: (mode == ScheduleMode::Fock).then_some(initial.nbar()),
        energy: initial.energy(),
        settings: None,
    }];
    let (space, mut state) = match mode {
        ScheduleMode::Analytic => (None, None),
        ScheduleMode::Fock => {
            let dim = match options.dim {
                Some(d) => d,
                None => ScheduleOptions::default_dim(initial.nbar())?,
            };
            (
                Some(FockSpace::new(dim)?),
                Some(FockState::thermal(initial, dim)?),
            )
        }
    };
    let mut analytic = initial.nbar();
    let mut estimate = initial.nbar();
    for k in 0..rounds {
        let assumed_analytic = ThermalSpec::new(analytic)?;
        let assumed = if options.closed_loop && mode == ScheduleMode::Fock {
            ThermalSpec::new(estimate.max(0.0))?
        } else {
            assumed_analytic
        };
        let settings = options.policy.settings(k, &assumed)?;
        analytic *= options.policy.predicted_ratio(
            &options.policy.settings(k, &assumed_analytic)?,
            &assumed_analytic,
        );
        let mut row = ScheduleRow {
            round: k + 1,
            nbar_analytic: analytic,
            nbar_fock: None,
            energy: analytic + 0.5,
            settings: Some(settings),
        };
        if let (Some(space), Some(st)) = (space.as_ref(), state.as_mut()) {
            let round =
                CoolingRound::new(space, &settings.position, &settings.momentum, options.order)?;
            *st = round.apply(st)?;
            let guess = estimate * options.policy.predicted_ratio(&settings, &assumed);
            estimate = match options.estimator {
                NbarEstimator::Expectation => st.mean_occupation(),
                NbarEstimator::ThermalFraction => thermal_fraction_nbar(space, st, guess)?,
            };
            row.nbar_fock = Some(estimate);
            row.energy = st.mean_energy();
        }
        rows.push(row);
    }
    Ok(ScheduleRun {
        rows,
        final_state: state,
    })
}
