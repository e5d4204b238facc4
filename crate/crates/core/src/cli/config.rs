//! Experiment configuration documents (TOML).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::measurement::{DecayEnvelope, LambDickeOrder, RabiScaling};
use crate::noise::{NoiseConfig, RadialModes};
use crate::protocol::{NbarEstimator, ParameterSchedule, RoundOrder, ScheduleMode};
use crate::{Error, Result, ThermalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Optimize,
    CoolClassical,
    CoolQuantum,
    CoolNoisy,
    ReadoutFit,
    BsbFit,
    DopplerCompare,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Optimize => "optimize",
            ExperimentKind::CoolClassical => "cool-classical",
            ExperimentKind::CoolQuantum => "cool-quantum",
            ExperimentKind::CoolNoisy => "cool-noisy",
            ExperimentKind::ReadoutFit => "readout-fit",
            ExperimentKind::BsbFit => "bsb-fit",
            ExperimentKind::DopplerCompare => "doppler-compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub mode: ScheduleMode,
    pub estimator: NbarEstimator,
    pub order: RoundOrder,
    pub closed_loop: bool,
    pub dim: Option<usize>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            mode: ScheduleMode::Fock,
            estimator: NbarEstimator::default(),
            order: RoundOrder::default(),
            closed_loop: false,
            dim: None,
        }
    }
}

/// Trap and drive constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrapConfig {
    /// Axial frequency in rad/s.
    pub omega: f64,
    pub eta: f64,
    /// Motional coupling `ηΩ` in rad/s.
    pub coupling: f64,
    /// Spin reset duration in s.
    pub repump_duration: f64,
    pub drive_order: LambDickeOrder,
}

impl Default for TrapConfig {
    fn default() -> Self {
        Self {
            omega: 2.0 * PI * 1.7e6,
            eta: 0.05,
            coupling: 2.0 * PI * 10e3,
            repump_duration: 20e-6,
            drive_order: LambDickeOrder::Leading,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoisyConfig {
    pub trajectories: usize,
    pub bootstrap: usize,
    /// Also write one row per trajectory and round.
    pub dump_trajectories: bool,
}

impl Default for NoisyConfig {
    fn default() -> Self {
        Self {
            trajectories: 8,
            bootstrap: 1000,
            dump_trajectories: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModelKind {
    Gaussian,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReadoutConfig {
    /// CSV with columns `alpha, prob, shots`; simulated from `initial` if unset.
    pub data: Option<PathBuf>,
    pub points: usize,
    pub shots: u32,
    pub order: LambDickeOrder,
    pub model: FitModelKind,
    /// Sample the radial-mode Rabi factor in simulation and in the full model.
    pub radial_sampling: bool,
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        Self {
            data: None,
            points: 50,
            shots: 400,
            order: LambDickeOrder::Full,
            model: FitModelKind::Full,
            radial_sampling: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BsbConfig {
    /// CSV with columns `time, prob, shots`; simulated if unset.
    pub data: Option<PathBuf>,
    /// Populations of the low levels of the simulated state; the remainder
    /// sits in a thermal tail around `tail_nbar`.
    pub populations: Vec<f64>,
    pub tail_nbar: f64,
    /// `Ω₀₁` in rad/s.
    pub rabi_0: f64,
    pub scaling: RabiScaling,
    pub envelope: DecayEnvelope,
    pub duration: f64,
    pub points: usize,
    pub shots: u32,
    /// Highest fitted level; defaults to the number of given populations minus one.
    pub max_level: Option<usize>,
    pub bootstrap: usize,
}

impl Default for BsbConfig {
    fn default() -> Self {
        Self {
            data: None,
            populations: vec![0.974],
            tail_nbar: 40.0,
            rabi_0: 2.0 * PI * 10e3,
            scaling: RabiScaling::Auto { eta: 0.05 },
            envelope: DecayEnvelope {
                exponential: 500.0,
                gaussian: 0.0,
            },
            duration: 500e-6,
            points: 100,
            shots: 400,
            max_level: None,
            bootstrap: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DopplerCompareConfig {
    pub gamma_over_omega: Vec<f64>,
    /// Detunings in units of `Γ`; the optimum `−½` is always included.
    pub detunings: Vec<f64>,
    pub eta: f64,
    pub pe: f64,
}

impl Default for DopplerCompareConfig {
    fn default() -> Self {
        Self {
            gamma_over_omega: vec![50.0, 100.0, 500.0],
            detunings: vec![-0.25, -1.0],
            eta: 0.05,
            pe: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

/// A complete run description. Every field has a default, so a document
/// naming only `kind` is valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default = "default_initial")]
    pub initial: ThermalSpec,
    #[serde(default = "default_parameters")]
    pub parameters: ParameterSchedule,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub trap: TrapConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub radial: RadialModes,
    #[serde(default)]
    pub noisy: NoisyConfig,
    #[serde(default)]
    pub readout: ReadoutConfig,
    #[serde(default)]
    pub bsb: BsbConfig,
    #[serde(default)]
    pub doppler: DopplerCompareConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_rounds() -> usize {
    3
}

fn default_initial() -> ThermalSpec {
    ThermalSpec::new(34.0).expect("valid default")
}

fn default_parameters() -> ParameterSchedule {
    ParameterSchedule::Auto
}

impl ExperimentConfig {
    /// Defaults for the given kind.
    pub fn new(kind: ExperimentKind) -> Self {
        toml::from_str(&format!("kind = \"{}\"", kind.name())).expect("defaults parse")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// The fully resolved document, defaults included.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let config = |m: String| Err(Error::Config(m));
        self.noise.validate().map_err(as_config)?;
        self.radial.validate().map_err(as_config)?;
        let t = &self.trap;
        if !(t.omega > 0.0 && t.eta > 0.0 && t.coupling > 0.0 && t.repump_duration >= 0.0) {
            return config("trap.omega, trap.eta and trap.coupling must be positive".into());
        }
        if self.kind == ExperimentKind::CoolNoisy && self.noisy.trajectories == 0 {
            return config("noisy.trajectories must be at least 1".into());
        }
        if self.readout.points < 3 {
            return config("readout.points must be at least 3".into());
        }
        let b = &self.bsb;
        if b.populations.iter().any(|p| !(0.0..=1.0).contains(p))
            || b.populations.iter().sum::<f64>() > 1.0 + 1e-12
        {
            return config("bsb.populations must lie in [0, 1] and sum to at most 1".into());
        }
        if !(b.rabi_0 > 0.0 && b.duration > 0.0 && b.points >= 3 && b.tail_nbar >= 0.0) {
            return config("bsb.rabi_0 and bsb.duration must be positive, bsb.points >= 3".into());
        }
        let d = &self.doppler;
        if d.gamma_over_omega.iter().any(|g| !(*g > 0.0))
            || !(d.eta > 0.0 && d.pe > 0.0 && d.pe <= 1.0)
        {
            return config(
                "doppler: gamma_over_omega and eta must be positive, 0 < pe <= 1".into(),
            );
        }
        if d.detunings.iter().any(|x| !(*x < 0.0)) {
            return config("doppler.detunings must be negative (red detuning)".into());
        }
        Ok(())
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidParameter(m) => Error::Config(m),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let cfg =
            ExperimentConfig::from_toml("kind = \"optimize\"\n[initial]\nnbar = 50\n").unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Optimize);
        assert_eq!(cfg.initial.nbar(), 50.0);
        assert_eq!(cfg.trap.eta, 0.05);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for doc in [
            "kind = \"optimize\"\nrnds = 3\n",
            "kind = \"optimize\"\n[noise]\nheating = 3\n",
            "kind = \"bogus\"\n",
        ] {
            assert!(
                matches!(ExperimentConfig::from_toml(doc), Err(Error::Config(_))),
                "{doc}"
            );
        }
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::CoolNoisy);
        cfg.parameters = ParameterSchedule::ScaledEpsilon { factor: 0.7 };
        cfg.noise.mains.push(crate::noise::MainsHarmonic {
            harmonic: 3,
            amplitude: 12.0,
            phase: 0.5,
        });
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }
}
