use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Time-dependent spin dephasing `dρ/dt = c(t)[Z,[Z,ρ]]` with
/// `c(t) = (g²/K)(e^{−Kt} − 1)`, `t` measured from the last spin reset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingKernel {
    /// Coupling `g` in s⁻¹.
    pub g: f64,
    /// Correlation decay rate `K` in s⁻¹.
    pub k: f64,
}

impl DephasingKernel {
    /// `∫_{t0}^{t1} c(t) dt`.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        if self.g == 0.0 {
            return 0.0;
        }
        let pref = self.g * self.g / self.k;
        pref * (((-self.k * t0).exp() - (-self.k * t1).exp()) / self.k - (t1 - t0))
    }

    /// Log of the spin coherence after free evolution for `t` from a reset.
    pub fn log_coherence(&self, t: f64) -> f64 {
        4.0 * self.integral(0.0, t)
    }
}

/// Axial-frequency modulation at a harmonic of the 50 Hz mains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MainsHarmonic {
    pub harmonic: u32,
    /// Peak frequency excursion in Hz.
    pub amplitude: f64,
    /// Phase in radians.
    pub phase: f64,
}

pub const MAINS_FREQUENCY: f64 = 50.0;

impl MainsHarmonic {
    fn angular(&self) -> f64 {
        2.0 * PI * MAINS_FREQUENCY * self.harmonic as f64
    }

    /// Detuning in rad/s at time `t`.
    pub fn detuning(&self, t: f64) -> f64 {
        2.0 * PI * self.amplitude * (self.angular() * t + self.phase).sin()
    }

    /// Accumulated phase `∫ detuning dt` over `[t0, t1]`.
    pub fn phase_integral(&self, t0: f64, t1: f64) -> f64 {
        let w = self.angular();
        2.0 * PI * self.amplitude * ((w * t0 + self.phase).cos() - (w * t1 + self.phase).cos()) / w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EmissionPattern {
    Isotropic,
    /// `sin²` pattern about a dipole axis at `axis_angle` from the trap axis.
    Dipole {
        axis_angle: f64,
    },
}

/// One photon scattered during a spin reset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoilPhoton {
    pub label: String,
    /// Momentum kick of one photon along the mode axis at full alignment,
    /// in units where the ground-state momentum spread is ½.
    pub lamb_dicke: f64,
    /// Cosine between the absorbed beam and the mode axis.
    pub absorption_projection: f64,
    pub emission: EmissionPattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoilConfig {
    pub enabled: bool,
    /// Monte-Carlo samples of the kick distribution per reset.
    pub samples: usize,
    pub photons: Vec<RecoilPhoton>,
}

impl RecoilConfig {
    pub fn off() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }
}

impl Default for RecoilConfig {
    /// One 854 nm and one 397 nm photon, beams at 45° to the axis; kick sizes
    /// scaled from η = 0.05 at 729 nm.
    fn default() -> Self {
        Self {
            enabled: true,
            samples: 32,
            photons: vec![
                RecoilPhoton {
                    label: "854".into(),
                    lamb_dicke: 0.05 * 729.0 / 854.0,
                    absorption_projection: FRAC_1_SQRT_2,
                    emission: EmissionPattern::Isotropic,
                },
                RecoilPhoton {
                    label: "397".into(),
                    lamb_dicke: 0.05 * 729.0 / 397.0,
                    absorption_projection: FRAC_1_SQRT_2,
                    emission: EmissionPattern::Dipole {
                        axis_angle: PI / 4.0,
                    },
                },
            ],
        }
    }
}

/// Noise model of the pulse sequence. Rates in s⁻¹, frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub spin_dephasing: DephasingKernel,
    /// Markovian rate of the `Z` collapse operator.
    pub spin_dephasing_rate: f64,
    /// Motional coherence time in s; `None` disables oscillator dephasing.
    pub osc_coherence_time: Option<f64>,
    /// Heating rate in quanta per second near the ground state.
    pub heating_rate: f64,
    pub mains: Vec<MainsHarmonic>,
    /// Shot-to-shot axial frequency offset, standard deviation in Hz.
    pub freq_jitter_sd: f64,
    /// Spread of the initial mean occupation.
    pub nbar_sd: f64,
    /// Fractional spread of the drive strength.
    pub rabi_sd: f64,
    /// Laser detuning spread in Hz.
    pub detuning_sd: f64,
    pub recoil: RecoilConfig,
    /// Largest integration step in s; derived from the fastest rate if unset.
    pub max_step: Option<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            spin_dephasing: DephasingKernel {
                g: 1.0 / 1.6e-3,
                k: 1.0 / 5e-3,
            },
            spin_dephasing_rate: 0.0,
            osc_coherence_time: Some(15e-3),
            heating_rate: 10.0,
            mains: Vec::new(),
            freq_jitter_sd: 20.0,
            nbar_sd: 2.5,
            rabi_sd: 0.0,
            detuning_sd: 0.0,
            recoil: RecoilConfig::default(),
            max_step: None,
        }
    }
}

/// Steps per fastest noise period required by [`NoiseConfig::step`].
pub const STEPS_PER_RATE: f64 = 50.0;

impl NoiseConfig {
    /// Every noise source switched off.
    pub fn none() -> Self {
        Self {
            spin_dephasing: DephasingKernel { g: 0.0, k: 1.0 },
            spin_dephasing_rate: 0.0,
            osc_coherence_time: None,
            heating_rate: 0.0,
            mains: Vec::new(),
            freq_jitter_sd: 0.0,
            nbar_sd: 0.0,
            rabi_sd: 0.0,
            detuning_sd: 0.0,
            recoil: RecoilConfig::off(),
            max_step: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            self.spin_dephasing.g,
            self.spin_dephasing.k,
            self.spin_dephasing_rate,
            self.heating_rate,
            self.freq_jitter_sd,
            self.nbar_sd,
            self.rabi_sd,
            self.detuning_sd,
        ];
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::invalid(
                "noise rates and spreads must be finite and >= 0",
            ));
        }
        if self.spin_dephasing.g > 0.0 && self.spin_dephasing.k <= 0.0 {
            return Err(Error::invalid("dephasing kernel needs K > 0"));
        }
        if let Some(t) = self.osc_coherence_time {
            if !(t > 0.0) {
                return Err(Error::invalid("oscillator coherence time must be positive"));
            }
        }
        if self.mains.iter().any(|m| m.harmonic == 0) {
            return Err(Error::invalid("mains harmonics start at 1"));
        }
        Ok(())
    }

    pub fn osc_dephasing_rate(&self) -> f64 {
        self.osc_coherence_time.map_or(0.0, |t| 2.0 / t)
    }

    /// Fastest rate the integrator must resolve, in s⁻¹.
    pub fn max_rate(&self) -> f64 {
        let mains: f64 = self
            .mains
            .iter()
            .map(|m| 2.0 * PI * m.amplitude.abs())
            .sum();
        let kernel = if self.spin_dephasing.g > 0.0 {
            self.spin_dephasing.g.max(self.spin_dephasing.k)
        } else {
            0.0
        };
        [
            kernel,
            self.spin_dephasing_rate,
            self.osc_dephasing_rate(),
            self.heating_rate,
            2.0 * PI * 3.0 * self.freq_jitter_sd,
            2.0 * PI * 3.0 * self.detuning_sd,
            mains,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Integration step, or [`Error::StepTooCoarse`] if `max_step` is set
    /// above `1/(50 · max rate)`.
    pub fn step(&self) -> Result<f64> {
        let rate = self.max_rate();
        let limit = if rate > 0.0 {
            1.0 / (STEPS_PER_RATE * rate)
        } else {
            f64::INFINITY
        };
        match self.max_step {
            Some(dt) if !(dt > 0.0) => Err(Error::invalid("max_step must be positive")),
            Some(dt) if dt > limit => Err(Error::StepTooCoarse(format!(
                "step {dt:.3e} s exceeds 1/(50 x {rate:.3e} s^-1) = {limit:.3e} s"
            ))),
            Some(dt) => Ok(dt),
            None => Ok(limit),
        }
    }

    /// Deterministic axial detuning from mains modulation, rad/s.
    pub fn mains_detuning(&self, t: f64) -> f64 {
        self.mains.iter().map(|m| m.detuning(t)).sum()
    }

    pub fn mains_phase(&self, t0: f64, t1: f64) -> f64 {
        self.mains.iter().map(|m| m.phase_integral(t0, t1)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mains_period() {
        let cfg = NoiseConfig {
            mains: vec![MainsHarmonic {
                harmonic: 1,
                amplitude: 30.0,
                phase: 0.4,
            }],
            ..NoiseConfig::none()
        };
        for i in 0..50 {
            let t = i as f64 * 1.3e-3;
            assert!((cfg.mains_detuning(t) - cfg.mains_detuning(t + 0.02)).abs() < 1e-9);
        }
        assert!((cfg.mains_detuning(0.003) - cfg.mains_detuning(0.013)).abs() > 1.0);
        // phase integral over a full period vanishes
        assert!(cfg.mains_phase(0.001, 0.021).abs() < 1e-9);
    }

    #[test]
    fn step_guard() {
        let mut cfg = NoiseConfig::default();
        let dt = cfg.step().unwrap();
        assert!((dt - 1.0 / (50.0 * 625.0)).abs() < 1e-12);
        cfg.max_step = Some(1e-3);
        assert!(matches!(cfg.step(), Err(Error::StepTooCoarse(_))));
        assert_eq!(NoiseConfig::none().step().unwrap(), f64::INFINITY);
    }

    #[test]
    fn kernel_limits() {
        let k = DephasingKernel { g: 625.0, k: 200.0 };
        // quadratic at short times: 4·(g²/K)·(−K t²/2) = −2g²t²
        let t = 1e-5;
        assert!((k.log_coherence(t) / (-2.0 * 625.0f64.powi(2) * t * t) - 1.0).abs() < 1e-2);
        // linear at long times with slope −4g²/K
        let slope = (k.log_coherence(0.2) - k.log_coherence(0.1)) / 0.1;
        assert!((slope / (-4.0 * 625.0f64.powi(2) / 200.0) - 1.0).abs() < 1e-6);
    }
}
