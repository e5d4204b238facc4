//! Linearised Doppler cooling and its mapping onto the modular-variable
//! round.
//!
//! A Doppler cycle is modelled as a velocity-dependent excitation probability
//! followed by one recoil kick `η` along `+p`. Linearising the Lorentzian
//! around `p = 0` makes the cycle look like a modular-variable contraction
//! with a small pitch `ε`, which is what [`epsilon_equivalent`] returns.

use serde::{Deserialize, Serialize};

use crate::optimize::{bisect, golden_section};
use crate::semiclassical::classical_energy;
use crate::{Error, Result, ThermalSpec};

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant in J/K.
pub const K_B: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DopplerConfig {
    /// Natural linewidth `Γ` in rad/s.
    pub gamma: f64,
    /// Laser detuning `Δ = ν − ν₀` in rad/s.
    pub detuning: f64,
    /// Trap frequency `ω` in rad/s.
    pub omega: f64,
    pub eta: f64,
    /// Excitation probability per cycle at `p = 0`.
    pub pe: f64,
}

impl DopplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0
            && self.omega > 0.0
            && self.eta >= 0.0
            && self.pe > 0.0
            && self.pe <= 1.0)
        {
            return Err(Error::invalid(
                "Doppler config needs gamma > 0, omega > 0, eta >= 0, 0 < pe <= 1",
            ));
        }
        if !self.detuning.is_finite() {
            return Err(Error::invalid("detuning must be finite"));
        }
        Ok(())
    }

    fn lorentz(&self) -> f64 {
        self.gamma * self.gamma + 4.0 * self.detuning * self.detuning
    }

    /// `16Δηω/(Γ² + 4Δ²)`, the relative slope of the excitation probability.
    pub fn slope(&self) -> f64 {
        16.0 * self.detuning * self.eta * self.omega / self.lorentz()
    }

    /// `1/𝒩 = P_e(Γ² + 4Δ²)`.
    pub fn inverse_normalization(&self) -> f64 {
        self.pe * self.lorentz()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationProb {
    pub probability: f64,
    /// The linear model left `[0, 1]` and was clamped.
    pub clamped: bool,
    /// `|slope · p| < 1`, where the linearisation is meaningful.
    pub linear_regime: bool,
}

/// `P(−Z|p) ≈ P_e(1 + 16Δηωp/(Γ² + 4Δ²))`.
pub fn linearized_excitation_prob(p: f64, cfg: &DopplerConfig) -> ExcitationProb {
    let x = cfg.slope() * p;
    let raw = cfg.pe * (1.0 + x);
    let probability = raw.clamp(0.0, 1.0);
    ExcitationProb {
        probability,
        clamped: probability != raw,
        linear_regime: x.abs() < 1.0,
    }
}

/// Energy in `ħω` after one absorption cycle from a thermal state.
pub fn doppler_energy_update(spec: &ThermalSpec, cfg: &DopplerConfig) -> f64 {
    let s2 = spec.variance();
    let pe_eta2 = cfg.pe * cfg.eta * cfg.eta;
    2.0 * (0.5 * pe_eta2 + s2 * (1.0 + pe_eta2 * 16.0 * cfg.omega * cfg.detuning / cfg.lorentz()))
}

/// Fixed point `n̄ + ½ = −(Γ² + 4Δ²)/(16ωΔ)`; `None` unless `Δ < 0`.
pub fn steady_state_nbar(cfg: &DopplerConfig) -> Option<f64> {
    (cfg.detuning < 0.0).then(|| -cfg.lorentz() / (16.0 * cfg.omega * cfg.detuning) - 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerLimit {
    /// Optimal detuning `−Γ/2`.
    pub detuning: f64,
    /// `Γ/(4ω) − ½`.
    pub nbar_min: f64,
    /// Detuning found by numerically minimising the steady state over `Δ < 0`.
    pub scanned_detuning: f64,
}

/// Optimal detuning and minimum occupation for given `Γ` and `ω`.
pub fn doppler_limit(gamma: f64, omega: f64) -> Result<DopplerLimit> {
    if !(gamma > 0.0 && omega > 0.0) {
        return Err(Error::invalid("gamma and omega must be positive"));
    }
    // minimise over u = ln(−Δ/Γ), where the objective is smooth and unimodal
    let objective = |u: f64| {
        let d = -gamma * u.exp();
        -(gamma * gamma + 4.0 * d * d) / (16.0 * omega * d)
    };
    let m = golden_section(objective, -12.0, 12.0, 1e-12, 500);
    Ok(DopplerLimit {
        detuning: -gamma / 2.0,
        nbar_min: gamma / (4.0 * omega) - 0.5,
        scanned_detuning: -gamma * m.x.exp(),
    })
}

/// Modular-variable pitch with the same linear slope as the Doppler cycle at
/// `P_e = ½`: `ε = −4ηωΔ/(Γ² + 4Δ²)`.
pub fn epsilon_equivalent(cfg: &DopplerConfig) -> f64 {
    -4.0 * cfg.eta * cfg.omega * cfg.detuning / cfg.lorentz()
}

/// Steady-state occupation of repeated classical modular-variable rounds with
/// `ε` from [`epsilon_equivalent`] and `α = η`.
pub fn modular_steady_state(cfg: &DopplerConfig) -> Result<f64> {
    cfg.validate()?;
    let eps = epsilon_equivalent(cfg);
    if !(eps > 0.0) {
        return Err(Error::invalid(
            "equivalent pitch must be positive (red detuning)",
        ));
    }
    let excess = |s: f64| {
        let spec = ThermalSpec::from_width(s).expect("width above the ground-state value");
        classical_energy(eps, cfg.eta, &spec) - 2.0 * s * s
    };
    let lo = 0.5;
    let hi = 0.25 / eps;
    if !(hi > lo && excess(lo) > 0.0 && excess(hi) < 0.0) {
        return Err(Error::DegenerateData(format!(
            "no cooling fixed point for eps = {eps:.3e}, alpha = {:.3e}",
            cfg.eta
        )));
    }
    let s = bisect(excess, lo, hi, 1e-12 * hi)
        .ok_or_else(|| Error::DegenerateData("bisection failed".into()))?;
    Ok(2.0 * s * s - 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionStats {
    /// Mean waiting time of the exponential absorption model.
    pub tau: f64,
    /// `∫₀^τ f_e(t) dt = (e − 1)/e`.
    pub pe_avg: f64,
}

pub fn absorption_time_stats(tau: f64) -> Result<AbsorptionStats> {
    if !(tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    Ok(AbsorptionStats {
        tau,
        pe_avg: 1.0 - (-1.0f64).exp(),
    })
}

/// Doppler temperature `ħΓ/(4k_B)` in K.
pub fn doppler_temperature(gamma: f64) -> f64 {
    HBAR * gamma / (4.0 * K_B)
}

/// High-temperature occupation `k_B T/(ħω)`.
pub fn classical_nbar(temperature: f64, omega: f64) -> f64 {
    K_B * temperature / (HBAR * omega)
}

/// Occupation after each of `cycles` Doppler cycles, starting from `initial`.
/// Qualitative only: each cycle re-assumes a thermal state.
pub fn doppler_cooling_trajectory(
    initial: &ThermalSpec,
    cfg: &DopplerConfig,
    cycles: usize,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut out = vec![initial.nbar()];
    let mut spec = *initial;
    for _ in 0..cycles {
        let e = doppler_energy_update(&spec, cfg);
        spec = ThermalSpec::new((e - 0.5).max(0.0))?;
        out.push(spec.nbar());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(gamma_over_omega: f64, detuning_over_gamma: f64) -> DopplerConfig {
        let omega = 1.0;
        let gamma = gamma_over_omega * omega;
        DopplerConfig {
            gamma,
            detuning: detuning_over_gamma * gamma,
            omega,
            eta: 0.05,
            pe: 0.5,
        }
    }

    #[test]
    fn excitation_probability() {
        let c = DopplerConfig {
            gamma: 1.0,
            detuning: -0.5,
            omega: 0.01,
            eta: 0.05,
            pe: 0.3,
        };
        assert_eq!(linearized_excitation_prob(0.0, &c).probability, 0.3);
        let flat = DopplerConfig { detuning: 0.0, ..c };
        assert_eq!(linearized_excitation_prob(3.0, &flat).probability, 0.3);
        let p = linearized_excitation_prob(1.0, &c);
        assert!((p.probability - 0.3 * (1.0 - 16.0 * 0.5 / 2.0 * 0.0005)).abs() < 1e-15);
        assert!(p.linear_regime && !p.clamped);
        let far = linearized_excitation_prob(-1e4, &c);
        assert!(far.clamped && !far.linear_regime && far.probability == 1.0);
    }

    #[test]
    fn no_recoil_leaves_energy() {
        let c = DopplerConfig {
            eta: 0.0,
            ..cfg(100.0, -0.5)
        };
        let spec = ThermalSpec::new(7.0).unwrap();
        assert!((doppler_energy_update(&spec, &c) - 2.0 * spec.variance()).abs() < 1e-12);
    }

    #[test]
    fn steady_state_is_fixed_point_for_any_pe() {
        for pe in [0.1, 0.5, 0.632, 1.0] {
            let c = DopplerConfig {
                pe,
                ..cfg(100.0, -0.3)
            };
            let n = steady_state_nbar(&c).unwrap();
            let spec = ThermalSpec::new(n).unwrap();
            assert!(
                (doppler_energy_update(&spec, &c) - spec.energy()).abs() < 1e-9 * spec.energy()
            );
            let reference = steady_state_nbar(&DopplerConfig { pe: 1.0, ..c }).unwrap();
            assert!((n - reference).abs() < 1e-12 * reference);
        }
        assert!(steady_state_nbar(&cfg(100.0, 0.2)).is_none());
    }

    #[test]
    fn limit() {
        let lim = doppler_limit(100.0, 1.0).unwrap();
        assert_eq!(lim.nbar_min, 24.5);
        assert_eq!(lim.detuning, -50.0);
        assert!((lim.scanned_detuning / lim.detuning - 1.0).abs() < 1e-6);
        let at_opt = steady_state_nbar(&cfg(100.0, -0.5)).unwrap();
        assert!((at_opt - 24.5).abs() < 1e-12);
        // global minimum over log-spaced red detunings
        for i in 0..100 {
            let d = -(10f64).powf(-3.0 + 6.0 * i as f64 / 99.0);
            assert!(steady_state_nbar(&cfg(100.0, d)).unwrap() >= lim.nbar_min - 1e-9);
        }
    }

    #[test]
    fn epsilon_mapping() {
        let c = cfg(100.0, -0.5);
        assert!((epsilon_equivalent(&c) - c.eta * c.omega / c.gamma).abs() < 1e-15);
        assert_eq!(epsilon_equivalent(&cfg(100.0, 0.0)), 0.0);
        let modular = modular_steady_state(&c).unwrap();
        let doppler = steady_state_nbar(&c).unwrap();
        assert!(
            (modular / doppler - 1.0).abs() < 0.01,
            "{modular} {doppler}"
        );
    }

    #[test]
    fn temperature_limit() {
        // 2π·22 MHz linewidth, 2π·1 MHz trap
        let gamma = 2.0 * std::f64::consts::PI * 22e6;
        let omega = 2.0 * std::f64::consts::PI * 1e6;
        let t_min = doppler_temperature(gamma);
        let lim = doppler_limit(gamma, omega).unwrap();
        assert!((classical_nbar(t_min, omega) - (lim.nbar_min + 0.5)).abs() < 1e-9);
    }

    #[test]
    fn absorption_mean() {
        let st = absorption_time_stats(2.0).unwrap();
        assert!((st.pe_avg - 0.632_120_558_828_557_7).abs() < 1e-15);
        // ∫ t f_e(t) dt by the trapezoid rule
        let (n, t_max) = (200_000, 60.0);
        let h = t_max / n as f64;
        let f = |t: f64| t * (-t / st.tau).exp() / st.tau;
        let integral: f64 = (1..n).map(|i| f(i as f64 * h)).sum::<f64>() * h + 0.5 * h * f(t_max);
        assert!((integral - st.tau).abs() < 1e-6);
    }
}
