use crate::optimize::scan_then_golden;
use crate::oscillator::ThermalSpec;
use crate::semiclassical::classical_energy;
use crate::{Error, Result};

/// Mean energy after one exact quantum round on a thermal state (units of ħω).
///
/// Adds `2(ε² − αε e^{−8ε²s²}(4s²(cos 4ε² − 1) + sin 4ε²))` to the classical
/// result.
pub fn quantum_energy(epsilon: f64, alpha: f64, spec: &ThermalSpec) -> f64 {
    let s2 = spec.variance();
    let e2 = epsilon * epsilon;
    let damp = (-8.0 * e2 * s2).exp();
    let correction =
        e2 - alpha * epsilon * damp * (4.0 * s2 * ((4.0 * e2).cos() - 1.0) + (4.0 * e2).sin());
    classical_energy(epsilon, alpha, spec) + 2.0 * correction
}

/// Feedback amplitude minimising [`quantum_energy`] at fixed `ε`.
pub fn optimal_alpha_given_epsilon(epsilon: f64, spec: &ThermalSpec) -> f64 {
    let s2 = spec.variance();
    let e2 = epsilon * epsilon;
    0.5 * epsilon
        * (-8.0 * e2 * s2).exp()
        * (4.0 * s2 * (1.0 + (4.0 * e2).cos()) + (4.0 * e2).sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonOptimum {
    pub epsilon: f64,
    pub alpha: f64,
    pub energy: f64,
    pub initial_energy: f64,
}

impl EpsilonOptimum {
    pub fn energy_ratio(&self) -> f64 {
        self.energy / self.initial_energy
    }
}

/// Samples used to bracket the minimum before golden-section refinement.
const SCAN_SAMPLES: usize = 400;

/// Minimises the quantum energy over `ε ∈ [10⁻⁴/s̃, 4/s̃]`, `s̃ = max(s, 1)`,
/// with `α` slaved to [`optimal_alpha_given_epsilon`].
pub fn optimize_epsilon(spec: &ThermalSpec) -> Result<EpsilonOptimum> {
    let st = spec.width().max(1.0);
    let objective = |eps: f64| quantum_energy(eps, optimal_alpha_given_epsilon(eps, spec), spec);
    let m = scan_then_golden(objective, 1e-4 / st, 4.0 / st, SCAN_SAMPLES, 1e-6 / st, 200);
    let initial_energy = spec.energy();
    if m.value >= initial_energy {
        return Err(Error::NoImprovement {
            optimized: m.value,
            initial: initial_energy,
        });
    }
    Ok(EpsilonOptimum {
        epsilon: m.x,
        alpha: optimal_alpha_given_epsilon(m.x, spec),
        energy: m.value,
        initial_energy,
    })
}
