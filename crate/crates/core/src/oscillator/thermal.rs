use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A thermal oscillator state, described by its mean occupation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ThermalRepr", into = "ThermalRepr")]
pub struct ThermalSpec {
    nbar: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThermalRepr {
    nbar: f64,
}

impl TryFrom<ThermalRepr> for ThermalSpec {
    type Error = Error;
    fn try_from(r: ThermalRepr) -> Result<Self> {
        ThermalSpec::new(r.nbar)
    }
}

impl From<ThermalSpec> for ThermalRepr {
    fn from(t: ThermalSpec) -> Self {
        ThermalRepr { nbar: t.nbar }
    }
}

impl ThermalSpec {
    pub fn new(nbar: f64) -> Result<Self> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(Error::invalid(format!(
                "mean occupation must be finite and >= 0, got {nbar}"
            )));
        }
        Ok(Self { nbar })
    }

    /// Thermal state with Gaussian quadrature width `s` (requires `s ≥ ½`).
    pub fn from_width(s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.5 - 1e-12) {
            return Err(Error::invalid(format!("width must be >= 1/2, got {s}")));
        }
        Self::new((2.0 * s * s - 0.5).max(0.0))
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// Standard deviation of either quadrature, `s = √((n̄+½)/2)`.
    pub fn width(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn variance(&self) -> f64 {
        (self.nbar + 0.5) / 2.0
    }

    /// Mean energy `n̄ + ½` in units of ħω.
    pub fn energy(&self) -> f64 {
        self.nbar + 0.5
    }

    pub fn population(&self, n: usize) -> f64 {
        if self.nbar == 0.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        let r = self.nbar / (self.nbar + 1.0);
        r.powi(n as i32) / (self.nbar + 1.0)
    }

    /// Probability mass at Fock levels `n ≥ dim`.
    pub fn tail_beyond(&self, dim: usize) -> f64 {
        if self.nbar == 0.0 {
            return if dim == 0 { 1.0 } else { 0.0 };
        }
        (self.nbar / (self.nbar + 1.0)).powf(dim as f64)
    }

    /// Default truncation: `max(32, ⌈12(n̄+1)⌉)`.
    pub fn default_dim(&self) -> usize {
        ((12.0 * (self.nbar + 1.0)).ceil() as usize).max(32)
    }
}
