use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::special::laguerre;
use crate::{Error, Result};

/// A spectator (radial) motional mode whose thermal occupation modulates the
/// drive strength through its Debye–Waller factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialMode {
    /// Angular frequency in rad/s.
    pub omega: f64,
    pub eta: f64,
    pub nbar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialModes {
    pub modes: Vec<RadialMode>,
}

impl Default for RadialModes {
    fn default() -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self {
            modes: vec![
                RadialMode {
                    omega: two_pi * 2.4e6,
                    eta: 0.02,
                    nbar: 0.0,
                },
                RadialMode {
                    omega: two_pi * 3.2e6,
                    eta: 0.03,
                    nbar: 0.0,
                },
            ],
        }
    }
}

/// `e^{−η²/2} L_n(η²)`, the carrier Rabi-frequency factor of level `n`.
pub fn debye_waller(n: usize, eta: f64) -> f64 {
    let x = eta * eta;
    (-x / 2.0).exp() * laguerre(n, 0, x)
}

fn thermal_cutoff(nbar: f64, tail: f64) -> usize {
    if nbar <= 0.0 {
        return 0;
    }
    let r = nbar / (nbar + 1.0);
    (tail.ln() / r.ln()).ceil() as usize
}

impl RadialModes {
    /// No spectator modes: the factor is always 1.
    pub fn none() -> Self {
        Self { modes: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        for m in &self.modes {
            if !(m.eta >= 0.0 && m.nbar >= 0.0 && m.omega > 0.0) {
                return Err(Error::invalid(format!(
                    "radial mode needs eta >= 0, nbar >= 0, omega > 0: {m:?}"
                )));
            }
        }
        Ok(())
    }

    /// Same modes with occupations at the temperature of an axial mode of
    /// frequency `axial_omega` holding `axial_nbar` quanta.
    pub fn at_equal_temperature(&self, axial_nbar: f64, axial_omega: f64) -> Self {
        let beta_axial = if axial_nbar > 0.0 {
            (1.0 + 1.0 / axial_nbar).ln()
        } else {
            f64::INFINITY
        };
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let x = beta_axial * m.omega / axial_omega;
                RadialMode {
                    nbar: if x.is_finite() { 1.0 / x.exp_m1() } else { 0.0 },
                    ..*m
                }
            })
            .collect();
        Self { modes }
    }

    /// Product of Debye–Waller factors for the given radial Fock levels.
    pub fn rabi_factor(&self, levels: &[usize]) -> f64 {
        self.modes
            .iter()
            .zip(levels)
            .map(|(m, &n)| debye_waller(n, m.eta))
            .product()
    }

    /// Thermal distribution of the Rabi factor, merged into at most `bins`
    /// weighted points `(factor, probability)`.
    pub fn factor_distribution(&self, bins: usize) -> Vec<(f64, f64)> {
        let mut points = vec![(1.0f64, 1.0f64)];
        for m in &self.modes {
            let cut = thermal_cutoff(m.nbar, 1e-12);
            let r = if m.nbar > 0.0 {
                m.nbar / (m.nbar + 1.0)
            } else {
                0.0
            };
            let level: Vec<(f64, f64)> = (0..=cut)
                .map(|n| (debye_waller(n, m.eta), (1.0 - r) * r.powi(n as i32)))
                .collect();
            let mut next = Vec::with_capacity(points.len() * level.len());
            for &(f, w) in &points {
                for &(g, v) in &level {
                    next.push((f * g, w * v));
                }
            }
            points = merge_bins(next, bins.max(1) * 8);
        }
        let total: f64 = points.iter().map(|p| p.1).sum();
        let points = merge_bins(points, bins.max(1));
        points.into_iter().map(|(f, w)| (f, w / total)).collect()
    }
}

fn merge_bins(mut points: Vec<(f64, f64)>, bins: usize) -> Vec<(f64, f64)> {
    if points.len() <= bins {
        return points;
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lo = points[0].0;
    let hi = points[points.len() - 1].0;
    if hi - lo < 1e-15 {
        let w = points.iter().map(|p| p.1).sum();
        return vec![(lo, w)];
    }
    let mut acc = vec![(0.0f64, 0.0f64); bins];
    for (f, w) in points {
        let k = (((f - lo) / (hi - lo)) * bins as f64)
            .floor()
            .min((bins - 1) as f64) as usize;
        acc[k].0 += f * w;
        acc[k].1 += w;
    }
    acc.into_iter()
        .filter(|a| a.1 > 0.0)
        .map(|(fw, w)| (fw / w, w))
        .collect()
}

/// Draws thermal radial occupations and returns the drive-strength factor.
pub fn sample_radial_rabi_scale(radial: &RadialModes, rng: &mut impl Rng) -> f64 {
    let levels: Vec<usize> = radial
        .modes
        .iter()
        .map(|m| {
            if m.nbar <= 0.0 {
                0
            } else {
                Geometric::new(1.0 / (m.nbar + 1.0))
                    .map(|g| g.sample(rng) as usize)
                    .unwrap_or(0)
            }
        })
        .collect();
    radial.rabi_factor(&levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn factor_examples() {
        let r = RadialModes::default();
        assert!((r.rabi_factor(&[0, 0]) - (-(0.0004 + 0.0009) / 2.0f64).exp()).abs() < 1e-15);
        assert!((r.rabi_factor(&[0, 0]) - 0.99935).abs() < 1e-5);
        let one = r.rabi_factor(&[1, 0]) / r.rabi_factor(&[0, 0]);
        assert!((one - (1.0 - 0.0004)).abs() < 1e-15);
        let mut zero = RadialModes::default();
        zero.modes.iter_mut().for_each(|m| {
            m.eta = 0.0;
            m.nbar = 5.0
        });
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_radial_rabi_scale(&zero, &mut rng), 1.0);
    }

    #[test]
    fn equal_temperature_scales_inversely_with_frequency_at_high_temperature() {
        let r =
            RadialModes::default().at_equal_temperature(100.0, 2.0 * std::f64::consts::PI * 1.7e6);
        let ratio = r.modes[0].nbar / 100.0;
        assert!((ratio - 1.7 / 2.4).abs() < 0.01);
        assert_eq!(
            RadialModes::default().at_equal_temperature(0.0, 1.0).modes[0].nbar,
            0.0
        );
    }

    #[test]
    fn binned_distribution_preserves_mean() {
        let r =
            RadialModes::default().at_equal_temperature(30.0, 2.0 * std::f64::consts::PI * 1.7e6);
        let dist = r.factor_distribution(256);
        let w: f64 = dist.iter().map(|p| p.1).sum();
        assert!((w - 1.0).abs() < 1e-9);
        let mean: f64 = dist.iter().map(|p| p.0 * p.1).sum();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mc: f64 = (0..200_000)
            .map(|_| sample_radial_rabi_scale(&r, &mut rng))
            .sum::<f64>()
            / 200_000.0;
        assert!((mean - mc).abs() < 2e-4, "{mean} vs {mc}");
    }
}
