//! Characteristic-function readout: after a spin-dependent displacement the
//! spin population encodes `Re⟨D(α)⟩`, and the width of that curve gives n̄.

use std::f64::consts::FRAC_PI_2;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmOptions};
use crate::noise::{sample_radial_rabi_scale, RadialModes};
use crate::oscillator::{FockSpace, FockState, QuadratureBasis, ThermalSpec, C64};
use crate::stats::{wilson_interval, Z95};
use crate::{Error, Result};

/// `⟨D(α)⟩` on a thermal state is `exp(−2c α²(n̄+½))` with this `c`.
pub const GAUSSIAN_WIDTH_CONSTANT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambDickeOrder {
    /// Drive linear in the motional operators.
    Leading,
    /// Drive kept to all orders in the Lamb-Dicke parameter.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutCurve {
    pub alphas: Vec<f64>,
    /// Probability of finding the spin in `|+Z⟩`.
    pub probs: Vec<f64>,
    /// Shots per point; zero marks exact (noise-free) values.
    pub shots: Vec<u32>,
    /// 95% Wilson intervals.
    pub ci: Vec<(f64, f64)>,
}

impl ReadoutCurve {
    pub fn new(alphas: Vec<f64>, probs: Vec<f64>, shots: Vec<u32>) -> Result<Self> {
        if alphas.len() != probs.len() || alphas.len() != shots.len() {
            return Err(Error::invalid("readout columns differ in length"));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("readout probabilities must lie in [0, 1]"));
        }
        let ci = probs
            .iter()
            .zip(&shots)
            .map(|(&p, &n)| {
                if n == 0 {
                    (p, p)
                } else {
                    wilson_interval((p * n as f64).round() as u64, n as u64, Z95)
                }
            })
            .collect();
        Ok(Self {
            alphas,
            probs,
            shots,
            ci,
        })
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }
}

/// Readout of one oscillator state: `P(+Z | α, f) = ½(1 + Re Σ_k w_k e^{−2iαf x_k})`
/// where `x_k` are eigenvalues of the (possibly Lamb-Dicke dressed) momentum
/// generator and `f` the radial drive-strength factor.
#[derive(Debug, Clone)]
pub struct ReadoutSimulator {
    nodes: Vec<f64>,
    weights: Vec<C64>,
}

impl ReadoutSimulator {
    pub fn with_basis(basis: &QuadratureBasis, state: &FockState) -> Self {
        let osc = state.oscillator();
        let weights = basis.rotated_weights(osc.matrix(), FRAC_PI_2);
        Self {
            nodes: basis.nodes().to_vec(),
            weights,
        }
    }

    /// Builds the generator eigenbasis for `order` (one eigendecomposition).
    pub fn new(state: &FockState, order: LambDickeOrder, eta: f64) -> Self {
        let basis = match order {
            LambDickeOrder::Leading => QuadratureBasis::bare(state.dim()),
            LambDickeOrder::Full => QuadratureBasis::lamb_dicke_dressed(state.dim(), eta),
        };
        Self::with_basis(&basis, state)
    }

    pub fn probability(&self, alpha: f64, factor: f64) -> f64 {
        let a = 2.0 * alpha * factor;
        let re: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, w)| {
                let (s, c) = (a * x).sin_cos();
                w.re * c + w.im * s
            })
            .sum();
        (0.5 * (1.0 + re)).clamp(0.0, 1.0)
    }

    /// Probability averaged over a discrete radial-factor distribution.
    pub fn averaged_probability(&self, alpha: f64, factors: &[(f64, f64)]) -> f64 {
        factors
            .iter()
            .map(|&(f, w)| w * self.probability(alpha, f))
            .sum()
    }

    /// Curve at the given amplitudes. With `shots > 0` each shot draws its own
    /// radial factor and a binary outcome; otherwise exact averages.
    pub fn curve(
        &self,
        alphas: &[f64],
        radial: Option<&RadialModes>,
        shots: u32,
        rng: &mut impl Rng,
    ) -> Result<ReadoutCurve> {
        let probs: Vec<f64> = if shots == 0 {
            let dist = radial
                .map(|r| r.factor_distribution(512))
                .unwrap_or_else(|| vec![(1.0, 1.0)]);
            alphas
                .iter()
                .map(|&a| self.averaged_probability(a, &dist))
                .collect()
        } else {
            alphas
                .iter()
                .map(|&a| {
                    let ups = match radial {
                        Some(r) if !r.modes.is_empty() => (0..shots)
                            .filter(|_| {
                                let f = sample_radial_rabi_scale(r, rng);
                                rng.random::<f64>() < self.probability(a, f)
                            })
                            .count()
                            as u64,
                        _ => Binomial::new(shots as u64, self.probability(a, 1.0))
                            .unwrap()
                            .sample(rng),
                    };
                    ups as f64 / shots as f64
                })
                .collect()
        };
        ReadoutCurve::new(alphas.to_vec(), probs, vec![shots; alphas.len()])
    }
}

/// Simulates a readout curve of `state` (see [`ReadoutSimulator::curve`]).
pub fn simulate_readout(
    state: &FockState,
    alphas: &[f64],
    radial: Option<&RadialModes>,
    order: LambDickeOrder,
    eta: f64,
    shots: u32,
    rng: &mut impl Rng,
) -> Result<ReadoutCurve> {
    ReadoutSimulator::new(state, order, eta).curve(alphas, radial, shots, rng)
}

/// Model used to extract n̄ from a readout curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ReadoutModel {
    /// `½(1 + exp(−2cα²(n̄+½)))`.
    Gaussian,
    /// Thermal state read out with the all-order drive and radial averaging.
    Full {
        eta: f64,
        #[serde(default)]
        radial: Option<RadialModes>,
        #[serde(default)]
        dim: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbarFit {
    pub nbar: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub stderr: f64,
    pub reduced_chi2: f64,
    pub iterations: usize,
    pub model: String,
}

/// Precomputed all-order readout of diagonal states:
/// `P_i(n̄) = ½(1 + Σ_n A_{in} p_n(n̄))`.
#[derive(Debug, Clone)]
pub struct FullReadoutModel {
    dim: usize,
    table: Array2<f64>,
}

impl FullReadoutModel {
    pub fn new(alphas: &[f64], eta: f64, radial: Option<&RadialModes>, dim: usize) -> Self {
        let basis = QuadratureBasis::lamb_dicke_dressed(dim, eta);
        let dist = radial
            .map(|r| r.factor_distribution(512))
            .unwrap_or_else(|| vec![(1.0, 1.0)]);
        let nodes = basis.nodes();
        // C_{ik} = E_f cos(2 α_i f x_k)
        let c = Array2::from_shape_fn((alphas.len(), dim), |(i, k)| {
            dist.iter()
                .map(|&(f, w)| w * (2.0 * alphas[i] * f * nodes[k]).cos())
                .sum::<f64>()
        });
        let v2 = basis.vectors().mapv(|v| v * v);
        let table = c.dot(&v2.t());
        Self { dim, table }
    }

    pub fn predict(&self, nbar: f64) -> Vec<f64> {
        let spec = ThermalSpec::new(nbar.max(0.0)).unwrap();
        let pops: Vec<f64> = (0..self.dim).map(|n| spec.population(n)).collect();
        let norm: f64 = pops.iter().sum();
        self.table
            .rows()
            .into_iter()
            .map(|row| 0.5 * (1.0 + row.iter().zip(&pops).map(|(a, p)| a * p).sum::<f64>() / norm))
            .collect()
    }
}

fn gaussian_probability(alpha: f64, nbar: f64) -> f64 {
    0.5 * (1.0 + (-2.0 * GAUSSIAN_WIDTH_CONSTANT * alpha * alpha * (nbar + 0.5)).exp())
}

fn weights(curve: &ReadoutCurve) -> Vec<f64> {
    curve
        .probs
        .iter()
        .zip(&curve.shots)
        .map(|(&p, &n)| {
            if n == 0 {
                1.0
            } else {
                let n = n as f64;
                let pt = (p * n + 1.0) / (n + 2.0);
                n / (pt * (1.0 - pt))
            }
        })
        .collect()
}

fn check_curve(curve: &ReadoutCurve) -> Result<()> {
    if curve.len() < 3 {
        return Err(Error::DegenerateData(
            "need at least three readout points".into(),
        ));
    }
    let (lo, hi) = curve
        .probs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| {
            (a.min(p), b.max(p))
        });
    if hi - lo < 1e-9 {
        return Err(Error::DegenerateData("readout curve is flat".into()));
    }
    let amax = curve.alphas.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    if amax == 0.0 {
        return Err(Error::DegenerateData(
            "all displacement amplitudes are zero".into(),
        ));
    }
    Ok(())
}

/// Fits the mean occupation of a thermal state to a readout curve.
pub fn fit_nbar(curve: &ReadoutCurve, model: &ReadoutModel) -> Result<NbarFit> {
    check_curve(curve)?;
    match model {
        ReadoutModel::Gaussian => fit_with(curve, "gaussian", |n| {
            curve
                .alphas
                .iter()
                .map(|&a| gaussian_probability(a, n))
                .collect()
        }),
        ReadoutModel::Full { eta, radial, dim } => {
            let guess = fit_with(curve, "gaussian", |n| {
                curve
                    .alphas
                    .iter()
                    .map(|&a| gaussian_probability(a, n))
                    .collect()
            })?;
            let dim = dim.unwrap_or_else(|| {
                ThermalSpec::new((1.5 * guess.nbar).max(5.0))
                    .unwrap()
                    .default_dim()
                    .min(2048)
            });
            let full = FullReadoutModel::new(&curve.alphas, *eta, radial.as_ref(), dim);
            fit_with(curve, "full", |n| full.predict(n))
        }
    }
}

fn fit_with(
    curve: &ReadoutCurve,
    name: &str,
    predict: impl Fn(f64) -> Vec<f64>,
) -> Result<NbarFit> {
    let w = weights(curve);
    let ssr = |n: f64| {
        predict(n)
            .iter()
            .zip(&curve.probs)
            .zip(&w)
            .map(|((m, y), w)| w * (m - y) * (m - y))
            .sum::<f64>()
    };
    // deterministic coarse scan: 0 and a log grid up to 10⁴
    let start = std::iter::once(0.0)
        .chain((0..=140).map(|i| 10f64.powf(-3.0 + 7.0 * i as f64 / 140.0)))
        .map(|n| (n, ssr(n)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
        .0;
    let eval = |p: &[f64]| {
        let n = p[0];
        let h = 1e-6 * n.max(1.0);
        let m = predict(n);
        let up = predict(n + h);
        let down = predict((n - h).max(0.0));
        let span = n + h - (n - h).max(0.0);
        let r = m
            .iter()
            .zip(&curve.probs)
            .zip(&w)
            .map(|((m, y), w)| w.sqrt() * (m - y))
            .collect();
        let j = up
            .iter()
            .zip(&down)
            .zip(&w)
            .map(|((u, d), w)| vec![w.sqrt() * (u - d) / span])
            .collect();
        (r, j)
    };
    let out = levenberg_marquardt(eval, &[start], &[0.0], &[1e6], &LmOptions::default());
    let nbar = out.params[0];
    if !out.converged || !nbar.is_finite() {
        return Err(Error::FitDidNotConverge(format!(
            "{name} readout fit stalled at n̄ = {nbar}"
        )));
    }
    let dof = (curve.len() - 1).max(1) as f64;
    let reduced_chi2 = out.cost / dof;
    let exact = curve.shots.iter().all(|&s| s == 0);
    let scale = if exact {
        reduced_chi2
    } else {
        reduced_chi2.max(1.0)
    };
    let stderr = out
        .covariance()
        .map(|c| (c[(0, 0)] * scale).sqrt())
        .unwrap_or(f64::INFINITY);
    Ok(NbarFit {
        nbar,
        ci_low: (nbar - Z95 * stderr).max(0.0),
        ci_high: nbar + Z95 * stderr,
        stderr,
        reduced_chi2,
        iterations: out.iterations,
        model: name.to_string(),
    })
}

/// Amplitudes `[0, 1.5/√(n̄+½)]` for a state expected to hold about
/// `nbar_guess` quanta. The contrast falls to about 0.1 at the last point;
/// the n̄ information per shot peaks near `α²(n̄+½) ≈ 0.8` and vanishes on the
/// ½ asymptote, so the grid stops short of it.
pub fn readout_alphas(nbar_guess: f64, points: usize) -> Vec<f64> {
    alpha_grid(nbar_guess, points, 1.5)
}

fn alpha_grid(nbar_guess: f64, points: usize, span: f64) -> Vec<f64> {
    let top = span / (nbar_guess.max(0.0) + 0.5).sqrt();
    (0..points)
        .map(|i| top * i as f64 / (points - 1) as f64)
        .collect()
}

/// n̄ reported by a noise-free leading-order readout fitted with the
/// Gaussian model; for non-thermal states this is the occupation of the
/// best-matching thermal core rather than `⟨n̂⟩`.
pub fn thermal_fraction_nbar(space: &FockSpace, state: &FockState, nbar_guess: f64) -> Result<f64> {
    let sim = ReadoutSimulator::with_basis(space.basis(), state);
    // reaches the ½ asymptote, as the experimental scans do
    let alphas = alpha_grid(nbar_guess, 50, 3.0);
    let probs = alphas.iter().map(|&a| sim.probability(a, 1.0)).collect();
    let curve = ReadoutCurve::new(alphas.clone(), probs, vec![0; alphas.len()])?;
    Ok(fit_nbar(&curve, &ReadoutModel::Gaussian)?.nbar)
}
