//! Blue-sideband flopping: `P(+Z, t) = ½(1 + env(t) Σ_n ρ_nn cos(Ω_{n,n+1} t))`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmOptions, LmOutcome};
use crate::noise::{sample_radial_rabi_scale, RadialModes};
use crate::oscillator::{sideband_coupling, FockState};
use crate::stats::{keyed_rng, percentile, wilson_interval, Z95};
use crate::{Error, Result};

/// Level above which [`RabiScaling::Auto`] leaves the `√(n+1)` law.
pub const LAMB_DICKE_LEVEL_LIMIT: usize = 15;

/// How the sideband Rabi frequency grows with the Fock level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RabiScaling {
    /// `Ω_{n,n+1} = Ω₀₁ √(n+1)`.
    LambDicke,
    /// Ratio of all-order matrix elements `|⟨n+1|D(iη)|n⟩| / |⟨1|D(iη)|0⟩|`.
    Exact { eta: f64 },
    /// `√(n+1)` up to [`LAMB_DICKE_LEVEL_LIMIT`], all-order above.
    Auto { eta: f64 },
}

/// `exp(−γ_e t − (γ_g t)²)`; rates in inverse time units of the curve.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayEnvelope {
    pub exponential: f64,
    pub gaussian: f64,
}

impl DecayEnvelope {
    pub fn at(&self, t: f64) -> f64 {
        (-self.exponential * t - (self.gaussian * t).powi(2)).exp()
    }
}

/// Sideband Rabi frequencies `Ω_{n,n+1}` for `n < levels`.
pub fn sideband_rabi_frequencies(rabi_0: f64, scaling: RabiScaling, levels: usize) -> Vec<f64> {
    let exact =
        |eta: f64, n: usize| (sideband_coupling(n + 1, eta) / sideband_coupling(1, eta)).abs();
    (0..levels)
        .map(|n| {
            rabi_0
                * match scaling {
                    RabiScaling::LambDicke => ((n + 1) as f64).sqrt(),
                    RabiScaling::Exact { eta } => exact(eta, n),
                    RabiScaling::Auto { eta } => {
                        if n > LAMB_DICKE_LEVEL_LIMIT {
                            exact(eta, n)
                        } else {
                            ((n + 1) as f64).sqrt()
                        }
                    }
                }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsbSettings {
    /// `Ω₀₁` in rad per time unit.
    pub rabi_0: f64,
    pub scaling: RabiScaling,
    #[serde(default)]
    pub envelope: DecayEnvelope,
    #[serde(default)]
    pub radial: Option<RadialModes>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BsbCurve {
    pub times: Vec<f64>,
    pub probs: Vec<f64>,
    pub shots: Vec<u32>,
    pub ci: Vec<(f64, f64)>,
    pub envelope: DecayEnvelope,
}

impl BsbCurve {
    pub fn new(
        times: Vec<f64>,
        probs: Vec<f64>,
        shots: Vec<u32>,
        envelope: DecayEnvelope,
    ) -> Result<Self> {
        if times.len() != probs.len() || times.len() != shots.len() {
            return Err(Error::invalid("sideband columns differ in length"));
        }
        if times.iter().any(|t| !(*t >= 0.0)) || probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid(
                "times must be >= 0 and probabilities in [0, 1]",
            ));
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
            times,
            probs,
            shots,
            ci,
            envelope,
        })
    }
}

fn flop(pops: &[f64], freqs: &[f64], env: f64, factor: f64, t: f64) -> f64 {
    let s: f64 = pops
        .iter()
        .zip(freqs)
        .map(|(p, w)| p * (w * factor * t).cos())
        .sum();
    (0.5 * (1.0 + env * s)).clamp(0.0, 1.0)
}

/// Evaluates the sideband signal of `state`'s populations. With `shots > 0`
/// each shot draws its own radial factor and a binary outcome.
pub fn simulate_bsb(
    state: &FockState,
    times: &[f64],
    settings: &BsbSettings,
    shots: u32,
    rng: &mut impl Rng,
) -> Result<BsbCurve> {
    let pops = state.populations();
    let freqs = sideband_rabi_frequencies(settings.rabi_0, settings.scaling, pops.len());
    let probs = times
        .iter()
        .map(|&t| {
            let env = settings.envelope.at(t);
            if shots == 0 {
                let dist = settings
                    .radial
                    .as_ref()
                    .map(|r| r.factor_distribution(256))
                    .unwrap_or_else(|| vec![(1.0, 1.0)]);
                return dist
                    .iter()
                    .map(|&(f, w)| w * flop(&pops, &freqs, env, f, t))
                    .sum();
            }
            let ups = match &settings.radial {
                Some(r) if !r.modes.is_empty() => (0..shots)
                    .filter(|_| {
                        let f = sample_radial_rabi_scale(r, rng);
                        rng.random::<f64>() < flop(&pops, &freqs, env, f, t)
                    })
                    .count() as u64,
                _ => Binomial::new(shots as u64, flop(&pops, &freqs, env, 1.0, t))
                    .unwrap()
                    .sample(rng),
            };
            ups as f64 / shots as f64
        })
        .collect();
    BsbCurve::new(
        times.to_vec(),
        probs,
        vec![shots; times.len()],
        settings.envelope,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitTailsOptions {
    pub rabi_0: f64,
    pub scaling: RabiScaling,
    /// Parametric bootstrap replicates for the tail-mass interval.
    pub bootstrap: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    /// Fitted `ρ_nn` for `n ≤ max_level`.
    pub populations: Vec<f64>,
    pub tail_mass: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub envelope: DecayEnvelope,
    /// Fitted multiplier on `Ω₀₁`.
    pub rabi_scale: f64,
    /// Mean excess level of the geometric tail above `max_level`.
    pub tail_mean_excess: f64,
    pub reduced_chi2: f64,
    pub identifiability_warning: bool,
    pub warnings: Vec<String>,
}

/// Levels above `max_level` are modelled as a geometric tail whose mean
/// excess is fitted; its weight is fixed by normalisation, so the signal at
/// `t = 0` is always full contrast.
struct TailModel<'a> {
    times: &'a [f64],
    /// `Ω_{n,n+1}` for the fitted levels followed by the tail levels.
    freqs: Vec<f64>,
    levels: usize,
    weights: Vec<f64>,
    /// Fit the tail mean; otherwise it stays at its starting value.
    free_tail: bool,
}

const TAIL_WEIGHT_CUTOFF: f64 = 1e-8;
const MAX_TAIL_LEVELS: usize = 4000;

/// Geometric weights of the tail levels `L+1, L+2, …` with mean excess `m`.
fn tail_weights(m: f64) -> Vec<f64> {
    let r = m / (m + 1.0);
    let count = (TAIL_WEIGHT_CUTOFF.ln() / r.ln())
        .ceil()
        .clamp(1.0, MAX_TAIL_LEVELS as f64) as usize;
    (0..count).map(|j| (1.0 - r) * r.powi(j as i32)).collect()
}

const TAIL_MEAN_BOUNDS: (f64, f64) = (0.05, 1e4);

impl TailModel<'_> {
    fn n_params(&self) -> usize {
        self.levels + 4
    }

    /// Low-level cosines and the normalised tail signal at every time.
    /// params: ρ_0..ρ_L, γ_e, γ_g, κ, tail mean excess.
    fn components(&self, k: f64, m: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let w = tail_weights(m);
        let freqs = &self.freqs;
        let l = self.levels;
        let low = self
            .times
            .iter()
            .map(|&t| (0..l).map(|n| (k * freqs[n] * t).cos()).collect())
            .collect();
        let tail = self
            .times
            .iter()
            .map(|&t| {
                w.iter()
                    .zip(&freqs[l..])
                    .map(|(wj, f)| wj * (k * f * t).cos())
                    .sum()
            })
            .collect();
        (low, tail)
    }

    fn predict(&self, p: &[f64]) -> Vec<f64> {
        let l = self.levels;
        let (low, tail) = self.components(p[l + 2], p[l + 3]);
        let rest = 1.0 - p[..l].iter().sum::<f64>();
        self.times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let env = DecayEnvelope {
                    exponential: p[l],
                    gaussian: p[l + 1],
                }
                .at(t);
                let s: f64 = (0..l).map(|n| p[n] * low[i][n]).sum::<f64>() + rest * tail[i];
                0.5 * (1.0 + env * s)
            })
            .collect()
    }

    fn eval(&self, p: &[f64], data: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let l = self.levels;
        let (ge, gg, k, m) = (p[l], p[l + 1], p[l + 2], p[l + 3]);
        let hk = 1e-6 * k;
        let hm = 1e-5 * m.max(1.0);
        let signal = |k: f64, m: f64| -> Vec<f64> {
            let (low, tail) = self.components(k, m);
            let rest = 1.0 - p[..l].iter().sum::<f64>();
            (0..self.times.len())
                .map(|i| (0..l).map(|n| p[n] * low[i][n]).sum::<f64>() + rest * tail[i])
                .collect()
        };
        let (low, tail) = self.components(k, m);
        let rest = 1.0 - p[..l].iter().sum::<f64>();
        let s_k = signal(k + hk, m);
        let s_m = if self.free_tail {
            signal(k, m + hm)
        } else {
            Vec::new()
        };
        let mut r = Vec::with_capacity(self.times.len());
        let mut jac = Vec::with_capacity(self.times.len());
        for (i, &t) in self.times.iter().enumerate() {
            let env = (-ge * t - (gg * t).powi(2)).exp();
            let sw = self.weights[i].sqrt();
            let sum = (0..l).map(|n| p[n] * low[i][n]).sum::<f64>() + rest * tail[i];
            let mut row = vec![0.0; l + 4];
            for n in 0..l {
                row[n] = sw * 0.5 * env * (low[i][n] - tail[i]);
            }
            row[l] = sw * 0.5 * env * sum * (-t);
            row[l + 1] = sw * 0.5 * env * sum * (-2.0 * gg * t * t);
            row[l + 2] = sw * 0.5 * env * (s_k[i] - sum) / hk;
            if self.free_tail {
                row[l + 3] = sw * 0.5 * env * (s_m[i] - sum) / hm;
            }
            r.push(sw * (0.5 * (1.0 + env * sum) - data[i]));
            jac.push(row);
        }
        (r, jac)
    }

    fn fit(&self, start: &[f64], data: &[f64]) -> LmOutcome {
        let l = self.levels;
        let mut lower = vec![0.0; l + 4];
        let mut upper = vec![1.0; l + 4];
        lower[l + 2] = 0.5;
        upper[l] = f64::INFINITY;
        upper[l + 1] = f64::INFINITY;
        upper[l + 2] = 1.5;
        if self.free_tail {
            lower[l + 3] = TAIL_MEAN_BOUNDS.0;
            upper[l + 3] = TAIL_MEAN_BOUNDS.1;
        } else {
            lower[l + 3] = start[l + 3];
            upper[l + 3] = start[l + 3];
        }
        levenberg_marquardt(
            |p| self.eval(p, data),
            start,
            &lower,
            &upper,
            &LmOptions::default(),
        )
    }

    /// Least-squares populations for fixed envelope, scale and tail shape,
    /// clipped to `[0, 1]`.
    fn linear_populations(
        &self,
        ge: f64,
        gg: f64,
        k: f64,
        m: f64,
        data: &[f64],
    ) -> (Vec<f64>, f64) {
        let l = self.levels;
        let mut p = vec![0.0; self.n_params()];
        p[l] = ge;
        p[l + 1] = gg;
        p[l + 2] = k;
        p[l + 3] = m;
        let (r0, jac) = self.eval(&p, data);
        let mut a = nalgebra::DMatrix::<f64>::zeros(l, l);
        let mut b = nalgebra::DVector::<f64>::zeros(l);
        for (ri, row) in r0.iter().zip(&jac) {
            for x in 0..l {
                b[x] -= row[x] * ri;
                for y in 0..l {
                    a[(x, y)] += row[x] * row[y];
                }
            }
        }
        for x in 0..l {
            a[(x, x)] += 1e-12;
        }
        let sol = a
            .lu()
            .solve(&b)
            .unwrap_or_else(|| nalgebra::DVector::zeros(l));
        for n in 0..l {
            p[n] = sol[n].clamp(0.0, 1.0);
        }
        let total: f64 = p[..l].iter().sum();
        if total > 1.0 {
            p[..l].iter_mut().for_each(|x| *x /= total);
        }
        let cost = self.eval(&p, data).0.iter().map(|x| x * x).sum();
        (p, cost)
    }
}

fn curve_weights(curve: &BsbCurve) -> Vec<f64> {
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

/// Fits low-level populations, envelope and Rabi scale to a sideband curve;
/// the tail mass is whatever the low levels do not account for.
pub fn fit_tails(
    curve: &BsbCurve,
    max_level: usize,
    options: &FitTailsOptions,
) -> Result<TailReport> {
    let l = max_level + 1;
    if curve.times.len() < l + 5 {
        return Err(Error::DegenerateData(format!(
            "{} points cannot constrain {} parameters",
            curve.times.len(),
            l + 4
        )));
    }
    let span = curve.times.iter().fold(0.0f64, |a, &t| a.max(t));
    if !(span > 0.0) {
        return Err(Error::DegenerateData(
            "sideband curve has no time span".into(),
        ));
    }
    let freqs = sideband_rabi_frequencies(options.rabi_0, options.scaling, l);
    let mut warnings = Vec::new();
    if options.rabi_0 * span < 2.0 * std::f64::consts::PI {
        warnings.push("time span shorter than one ground-state flop period".to_string());
    }
    let min_gap = freqs
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if l > 1 && min_gap * span < 2.0 * std::f64::consts::PI {
        warnings.push(format!(
            "frequencies up to level {max_level} are not resolved over the time span"
        ));
    }
    let model = TailModel {
        times: &curve.times,
        freqs: sideband_rabi_frequencies(options.rabi_0, options.scaling, l + MAX_TAIL_LEVELS),
        levels: l,
        weights: curve_weights(curve),
        free_tail: true,
    };

    // deterministic start: grid over envelope and scale with linear populations
    let rates = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];
    let mut best: Option<(Vec<f64>, f64)> = None;
    for &ge in &rates {
        for &gg in &rates {
            for &k in &[0.97, 1.0, 1.03] {
                for &m in &[1.0, 5.0, 20.0, 60.0] {
                    let cand = model.linear_populations(ge / span, gg / span, k, m, &curve.probs);
                    if best.as_ref().map_or(true, |b| cand.1 < b.1) {
                        best = Some(cand);
                    }
                }
            }
        }
    }
    let start = best.unwrap().0;
    let out = model.fit(&start, &curve.probs);
    if !out.converged || out.params.iter().any(|x| !x.is_finite()) {
        return Err(Error::FitDidNotConverge("sideband fit stalled".into()));
    }
    let pops = out.params[..l].to_vec();
    let tail_mass = 1.0 - pops.iter().sum::<f64>();

    let (ci_low, ci_high) = if options.bootstrap == 0 || curve.shots.iter().all(|&s| s == 0) {
        (tail_mass, tail_mass)
    } else {
        let fitted = model.predict(&out.params);
        // the tail shape is a weakly identified nuisance; hold it at the
        // point estimate so replicates only re-fit populations and envelope
        let replicate_model = TailModel {
            free_tail: false,
            ..model
        };
        let tails: Vec<f64> = (0..options.bootstrap)
            .map(|b| {
                let mut rng = keyed_rng(options.seed, b as u64, 0);
                let data: Vec<f64> = fitted
                    .iter()
                    .zip(&curve.shots)
                    .map(|(&p, &n)| {
                        Binomial::new(n as u64, p.clamp(0.0, 1.0))
                            .unwrap()
                            .sample(&mut rng) as f64
                            / n as f64
                    })
                    .collect();
                let refit = replicate_model.fit(&out.params, &data);
                1.0 - refit.params[..l].iter().sum::<f64>()
            })
            .collect();
        (percentile(&tails, 0.025), percentile(&tails, 0.975))
    };

    let dof = curve.times.len().saturating_sub(l + 4).max(1) as f64;
    Ok(TailReport {
        populations: pops,
        tail_mass,
        ci_low,
        ci_high,
        envelope: DecayEnvelope {
            exponential: out.params[l],
            gaussian: out.params[l + 1],
        },
        rabi_scale: out.params[l + 2],
        tail_mean_excess: out.params[l + 3],
        reduced_chi2: out.cost / dof,
        identifiability_warning: !warnings.is_empty(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn ground_state_flop() {
        let state = FockState::ground(8).unwrap();
        let settings = BsbSettings {
            rabi_0: 2.0,
            scaling: RabiScaling::LambDicke,
            envelope: DecayEnvelope::default(),
            radial: None,
        };
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let c = simulate_bsb(&state, &times, &settings, 0, &mut rng).unwrap();
        assert_eq!(c.probs[0], 1.0);
        for (t, p) in times.iter().zip(&c.probs) {
            assert!((p - 0.5 * (1.0 + (2.0 * t).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_scaling_tends_to_lamb_dicke() {
        let ld = sideband_rabi_frequencies(1.0, RabiScaling::LambDicke, 10);
        let ex = sideband_rabi_frequencies(1.0, RabiScaling::Exact { eta: 1e-4 }, 10);
        for (a, b) in ld.iter().zip(&ex) {
            assert!((a - b).abs() < 1e-6);
        }
        let big = sideband_rabi_frequencies(1.0, RabiScaling::Exact { eta: 0.05 }, 60);
        assert!(big[59] < 60f64.sqrt());
    }
}
