//! Classical (Bayesian) description of one cooling round.
//!
//! The oscillator's position and momentum are treated as independent
//! classical variables with densities on a uniform grid. Measuring the spin
//! after the conditional displacement is a Bayes update of the quadrature
//! density, and the feedback displacement shifts each conditional density
//! back towards the origin.

use std::f64::consts::{E, FRAC_PI_2};

use serde::{Deserialize, Serialize};

use crate::optimize::golden_section;
use crate::oscillator::ThermalSpec;
use crate::{Error, Result};

/// Default grid half-width in units of the initial width `s`.
pub const DEFAULT_SPAN: f64 = 10.0;
/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 8192;

/// Parameters of one half-round (measurement pitch, feedback displacement
/// and the quadrature angles they act along).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub theta_m: f64,
    pub theta_c: f64,
}

impl RoundParams {
    /// Position contraction: measure `q̂`, correct along `q̂` via `p̂`.
    pub fn position(epsilon: f64, alpha: f64) -> Self {
        Self {
            epsilon,
            alpha,
            theta_m: FRAC_PI_2,
            theta_c: 0.0,
        }
    }

    /// Momentum contraction, rotated by a quarter turn.
    pub fn momentum(epsilon: f64, alpha: f64) -> Self {
        Self {
            epsilon,
            alpha,
            theta_m: 0.0,
            theta_c: -FRAC_PI_2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::invalid(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::invalid(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// `(P(+X|x), P(−X|x)) = ½(1 ∓ sin 4εx)`.
pub fn conditional_prob(x: f64, epsilon: f64) -> (f64, f64) {
    let s = (4.0 * epsilon * x).sin();
    let plus = 0.5 * (1.0 - s);
    (plus, 1.0 - plus)
}

/// Probability density sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    x0: f64,
    dx: f64,
    fs: Vec<f64>,
}

impl GridDensity {
    /// Samples `fs` at `x0 + i·dx`, renormalised by the trapezoid rule.
    pub fn from_samples(x0: f64, dx: f64, fs: Vec<f64>) -> Result<Self> {
        if fs.len() < 3 || !(dx > 0.0) {
            return Err(Error::invalid(
                "grid needs at least three points and positive spacing",
            ));
        }
        if fs.iter().any(|f| !(*f >= 0.0)) {
            return Err(Error::invalid("density samples must be non-negative"));
        }
        let mut g = Self { x0, dx, fs };
        let total = g.total();
        if !(total > 0.0) {
            return Err(Error::invalid("density has zero mass"));
        }
        g.fs.iter_mut().for_each(|f| *f /= total);
        Ok(g)
    }

    /// Centred Gaussian of standard deviation `s` on `±half_width`.
    pub fn gaussian(s: f64, half_width: f64, points: usize) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::invalid("Gaussian width must be positive"));
        }
        let dx = 2.0 * half_width / (points - 1) as f64;
        let x0 = -half_width;
        let fs = (0..points)
            .map(|i| {
                let x = x0 + dx * i as f64;
                (-x * x / (2.0 * s * s)).exp()
            })
            .collect();
        Self::from_samples(x0, dx, fs)
    }

    /// Gaussian on the default grid (±10 s, 8192 points).
    pub fn thermal(spec: &ThermalSpec) -> Result<Self> {
        let s = spec.width();
        Self::gaussian(s, DEFAULT_SPAN * s, DEFAULT_POINTS)
    }

    pub fn len(&self) -> usize {
        self.fs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fs.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    pub fn fs(&self) -> &[f64] {
        &self.fs
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.x_max() - self.x0)
    }

    fn trapezoid(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        let n = self.len();
        let inner: f64 = (1..n - 1).map(|i| g(self.x(i), self.fs[i])).sum();
        self.dx * (inner + 0.5 * (g(self.x0, self.fs[0]) + g(self.x_max(), self.fs[n - 1])))
    }

    pub fn total(&self) -> f64 {
        self.trapezoid(|_, f| f)
    }

    pub fn mean(&self) -> f64 {
        self.trapezoid(|x, f| x * f)
    }

    pub fn second_moment(&self) -> f64 {
        self.trapezoid(|x, f| x * x * f)
    }

    /// Grid point of the largest density sample.
    pub fn mode(&self) -> f64 {
        let i = (0..self.len())
            .max_by(|&a, &b| self.fs[a].total_cmp(&self.fs[b]))
            .unwrap();
        self.x(i)
    }

    /// Linear interpolation, zero outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        interpolate(self.x0, self.dx, &self.fs, x)
    }

    /// Mass of the piecewise-linear density on `[a, b]`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.x0);
        let b = b.min(self.x_max());
        if b <= a {
            return 0.0;
        }
        let first = ((a - self.x0) / self.dx).floor() as usize;
        let last = (((b - self.x0) / self.dx).ceil() as usize).min(self.len() - 1);
        let mut total = 0.0;
        for i in first..last {
            let l = self.x(i).max(a);
            let r = self.x(i + 1).min(b);
            if r > l {
                total += (r - l) * 0.5 * (self.eval(l) + self.eval(r));
            }
        }
        total
    }
}

fn interpolate(x0: f64, dx: f64, fs: &[f64], x: f64) -> f64 {
    let pos = (x - x0) / dx;
    if pos < 0.0 || pos > (fs.len() - 1) as f64 {
        return 0.0;
    }
    let i = (pos.floor() as usize).min(fs.len() - 2);
    let t = pos - i as f64;
    fs[i] * (1.0 - t) + fs[i + 1] * t
}

/// `∫_{|x| > k·s_ref} f dx`.
pub fn tail_mass(f: &GridDensity, k: f64, s_ref: f64) -> f64 {
    let cut = k * s_ref;
    f.total() - f.mass_between(-cut, cut)
}

/// Intermediate and final densities of one Bayes update.
#[derive(Debug, Clone)]
pub struct BayesUpdate {
    pub prob_plus: f64,
    pub prob_minus: f64,
    /// `m₁(x|+X)`, normalised.
    pub posterior_plus: GridDensity,
    /// `m₁(x|−X)`, normalised.
    pub posterior_minus: GridDensity,
    /// `f₁(x) = P(+X) m₁(x−α|+X) + P(−X) m₁(x+α|−X)`.
    pub updated: GridDensity,
}

/// One measurement-and-feedback update of a quadrature density.
pub fn bayes_round(f: &GridDensity, params: &RoundParams) -> Result<BayesUpdate> {
    params.validate()?;
    let alpha = params.alpha;
    if alpha >= f.half_width() / 2.0 {
        return Err(Error::GridTooNarrow(format!(
            "shift {alpha} is not below half the grid half-width {}",
            f.half_width()
        )));
    }
    let n = f.len();
    let mut gp = Vec::with_capacity(n);
    let mut gm = Vec::with_capacity(n);
    for i in 0..n {
        let (pp, pm) = conditional_prob(f.x(i), params.epsilon);
        gp.push(pp * f.fs[i]);
        gm.push(pm * f.fs[i]);
    }
    let weigh = |g: &[f64]| {
        GridDensity {
            x0: f.x0,
            dx: f.dx,
            fs: g.to_vec(),
        }
        .total()
    };
    let prob_plus = weigh(&gp);
    let prob_minus = weigh(&gm);

    // mass pushed off either end by the feedback shift
    let clipped: f64 = (0..n)
        .map(|i| {
            let x = f.x(i);
            let mut c = 0.0;
            if x > f.x_max() - alpha {
                c += gp[i];
            }
            if x < f.x0 + alpha {
                c += gm[i];
            }
            c
        })
        .sum::<f64>()
        * f.dx;
    if clipped > 1e-8 {
        return Err(Error::GridTooNarrow(format!(
            "feedback shift clips {clipped:.3e} of the mass"
        )));
    }

    let updated: Vec<f64> = (0..n)
        .map(|i| {
            let x = f.x(i);
            interpolate(f.x0, f.dx, &gp, x - alpha) + interpolate(f.x0, f.dx, &gm, x + alpha)
        })
        .collect();
    let posterior = |g: Vec<f64>, p: f64| -> Result<GridDensity> {
        if p > 0.0 {
            GridDensity::from_samples(f.x0, f.dx, g)
        } else {
            Ok(f.clone())
        }
    };
    Ok(BayesUpdate {
        prob_plus,
        prob_minus,
        posterior_plus: posterior(gp, prob_plus)?,
        posterior_minus: posterior(gm, prob_minus)?,
        updated: GridDensity::from_samples(f.x0, f.dx, updated)?,
    })
}

/// Factorised classical phase-space density `w(q, p) = f(q) g(p)`.
#[derive(Debug, Clone)]
pub struct PhaseSpaceDensity {
    pub position: GridDensity,
    pub momentum: GridDensity,
}

impl PhaseSpaceDensity {
    pub fn thermal(spec: &ThermalSpec) -> Result<Self> {
        let f = GridDensity::thermal(spec)?;
        Ok(Self {
            position: f.clone(),
            momentum: f,
        })
    }

    /// `⟨q²⟩ + ⟨p²⟩` in units of ħω.
    pub fn energy(&self) -> f64 {
        self.position.second_moment() + self.momentum.second_moment()
    }

    /// Position contraction followed by momentum contraction.
    pub fn cool_round(&self, q: &RoundParams, p: &RoundParams) -> Result<Self> {
        Ok(Self {
            position: bayes_round(&self.position, q)?.updated,
            momentum: bayes_round(&self.momentum, p)?.updated,
        })
    }
}

/// Per-quadrature variance after a round, `α² + s²(1 − 8αε e^{−8ε²s²})`.
pub fn classical_quadrature_variance(epsilon: f64, alpha: f64, s: f64) -> f64 {
    alpha * alpha + s * s * (1.0 - 8.0 * alpha * epsilon * (-8.0 * epsilon * epsilon * s * s).exp())
}

/// Mean energy after a round on a thermal state, in units of ħω.
pub fn classical_energy(epsilon: f64, alpha: f64, spec: &ThermalSpec) -> f64 {
    2.0 * classical_quadrature_variance(epsilon, alpha, spec.width())
}

/// Feedback displacement minimising the classical energy at fixed `ε`.
pub fn optimal_classical_alpha(epsilon: f64, s: f64) -> f64 {
    4.0 * s * s * epsilon * (-8.0 * epsilon * epsilon * s * s).exp()
}

/// `ε_o = 1/(4s)`, `α_o = s/√e` for a position contraction.
pub fn optimal_classical_params(spec: &ThermalSpec) -> RoundParams {
    let s = spec.width();
    RoundParams::position(0.25 / s, s / E.sqrt())
}

/// Independent 2-D numerical minimisation of [`classical_energy`]:
/// golden-section over `ε` with an inner golden-section over `α`.
/// Returns `(ε, α, energy)`.
pub fn minimize_classical_energy(spec: &ThermalSpec) -> (f64, f64, f64) {
    let s = spec.width();
    let st = s.max(1.0);
    let inner = |eps: f64| {
        golden_section(
            |a| classical_energy(eps, a, spec),
            0.0,
            4.0 * s,
            1e-12 * st,
            400,
        )
    };
    let outer = golden_section(|eps| inner(eps).value, 1e-4 / st, 4.0 / st, 1e-12 / st, 400);
    let a = inner(outer.x);
    (outer.x, a.x, a.value)
}
