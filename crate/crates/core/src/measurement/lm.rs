//! Bounded Levenberg–Marquardt least squares.

use nalgebra::{DMatrix, DVector};

/// Residual vector and Jacobian (`jac[i][j] = ∂r_i/∂x_j`) at a point.
pub type Evaluation = (Vec<f64>, Vec<Vec<f64>>);

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative cost decrease below which the fit is considered converged.
    pub cost_tolerance: f64,
    pub step_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            cost_tolerance: 1e-12,
            step_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `JᵀJ` at the solution.
    pub normal_matrix: DMatrix<f64>,
}

impl LmOutcome {
    /// `(JᵀJ)⁻¹`, if invertible.
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        self.normal_matrix.clone().try_inverse()
    }
}

fn normal_equations(r: &[f64], jac: &[Vec<f64>], np: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut h = DMatrix::zeros(np, np);
    let mut g = DVector::zeros(np);
    for (ri, row) in r.iter().zip(jac) {
        for a in 0..np {
            g[a] += row[a] * ri;
            for b in a..np {
                h[(a, b)] += row[a] * row[b];
            }
        }
    }
    for a in 0..np {
        for b in 0..a {
            h[(a, b)] = h[(b, a)];
        }
    }
    (h, g)
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Minimises `Σ r_i(x)²` subject to `lower ≤ x ≤ upper` (box projection).
pub fn levenberg_marquardt(
    eval: impl Fn(&[f64]) -> Evaluation,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    options: &LmOptions,
) -> LmOutcome {
    let np = x0.len();
    let clamp = |x: &mut Vec<f64>| {
        for i in 0..np {
            x[i] = x[i].clamp(lower[i], upper[i]);
        }
    };
    let mut x = x0.to_vec();
    clamp(&mut x);
    let (mut r, mut jac) = eval(&x);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        let (h, g) = normal_equations(&r, &jac, np);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = h.clone();
            for i in 0..np {
                a[(i, i)] += lambda * h[(i, i)].max(1e-12);
            }
            let Some(delta) = a
                .clone()
                .cholesky()
                .map(|ch| ch.solve(&(-&g)))
                .or_else(|| a.lu().solve(&(-&g)))
            else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            clamp(&mut trial);
            let (rt, jt) = eval(&trial);
            let ct = cost(&rt);
            if ct.is_finite() && ct <= c {
                let step: f64 = trial
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b).abs() / (b.abs() + 1e-12))
                    .fold(0.0, f64::max);
                let rel = (c - ct) / c.max(1e-300);
                x = trial;
                r = rt;
                jac = jt;
                c = ct;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if rel < options.cost_tolerance || step < options.step_tolerance {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no downhill step exists at any damping: stationary point
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    let (normal_matrix, _) = normal_equations(&r, &jac, np);
    LmOutcome {
        params: x,
        cost: c,
        iterations,
        converged,
        normal_matrix,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_an_exponential() {
        let ts: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.5 * (-1.3 * t).exp()).collect();
        let eval = |p: &[f64]| {
            let r = ts
                .iter()
                .zip(&ys)
                .map(|(t, y)| p[0] * (-p[1] * t).exp() - y)
                .collect();
            let j = ts
                .iter()
                .map(|t| vec![(-p[1] * t).exp(), -p[0] * t * (-p[1] * t).exp()])
                .collect();
            (r, j)
        };
        let out = levenberg_marquardt(
            eval,
            &[1.0, 0.5],
            &[0.0, 0.0],
            &[10.0, 10.0],
            &LmOptions::default(),
        );
        assert!(out.converged);
        assert!((out.params[0] - 2.5).abs() < 1e-8 && (out.params[1] - 1.3).abs() < 1e-8);
    }

    #[test]
    fn respects_bounds() {
        let eval = |p: &[f64]| (vec![p[0] + 1.0], vec![vec![1.0]]);
        let out = levenberg_marquardt(eval, &[3.0], &[0.0], &[5.0], &LmOptions::default());
        assert_eq!(out.params[0], 0.0);
    }
}
