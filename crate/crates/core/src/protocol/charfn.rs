//! Characteristic-function description of a round acting on a thermal state.
//!
//! Every Kraus operator is a short linear combination of displacements, so
//! the post-round state is `Σ c D(γ) ρ_th D(χ)†`. Its normal-ordered
//! characteristic function is a sum of complex Gaussians in `β`, which makes
//! the mean occupation available in closed form.

use std::f64::consts::FRAC_PI_4;

use crate::oscillator::{ThermalSpec, C64};
use crate::semiclassical::RoundParams;

use super::RoundOrder;

/// One term `c · D(left) ρ D(right)†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementTerm {
    pub coefficient: C64,
    pub left: C64,
    pub right: C64,
    /// Spin outcomes `(μ, ν)` of the position and momentum contractions.
    pub branch: (i8, i8),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementSum {
    pub terms: Vec<DisplacementTerm>,
}

/// `D(x)D(y) = e^{phase(x,y)} D(x+y)`.
fn compose_phase(x: C64, y: C64) -> C64 {
    (x * y.conj() - x.conj() * y) * 0.5
}

/// `Σ c_k D(g_k)`.
type Poly = Vec<(C64, C64)>;

fn product(a: &Poly, b: &Poly) -> Poly {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &(ca, ga) in a {
        for &(cb, gb) in b {
            out.push((ca * cb * compose_phase(ga, gb).exp(), ga + gb));
        }
    }
    out
}

fn im(x: f64) -> C64 {
    C64::new(0.0, x)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `D(μα) cos(2εq̂ + μπ/4)` with `e^{2iεq̂} = D(iε)`.
fn position_kraus(p: &RoundParams, mu: f64) -> Poly {
    let cos = vec![
        (C64::from_polar(0.5, mu * FRAC_PI_4), im(p.epsilon)),
        (C64::from_polar(0.5, -mu * FRAC_PI_4), im(-p.epsilon)),
    ];
    product(&vec![(re(1.0), re(mu * p.alpha))], &cos)
}

/// `e^{−2iναq̂} cos(2εp̂ − νπ/4)` with `e^{2iεp̂} = D(−ε)`.
fn momentum_kraus(p: &RoundParams, nu: f64) -> Poly {
    let cos = vec![
        (C64::from_polar(0.5, -nu * FRAC_PI_4), re(-p.epsilon)),
        (C64::from_polar(0.5, nu * FRAC_PI_4), re(p.epsilon)),
    ];
    product(&vec![(re(1.0), im(-nu * p.alpha))], &cos)
}

/// Expands a position-then-momentum round into displacement terms: four
/// outcome branches, each contributing 16 terms of weight `1/16`.
pub fn expand_round_to_displacement_sum(q: &RoundParams, p: &RoundParams) -> DisplacementSum {
    expand_ordered(q, p, RoundOrder::PositionFirst)
}

pub(crate) fn expand_ordered(
    q: &RoundParams,
    p: &RoundParams,
    order: RoundOrder,
) -> DisplacementSum {
    let mut terms = Vec::with_capacity(64);
    for mu in [1i8, -1] {
        for nu in [1i8, -1] {
            let kq = position_kraus(q, mu as f64);
            let kp = momentum_kraus(p, nu as f64);
            let k = match order {
                RoundOrder::PositionFirst => product(&kp, &kq),
                RoundOrder::MomentumFirst => product(&kq, &kp),
            };
            for &(ci, gi) in &k {
                for &(cj, gj) in &k {
                    terms.push(DisplacementTerm {
                        coefficient: ci * cj.conj(),
                        left: gi,
                        right: gj,
                        branch: (mu, nu),
                    });
                }
            }
        }
    }
    DisplacementSum { terms }
}

impl DisplacementSum {
    /// The identity channel.
    pub fn identity() -> Self {
        Self {
            terms: vec![DisplacementTerm {
                coefficient: re(1.0),
                left: re(0.0),
                right: re(0.0),
                branch: (1, 1),
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms belonging to one outcome branch.
    pub fn branch(&self, mu: i8, nu: i8) -> impl Iterator<Item = &DisplacementTerm> {
        self.terms.iter().filter(move |t| t.branch == (mu, nu))
    }
}

/// Exponent `A(β) = A₀ + a₁β + a₂β* + a₁₁ββ*` of one term's contribution
/// `c·Tr(D(β)D(γ)ρ_th D(−χ)) e^{|β|²/2} = c·e^{A(β)}`.
struct Gaussian {
    a0: C64,
    a1: C64,
    a2: C64,
    a11: f64,
}

fn term_gaussian(t: &DisplacementTerm, nbar: f64) -> Gaussian {
    let (g, x) = (t.left, t.right);
    let h = nbar + 0.5;
    let d = g - x;
    Gaussian {
        a0: (x.conj() * g - x * g.conj()) * 0.5 - h * d.norm_sqr(),
        a1: (x.conj() + g.conj()) * 0.5 - d.conj() * h,
        a2: -(x + g) * 0.5 - d * h,
        a11: -nbar,
    }
}

/// Normal-ordered characteristic function `Tr(D(β)ρ₁) e^{|β|²/2}` of the
/// post-round state, evaluated term by term from the displacement algebra.
pub fn char_func(sum: &DisplacementSum, beta: C64, spec: &ThermalSpec) -> C64 {
    let h = spec.nbar() + 0.5;
    sum.terms
        .iter()
        .map(|t| {
            // D(−χ) D(β) D(γ) = e^{φ} D(Υ)
            let x = -t.right;
            let phase = compose_phase(x, beta) + compose_phase(x + beta, t.left);
            let upsilon = x + beta + t.left;
            t.coefficient * (phase - h * upsilon.norm_sqr() + beta.norm_sqr() / 2.0).exp()
        })
        .sum()
}

/// `⟨n⟩ = −∂²χ/∂β∂β*` at `β = 0`, differentiated analytically.
pub fn mean_occupation_from_char(sum: &DisplacementSum, spec: &ThermalSpec) -> f64 {
    let total: C64 = sum
        .terms
        .iter()
        .map(|t| {
            let g = term_gaussian(t, spec.nbar());
            t.coefficient * g.a0.exp() * (g.a11 + g.a1 * g.a2)
        })
        .sum();
    -total.re
}

/// Central finite-difference estimate of `−∂²χ/∂β∂β* = −¼∇²χ`.
pub fn mean_occupation_finite_difference(
    sum: &DisplacementSum,
    spec: &ThermalSpec,
    step: f64,
) -> f64 {
    let f = |b: C64| char_func(sum, b, spec);
    let lap = f(re(step)) + f(re(-step)) + f(im(step)) + f(im(-step)) - f(re(0.0)) * 4.0;
    -(lap.re / (step * step)) / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_channel() {
        let spec = ThermalSpec::new(7.0).unwrap();
        let id = DisplacementSum::identity();
        let b = C64::new(0.3, -0.2);
        assert!(
            (char_func(&id, b, &spec) - C64::new((-7.0 * b.norm_sqr()).exp(), 0.0)).norm() < 1e-14
        );
        assert!((mean_occupation_from_char(&id, &spec) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn term_structure() {
        let q = RoundParams::position(0.2, 0.7);
        let p = RoundParams::momentum(0.2, 0.7);
        let sum = expand_round_to_displacement_sum(&q, &p);
        assert_eq!(sum.len(), 64);
        for (mu, nu) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let terms: Vec<_> = sum.branch(mu, nu).collect();
            assert_eq!(terms.len(), 16);
            for t in terms {
                assert!((t.coefficient.norm() - 1.0 / 16.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn trivial_round_collapses_to_identity() {
        let z = RoundParams::position(0.0, 0.0);
        let sum = expand_round_to_displacement_sum(&z, &RoundParams::momentum(0.0, 0.0));
        let total: C64 = sum.terms.iter().map(|t| t.coefficient).sum();
        assert!((total - re(1.0)).norm() < 1e-14);
        assert!(sum
            .terms
            .iter()
            .all(|t| t.left.norm() == 0.0 && t.right.norm() == 0.0));
    }

    #[test]
    fn trace_is_preserved() {
        let spec = ThermalSpec::new(5.0).unwrap();
        let q = RoundParams::position(0.17, 0.9);
        let p = RoundParams::momentum(0.21, 0.6);
        let sum = expand_round_to_displacement_sum(&q, &p);
        assert!((char_func(&sum, re(0.0), &spec) - re(1.0)).norm() < 1e-12);
    }

    #[test]
    fn analytic_derivative_matches_finite_difference() {
        let spec = ThermalSpec::new(4.0).unwrap();
        let q = RoundParams::position(0.15, 1.1);
        let p = RoundParams::momentum(0.12, 0.8);
        let sum = expand_round_to_displacement_sum(&q, &p);
        let a = mean_occupation_from_char(&sum, &spec);
        let fd = mean_occupation_finite_difference(&sum, &spec, 1e-4);
        assert!((a - fd).abs() < 1e-6, "{a} vs {fd}");
    }
}
