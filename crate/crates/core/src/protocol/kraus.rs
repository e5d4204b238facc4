use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::oscillator::{FockSpace, FockState, C64, TAIL_LIMIT};
use crate::semiclassical::RoundParams;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    Position,
    Momentum,
}

/// Which contraction is applied first within a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundOrder {
    #[default]
    PositionFirst,
    MomentumFirst,
}

/// The two Kraus operators of one contraction.
///
/// Position: `K_± = e^{∓2iαp̂} cos(2εq̂ ± π/4)`.
/// Momentum: `K_± = e^{∓2iαq̂} cos(2εp̂ ∓ π/4)`, so that positive `(ε, α)`
/// contract `p̂` just as they contract `q̂`.
#[derive(Debug, Clone)]
pub struct KrausPair {
    pub quadrature: Quadrature,
    pub epsilon: f64,
    pub alpha: f64,
    pub plus: Array2<C64>,
    pub minus: Array2<C64>,
}

pub fn build_kraus(
    space: &FockSpace,
    quadrature: Quadrature,
    epsilon: f64,
    alpha: f64,
) -> Result<KrausPair> {
    space.check_displacement(C64::new(alpha, 0.0))?;
    // (measured angle, shift angle, sign of the cosine phase for K_+)
    let (measured, shifted, sign) = match quadrature {
        Quadrature::Position => (0.0, FRAC_PI_2, 1.0),
        Quadrature::Momentum => (FRAC_PI_2, 0.0, -1.0),
    };
    let cos = |phase: f64| {
        space.quadrature_function(measured, move |x| {
            C64::new((2.0 * epsilon * x + phase).cos(), 0.0)
        })
    };
    let shift =
        |a: f64| space.quadrature_function(shifted, move |x| C64::from_polar(1.0, -2.0 * a * x));
    let plus = shift(alpha).dot(&cos(sign * FRAC_PI_4));
    let minus = shift(-alpha).dot(&cos(-sign * FRAC_PI_4));
    Ok(KrausPair {
        quadrature,
        epsilon,
        alpha,
        plus,
        minus,
    })
}

impl KrausPair {
    /// `max |K₊†K₊ + K₋†K₋ − I|` over the lowest `block` levels.
    pub fn completeness_error(&self, block: usize) -> f64 {
        let adj = |m: &Array2<C64>| m.t().mapv(|z| z.conj());
        let sum = adj(&self.plus).dot(&self.plus) + adj(&self.minus).dot(&self.minus);
        let mut worst = 0.0f64;
        for i in 0..block.min(sum.nrows()) {
            for j in 0..block.min(sum.nrows()) {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((sum[(i, j)] - C64::new(id, 0.0)).norm());
            }
        }
        worst
    }

    /// Averaged channel `Σ K ρ K†`.
    pub fn apply(&self, state: &FockState) -> FockState {
        state.apply_kraus(&[&self.plus, &self.minus])
    }

    /// Outcome probabilities `(P(+X), P(−X))` from the Kraus decomposition.
    pub fn outcome_probabilities(&self, state: &FockState) -> (f64, f64) {
        let p = |k: &Array2<C64>| {
            let kr = k.dot(state.matrix());
            let kh = k.t().mapv(|z| z.conj());
            kr.dot(&kh).diag().iter().map(|z| z.re).sum::<f64>()
        };
        (p(&self.plus), p(&self.minus))
    }
}

/// The modular observable whose expectation sets the spin outcome
/// probabilities, `P(±X) = ½(1 ∓ ⟨Ô⟩)`: `Ô = sin 4εq̂` for position and
/// `Ô = −sin 4εp̂` for the momentum pair's sign convention.
#[derive(Debug, Clone)]
pub struct MeasurementObservable {
    pub quadrature: Quadrature,
    pub epsilon: f64,
    pub matrix: Array2<C64>,
}

impl MeasurementObservable {
    pub fn new(space: &FockSpace, quadrature: Quadrature, epsilon: f64) -> Self {
        let matrix = match quadrature {
            Quadrature::Position => {
                space.quadrature_function(0.0, |x| C64::new((4.0 * epsilon * x).sin(), 0.0))
            }
            Quadrature::Momentum => {
                space.quadrature_function(FRAC_PI_2, |x| C64::new(-(4.0 * epsilon * x).sin(), 0.0))
            }
        };
        Self {
            quadrature,
            epsilon,
            matrix,
        }
    }

    pub fn expectation(&self, state: &FockState) -> f64 {
        let m = self.matrix.dot(state.matrix());
        m.diag().iter().map(|z| z.re).sum()
    }

    pub fn outcome_probabilities(&self, state: &FockState) -> (f64, f64) {
        let o = self.expectation(state);
        (0.5 * (1.0 - o), 0.5 * (1.0 + o))
    }
}

/// Both contractions of a round, built once and reusable across states.
#[derive(Debug, Clone)]
pub struct CoolingRound {
    pub position: KrausPair,
    pub momentum: KrausPair,
    pub order: RoundOrder,
    pub tail_limit: f64,
}

impl CoolingRound {
    pub fn new(
        space: &FockSpace,
        q: &RoundParams,
        p: &RoundParams,
        order: RoundOrder,
    ) -> Result<Self> {
        q.validate()?;
        p.validate()?;
        Ok(Self {
            position: build_kraus(space, Quadrature::Position, q.epsilon, q.alpha)?,
            momentum: build_kraus(space, Quadrature::Momentum, p.epsilon, p.alpha)?,
            order,
            tail_limit: TAIL_LIMIT,
        })
    }

    /// `ρ' = Σ K_{p,ν} K_{q,μ} ρ K_{q,μ}† K_{p,ν}†` (or the reverse order).
    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        let mut out = match self.order {
            RoundOrder::PositionFirst => self.momentum.apply(&self.position.apply(state)),
            RoundOrder::MomentumFirst => self.position.apply(&self.momentum.apply(state)),
        };
        out.symmetrize();
        out.check_truncation(self.tail_limit)?;
        Ok(out)
    }
}

/// One position-then-momentum round on `state`.
pub fn apply_round(
    space: &FockSpace,
    state: &FockState,
    q: &RoundParams,
    p: &RoundParams,
) -> Result<FockState> {
    CoolingRound::new(space, q, p, RoundOrder::PositionFirst)?.apply(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::ThermalSpec;

    fn max_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn trivial_parameters_give_scaled_identity() {
        let space = FockSpace::new(20).unwrap();
        let k = build_kraus(&space, Quadrature::Position, 0.0, 0.0).unwrap();
        for ((i, j), v) in k.plus.indexed_iter() {
            let e = if i == j { FRAC_PI_4.cos() } else { 0.0 };
            assert!((v - C64::new(e, 0.0)).norm() < 1e-12);
        }
        assert!(k.completeness_error(20) < 1e-12);
    }

    #[test]
    fn completeness_on_low_block() {
        let space = FockSpace::new(128).unwrap();
        for q in [Quadrature::Position, Quadrature::Momentum] {
            let k = build_kraus(&space, q, 0.25, 0.6).unwrap();
            assert!(k.completeness_error(64) < 1e-8);
        }
    }

    #[test]
    fn cosine_expands_into_two_displacements() {
        let space = FockSpace::new(80).unwrap();
        let eps = 0.31;
        for sign in [1.0, -1.0] {
            let direct = space.quadrature_function(0.0, |x| {
                C64::new((2.0 * eps * x + sign * FRAC_PI_4).cos(), 0.0)
            });
            let dp = space
                .displacement(C64::new(0.0, eps))
                .unwrap()
                .into_matrix();
            let dm = space
                .displacement(C64::new(0.0, -eps))
                .unwrap()
                .into_matrix();
            let expanded = (dp * C64::from_polar(0.5, sign * FRAC_PI_4))
                + (dm * C64::from_polar(0.5, -sign * FRAC_PI_4));
            assert!(max_diff(&direct, &expanded) < 1e-10);
        }
    }

    #[test]
    fn observable_matches_kraus_marginals() {
        let spec = ThermalSpec::new(3.0).unwrap();
        let space = FockSpace::new(96).unwrap();
        let state = FockState::thermal(&spec, 96).unwrap().rotated(0.3);
        // give the state a displacement so the probabilities are not ½
        let d = space.displacement(C64::new(0.7, -0.4)).unwrap();
        let state = state.apply_kraus(&[d.matrix()]);
        for q in [Quadrature::Position, Quadrature::Momentum] {
            let k = build_kraus(&space, q, 0.2, 0.5).unwrap();
            let o = MeasurementObservable::new(&space, q, 0.2);
            let (a, b) = k.outcome_probabilities(&state);
            let (c, d) = o.outcome_probabilities(&state);
            assert!((a - c).abs() < 1e-10 && (b - d).abs() < 1e-10, "{q:?}");
            assert!((a - 0.5).abs() > 1e-3);
        }
    }

    #[test]
    fn both_contractions_cool_their_quadrature() {
        let spec = ThermalSpec::new(5.0).unwrap();
        let space = FockSpace::new(144).unwrap();
        let state = FockState::thermal(&spec, 144).unwrap();
        let p = crate::semiclassical::optimal_classical_params(&spec);
        let m0 = state.moments();
        let q = build_kraus(&space, Quadrature::Position, p.epsilon, p.alpha)
            .unwrap()
            .apply(&state)
            .moments();
        let m = build_kraus(&space, Quadrature::Momentum, p.epsilon, p.alpha)
            .unwrap()
            .apply(&state)
            .moments();
        assert!(q.q2 < 0.75 * m0.q2);
        assert!(m.p2 < 0.75 * m0.p2);
    }
}
