use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, UnitSphere};

use super::{EmissionPattern, RecoilConfig};
use crate::oscillator::{FockState, QuadratureBasis, C64};
use crate::{Error, Result};

fn emission_projection(pattern: &EmissionPattern, rng: &mut impl Rng) -> f64 {
    loop {
        let [x, _, z]: [f64; 3] = UnitSphere.sample(rng);
        match *pattern {
            EmissionPattern::Isotropic => return z,
            EmissionPattern::Dipole { axis_angle } => {
                let along = x * axis_angle.sin() + z * axis_angle.cos();
                if rng.random::<f64>() < 1.0 - along * along {
                    return z;
                }
            }
        }
    }
}

/// Momentum kicks `Δp` along the mode axis, one per Monte-Carlo sample, each
/// summed over all photons scattered in one reset.
pub fn sample_recoil_kicks(recoil: &RecoilConfig, rng: &mut impl Rng) -> Vec<f64> {
    (0..recoil.samples)
        .map(|_| {
            recoil
                .photons
                .iter()
                .map(|ph| {
                    ph.lamb_dicke
                        * (ph.absorption_projection + emission_projection(&ph.emission, rng))
                })
                .sum()
        })
        .collect()
}

/// Optical pumping to `|+Z⟩`: the `|+Z⟩` component is kept, the `|−Z⟩`
/// component is returned with its oscillator state averaged over recoil kicks.
pub fn repump(state: &FockState, recoil: &RecoilConfig, rng: &mut impl Rng) -> Result<FockState> {
    let basis = QuadratureBasis::bare(state.dim());
    repump_in(&basis, state, recoil, rng)
}

/// [`repump`] with a precomputed position basis of matching dimension.
pub fn repump_in(
    basis: &QuadratureBasis,
    state: &FockState,
    recoil: &RecoilConfig,
    rng: &mut impl Rng,
) -> Result<FockState> {
    if !state.with_spin() {
        return Err(Error::invalid("repump needs a joint spin-oscillator state"));
    }
    let kept = state.spin_block(0, 0);
    let mut pumped = state.spin_block(1, 1);
    if recoil.enabled && recoil.samples > 0 && !recoil.photons.is_empty() {
        if basis.dim() != state.dim() {
            return Err(Error::invalid(
                "recoil basis dimension does not match the state",
            ));
        }
        let kicks = sample_recoil_kicks(recoil, rng);
        // D(iΔ) = e^{2iΔq̂} is diagonal in the position eigenbasis
        let v = basis.vectors().mapv(|x| C64::new(x, 0.0));
        let x = basis.nodes();
        let mut tilde = v.t().dot(&pumped).dot(&v);
        let inv = 1.0 / kicks.len() as f64;
        let n = x.len();
        let factor = Array2::from_shape_fn((n, n), |(j, k)| {
            let d = 2.0 * (x[j] - x[k]);
            kicks
                .iter()
                .map(|&kick| C64::from_polar(1.0, kick * d))
                .sum::<C64>()
                * inv
        });
        tilde *= &factor;
        pumped = v.dot(&tilde).dot(&v.t());
    }
    let mut osc = FockState::from_raw(kept + pumped, false);
    osc.symmetrize();
    Ok(osc.with_spin_up())
}
