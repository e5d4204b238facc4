//! Density-matrix propagation of the joint spin–oscillator state.
//!
//! Each integration step is a Strang splitting: half a step of the noise
//! channel, the exact drive unitary, then the second half of the noise.
//! Dephasing and detuning factors are exact exponentials; heating is
//! integrated with RK4 on its structured tridiagonal action.

use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use super::NoiseConfig;
use crate::measurement::LambDickeOrder;
use crate::oscillator::{FockState, QuadratureBasis, C64, TAIL_LIMIT};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
}

impl Pauli {
    pub fn phase(self) -> f64 {
        match self {
            Pauli::X => 0.0,
            Pauli::Y => FRAC_PI_2,
        }
    }
}

/// A spin-dependent force pulse `H = ηΩ σ_{φs} ⊗ (sin φ_m q̂ − cos φ_m p̂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    /// Ω in rad/s.
    pub rabi: f64,
    pub lamb_dicke: f64,
    pub spin_phase: f64,
    pub motional_phase: f64,
    /// Pulse length in s.
    pub duration: f64,
}

impl DriveConfig {
    /// Pulse realising `D(γ𝒫)` with `𝒫` the chosen Pauli operator.
    pub fn for_displacement(gamma: C64, pauli: Pauli, rabi: f64, lamb_dicke: f64) -> Result<Self> {
        if !(rabi > 0.0 && lamb_dicke > 0.0) {
            return Err(Error::invalid(
                "drive needs positive Rabi frequency and Lamb-Dicke parameter",
            ));
        }
        let theta = (-gamma.re).atan2(gamma.im);
        Ok(Self {
            rabi,
            lamb_dicke,
            spin_phase: pauli.phase(),
            motional_phase: (theta + 1.5 * PI).rem_euclid(2.0 * PI),
            duration: 2.0 * gamma.norm() / (lamb_dicke * rabi),
        })
    }

    /// The displacement amplitude this pulse realises at leading order.
    pub fn displacement(&self) -> C64 {
        let r = 0.5 * self.lamb_dicke * self.rabi * self.duration;
        let theta = self.motional_phase - 1.5 * PI;
        C64::new(-r * theta.sin(), r * theta.cos())
    }

    /// Quadrature angle `θ` of the generator `ηΩ X_θ`.
    fn generator_angle(&self) -> f64 {
        self.motional_phase - FRAC_PI_2
    }
}

/// Static per-trajectory offsets and the running clocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseContext {
    /// Lab time in s (sets the mains phase).
    pub time: f64,
    /// Time since the last spin reset in s.
    pub since_reset: f64,
    /// Axial frequency offset in rad/s.
    pub axial_offset: f64,
    /// Laser detuning in rad/s.
    pub laser_detuning: f64,
    /// Multiplier on the drive strength (calibration error and radial modes).
    pub rabi_scale: f64,
}

impl Default for PulseContext {
    fn default() -> Self {
        Self {
            time: 0.0,
            since_reset: 0.0,
            axial_offset: 0.0,
            laser_detuning: 0.0,
            rabi_scale: 1.0,
        }
    }
}

type Blocks = [Array2<C64>; 4];

fn to_blocks(state: &FockState) -> Blocks {
    [
        state.spin_block(0, 0),
        state.spin_block(0, 1),
        state.spin_block(1, 0),
        state.spin_block(1, 1),
    ]
}

fn from_blocks(b: Blocks) -> FockState {
    let n = b[0].nrows();
    let mut rho = Array2::zeros((2 * n, 2 * n));
    for (idx, block) in b.into_iter().enumerate() {
        let (a, c) = (idx / 2, idx % 2);
        rho.slice_mut(ndarray::s![a * n..(a + 1) * n, c * n..(c + 1) * n])
            .assign(&block);
    }
    FockState::from_raw(rho, true)
}

/// `out_{st} = Σ_{ab} conj(w_{as}) w_{bt} ρ_{ab}` (`W†ρW` blockwise).
fn spin_conjugate(b: &Blocks, w: [[C64; 2]; 2], adjoint: bool) -> Blocks {
    let coeff = |a: usize, s: usize, c: usize, t: usize| {
        if adjoint {
            w[s][a] * w[t][c].conj()
        } else {
            w[a][s].conj() * w[c][t]
        }
    };
    let mut out: Vec<Array2<C64>> = Vec::with_capacity(4);
    for s in 0..2 {
        for t in 0..2 {
            let mut acc = Array2::zeros(b[0].raw_dim());
            for a in 0..2 {
                for c in 0..2 {
                    let k = coeff(a, s, c, t);
                    if k.norm() > 0.0 {
                        acc.scaled_add(k, &b[a * 2 + c]);
                    }
                }
            }
            out.push(acc);
        }
    }
    out.try_into().unwrap()
}

fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Integrator for pulses and free evolution with a fixed noise model.
#[derive(Debug, Clone)]
pub struct Propagator {
    basis: QuadratureBasis,
    noise: NoiseConfig,
    step: f64,
    pub tail_limit: f64,
}

impl Propagator {
    /// `order` selects the leading-order or all-order drive generator.
    pub fn new(
        dim: usize,
        order: LambDickeOrder,
        lamb_dicke: f64,
        noise: &NoiseConfig,
    ) -> Result<Self> {
        noise.validate()?;
        let step = noise.step()?;
        let basis = match order {
            LambDickeOrder::Leading => QuadratureBasis::bare(dim),
            LambDickeOrder::Full => QuadratureBasis::lamb_dicke_dressed(dim, lamb_dicke),
        };
        Ok(Self {
            basis,
            noise: noise.clone(),
            step,
            tail_limit: TAIL_LIMIT,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn noise(&self) -> &NoiseConfig {
        &self.noise
    }

    fn check(&self, state: &FockState) -> Result<()> {
        if !state.with_spin() || state.dim() != self.dim() {
            return Err(Error::invalid(format!(
                "expected a joint state with oscillator dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    fn substeps(&self, duration: f64) -> usize {
        if duration <= 0.0 {
            0
        } else if self.step.is_finite() {
            (duration / self.step).ceil().max(1.0) as usize
        } else {
            1
        }
    }

    /// Applies one drive pulse with noise.
    pub fn evolve_pulse(
        &self,
        state: &FockState,
        drive: &DriveConfig,
        ctx: &mut PulseContext,
    ) -> Result<FockState> {
        self.check(state)?;
        let m = self.substeps(drive.duration);
        if m == 0 {
            return Ok(state.clone());
        }
        let h = drive.duration / m as f64;
        let strength = drive.lamb_dicke * drive.rabi * ctx.rabi_scale * h;
        let e_plus = self.basis.function_matrix(drive.generator_angle(), |x| {
            C64::from_polar(1.0, -strength * x)
        });
        let e_minus = adjoint(&e_plus);
        let phi = drive.spin_phase;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let w = [
            [C64::new(s, 0.0), C64::new(s, 0.0)],
            [C64::from_polar(s, phi), C64::from_polar(-s, phi)],
        ];
        let mut b = to_blocks(state);
        for _ in 0..m {
            self.noise_step(&mut b, 0.5 * h, ctx);
            let mut t = spin_conjugate(&b, w, false);
            t[0] = e_plus.dot(&t[0]).dot(&e_minus);
            t[1] = e_plus.dot(&t[1]).dot(&e_plus);
            t[2] = adjoint(&t[1]);
            t[3] = e_minus.dot(&t[3]).dot(&e_plus);
            b = spin_conjugate(&t, w, true);
            self.noise_step(&mut b, 0.5 * h, ctx);
        }
        let mut out = from_blocks(b);
        out.symmetrize();
        out.check_truncation(self.tail_limit)?;
        Ok(out)
    }

    /// Evolves under noise only for `duration` seconds.
    pub fn evolve_free(
        &self,
        state: &FockState,
        duration: f64,
        ctx: &mut PulseContext,
    ) -> Result<FockState> {
        self.check(state)?;
        let m = self.substeps(duration);
        let mut b = to_blocks(state);
        for _ in 0..m {
            self.noise_step(&mut b, duration / m as f64, ctx);
        }
        let mut out = from_blocks(b);
        out.symmetrize();
        out.check_truncation(self.tail_limit)?;
        Ok(out)
    }

    /// Noise channel over `[t, t+h]`; advances the clocks.
    fn noise_step(&self, b: &mut Blocks, h: f64, ctx: &mut PulseContext) {
        let noise = &self.noise;
        let (t0, t1) = (ctx.time, ctx.time + h);
        let (r0, r1) = (ctx.since_reset, ctx.since_reset + h);

        // spin coherence: laser detuning, Markovian and correlated dephasing
        let log_decay =
            -2.0 * noise.spin_dephasing_rate * h + 4.0 * noise.spin_dephasing.integral(r0, r1);
        let spin_factor = C64::from_polar(log_decay.exp(), -ctx.laser_detuning * h);
        b[1].mapv_inplace(|z| z * spin_factor);
        b[2].mapv_inplace(|z| z * spin_factor.conj());

        // oscillator: frequency offset, mains modulation and motional dephasing
        let phase = ctx.axial_offset * h + noise.mains_phase(t0, t1);
        let gamma_d = noise.osc_dephasing_rate();
        if phase != 0.0 || gamma_d > 0.0 {
            let n = b[0].nrows();
            let factors: Vec<C64> = (0..n)
                .map(|d| {
                    C64::from_polar(
                        (-0.5 * gamma_d * (d * d) as f64 * h).exp(),
                        -phase * d as f64,
                    )
                })
                .collect();
            for block in b.iter_mut() {
                Zip::indexed(block).for_each(|(j, k), z| {
                    let f = if j >= k {
                        factors[j - k]
                    } else {
                        factors[k - j].conj()
                    };
                    *z *= f;
                });
            }
        }

        if noise.heating_rate > 0.0 {
            for block in b.iter_mut() {
                heat(block, noise.heating_rate, h);
            }
        }
        ctx.time = t1;
        ctx.since_reset = r1;
    }
}

/// `γ(a†ρa − ½{aa†, ρ})` with `a†` truncated so the map is trace preserving.
fn heating_generator(rho: &Array2<C64>, rate: f64) -> Array2<C64> {
    let n = rho.nrows();
    let m = |j: usize| if j + 1 < n { (j + 1) as f64 } else { 0.0 };
    Array2::from_shape_fn((n, n), |(j, k)| {
        let gain = if j > 0 && k > 0 {
            rho[(j - 1, k - 1)] * ((j * k) as f64).sqrt()
        } else {
            C64::new(0.0, 0.0)
        };
        (gain - rho[(j, k)] * (0.5 * (m(j) + m(k)))) * rate
    })
}

fn heat(rho: &mut Array2<C64>, rate: f64, h: f64) {
    let n = rho.nrows() as f64;
    let pieces = ((rate * n * h) / 0.2).ceil().max(1.0) as usize;
    let dt = h / pieces as f64;
    for _ in 0..pieces {
        let k1 = heating_generator(rho, rate);
        let k2 = heating_generator(&(&*rho + &(&k1 * C64::new(0.5 * dt, 0.0))), rate);
        let k3 = heating_generator(&(&*rho + &(&k2 * C64::new(0.5 * dt, 0.0))), rate);
        let k4 = heating_generator(&(&*rho + &(&k3 * C64::new(dt, 0.0))), rate);
        let inc = (k1 + &k2 * C64::new(2.0, 0.0) + &k3 * C64::new(2.0, 0.0) + k4)
            * C64::new(dt / 6.0, 0.0);
        *rho += &inc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::{FockSpace, ThermalSpec};

    #[test]
    fn drive_round_trip() {
        for g in [
            C64::new(0.0, 0.3),
            C64::new(1.2, 0.0),
            C64::new(-0.4, 0.7),
            C64::new(0.0, -0.5),
        ] {
            let d = DriveConfig::for_displacement(g, Pauli::Y, 1e6, 0.05).unwrap();
            assert!((d.displacement() - g).norm() < 1e-12, "{g}");
            assert!((0.5 * d.lamb_dicke * d.rabi * d.duration - g.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_pulse_is_conditional_displacement() {
        let dim = 60;
        let spec = ThermalSpec::new(1.0).unwrap();
        let osc = FockState::thermal(&spec, dim).unwrap();
        let eps = 0.3;
        let prop =
            Propagator::new(dim, LambDickeOrder::Leading, 0.05, &NoiseConfig::none()).unwrap();
        let drive = DriveConfig::for_displacement(C64::new(0.0, eps), Pauli::Y, 1e6, 0.05).unwrap();
        let out = prop
            .evolve_pulse(&osc.with_spin_up(), &drive, &mut PulseContext::default())
            .unwrap();

        // oracle: Σ_y |y⟩⟨y| ⊗ D(iεy) built from displacement operators
        let space = FockSpace::new(dim).unwrap();
        let dp = space
            .displacement(C64::new(0.0, eps))
            .unwrap()
            .into_matrix();
        let dm = space
            .displacement(C64::new(0.0, -eps))
            .unwrap()
            .into_matrix();
        let half = C64::new(0.5, 0.0);
        let i_half = C64::new(0.0, 0.5);
        // spin starts in |+Z⟩, so only the first column of U matters; with
        // P_± = ½[[1, ∓i], [±i, 1]] it is (½(D₊ + D₋), ½i(D₊ − D₋))
        let u00 = (&dp + &dm) * half;
        let u10 = (&dp - &dm) * i_half;
        let rho = osc.matrix();
        let expect = |a: &Array2<C64>, b: &Array2<C64>| a.dot(rho).dot(&adjoint(b));
        let blocks = [
            expect(&u00, &u00),
            expect(&u00, &u10),
            expect(&u10, &u00),
            expect(&u10, &u10),
        ];
        let got = to_blocks(&out);
        for (g, e) in got.iter().zip(&blocks) {
            let diff = g
                .iter()
                .zip(e.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-9, "{diff}");
        }
    }

    #[test]
    fn heating_rate_near_ground() {
        let noise = NoiseConfig {
            heating_rate: 10.0,
            ..NoiseConfig::none()
        };
        let prop = Propagator::new(24, LambDickeOrder::Leading, 0.05, &noise).unwrap();
        let state = FockState::ground(24).unwrap().with_spin_up();
        let out = prop
            .evolve_free(&state, 1e-3, &mut PulseContext::default())
            .unwrap();
        let dn = out.mean_occupation();
        assert!((dn - 0.01).abs() < 0.001, "{dn}");
        assert!((out.trace().re - 1.0).abs() < 1e-12);
    }
}
