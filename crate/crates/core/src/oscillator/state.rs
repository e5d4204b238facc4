use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{s, Array2};

use super::{ThermalSpec, C64, TAIL_FRACTION, TAIL_LIMIT};
use crate::{Error, Result};

/// Density matrix of the oscillator, optionally joint with a two-level spin.
///
/// Joint states are stored spin-major: index `s·N + n` with `s = 0` for
/// `|+Z⟩` and `s = 1` for `|−Z⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    dim: usize,
    with_spin: bool,
    rho: Array2<C64>,
}

/// First and second quadrature moments plus the mean energy in units of ħω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub energy: f64,
    pub mean_q: f64,
    pub mean_p: f64,
    pub q2: f64,
    pub p2: f64,
}

impl FockState {
    /// Thermal state renormalised on `dim` levels.
    pub fn thermal(spec: &ThermalSpec, dim: usize) -> Result<Self> {
        let tail = spec.tail_beyond(dim);
        if tail > TAIL_LIMIT {
            return Err(Error::truncation(
                dim,
                format!("thermal tail mass {tail:.3e} beyond the cut-off"),
            ));
        }
        let pops: Vec<f64> = (0..dim).map(|n| spec.population(n)).collect();
        let norm: f64 = pops.iter().sum();
        let mut rho = Array2::zeros((dim, dim));
        for (n, p) in pops.iter().enumerate() {
            rho[(n, n)] = C64::new(p / norm, 0.0);
        }
        Ok(Self {
            dim,
            with_spin: false,
            rho,
        })
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::truncation(
                dim,
                format!("level {n} outside the space"),
            ));
        }
        let mut rho = Array2::zeros((dim, dim));
        rho[(n, n)] = C64::new(1.0, 0.0);
        Ok(Self {
            dim,
            with_spin: false,
            rho,
        })
    }

    pub fn ground(dim: usize) -> Result<Self> {
        Self::fock(0, dim)
    }

    /// Diagonal state with the given (renormalised) populations.
    pub fn from_populations(pops: &[f64]) -> Result<Self> {
        let total: f64 = pops.iter().sum();
        if pops.iter().any(|p| !(*p >= 0.0)) || total <= 0.0 {
            return Err(Error::invalid(
                "populations must be non-negative with positive sum",
            ));
        }
        let dim = pops.len();
        let mut rho = Array2::zeros((dim, dim));
        for (n, p) in pops.iter().enumerate() {
            rho[(n, n)] = C64::new(p / total, 0.0);
        }
        Ok(Self {
            dim,
            with_spin: false,
            rho,
        })
    }

    /// Wraps a density matrix after checking shape and trace.
    pub fn from_matrix(rho: Array2<C64>, with_spin: bool) -> Result<Self> {
        let (r, c) = rho.dim();
        if r != c || r == 0 || (with_spin && r % 2 != 0) {
            return Err(Error::invalid(format!(
                "density matrix must be square, got {r}x{c}"
            )));
        }
        let dim = if with_spin { r / 2 } else { r };
        let state = Self {
            dim,
            with_spin,
            rho,
        };
        let tr = state.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::invalid(format!("trace {tr} differs from 1")));
        }
        Ok(state)
    }

    pub(crate) fn from_raw(rho: Array2<C64>, with_spin: bool) -> Self {
        let dim = if with_spin {
            rho.nrows() / 2
        } else {
            rho.nrows()
        };
        Self {
            dim,
            with_spin,
            rho,
        }
    }

    /// Oscillator truncation dimension `N`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn with_spin(&self) -> bool {
        self.with_spin
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.rho
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.diag().sum()
    }

    /// Joint state `|+Z⟩⟨+Z| ⊗ ρ`.
    pub fn with_spin_up(&self) -> Self {
        let osc = self.oscillator();
        let n = self.dim;
        let mut rho = Array2::zeros((2 * n, 2 * n));
        rho.slice_mut(s![..n, ..n]).assign(osc.matrix());
        Self {
            dim: n,
            with_spin: true,
            rho,
        }
    }

    /// Reduced oscillator state (partial trace over the spin if present).
    pub fn oscillator(&self) -> FockState {
        if !self.with_spin {
            return self.clone();
        }
        let n = self.dim;
        let rho = &self.rho.slice(s![..n, ..n]) + &self.rho.slice(s![n.., n..]);
        Self {
            dim: n,
            with_spin: false,
            rho,
        }
    }

    /// Spin-block `⟨a|ρ|b⟩` of a joint state.
    pub fn spin_block(&self, a: usize, b: usize) -> Array2<C64> {
        assert!(self.with_spin && a < 2 && b < 2);
        let n = self.dim;
        self.rho
            .slice(s![a * n..(a + 1) * n, b * n..(b + 1) * n])
            .to_owned()
    }

    /// Probability of the spin being in `|+Z⟩`.
    pub fn spin_up_probability(&self) -> f64 {
        assert!(self.with_spin);
        (0..self.dim).map(|k| self.rho[(k, k)].re).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        let osc = self.oscillator();
        osc.rho.diag().iter().map(|z| z.re).collect()
    }

    pub fn mean_occupation(&self) -> f64 {
        self.populations()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    pub fn mean_energy(&self) -> f64 {
        self.mean_occupation() + 0.5 * self.trace().re
    }

    pub fn moments(&self) -> Moments {
        let osc = self.oscillator();
        let rho = &osc.rho;
        let n_mean = osc.mean_occupation();
        let tr = osc.trace().re;
        // ⟨a⟩ = Σ √(n+1) ρ_{n+1,n}, ⟨a²⟩ = Σ √((n+1)(n+2)) ρ_{n+2,n}
        let mut a1 = C64::new(0.0, 0.0);
        let mut a2 = C64::new(0.0, 0.0);
        for n in 0..self.dim {
            if n + 1 < self.dim {
                a1 += rho[(n + 1, n)] * ((n + 1) as f64).sqrt();
            }
            if n + 2 < self.dim {
                a2 += rho[(n + 2, n)] * (((n + 1) * (n + 2)) as f64).sqrt();
            }
        }
        Moments {
            energy: n_mean + 0.5 * tr,
            mean_q: a1.re,
            mean_p: a1.im,
            q2: (2.0 * a2.re + 2.0 * n_mean + tr) / 4.0,
            p2: (-2.0 * a2.re + 2.0 * n_mean + tr) / 4.0,
        }
    }

    /// Oscillator population in the top `fraction` of Fock levels.
    pub fn tail_mass(&self, fraction: f64) -> f64 {
        let pops = self.populations();
        let k = ((self.dim as f64 * fraction).ceil() as usize).clamp(1, self.dim);
        pops[self.dim - k..].iter().sum()
    }

    /// Returns an error if the top [`TAIL_FRACTION`] of levels holds more
    /// than `limit` of the population.
    pub fn check_truncation(&self, limit: f64) -> Result<()> {
        let tail = self.tail_mass(TAIL_FRACTION);
        if tail > limit {
            return Err(Error::truncation(
                self.dim,
                format!(
                    "population {tail:.3e} in the top {:.0}% of levels",
                    TAIL_FRACTION * 100.0
                ),
            ));
        }
        Ok(())
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        let n = self.rho.nrows();
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the (Hermitian part of the) density matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.rho.nrows();
        let m = DMatrix::from_fn(n, n, |i, j| {
            (self.rho[(i, j)] + self.rho[(j, i)].conj()) * 0.5
        });
        let eig = SymmetricEigen::new(m);
        eig.eigenvalues.iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn von_neumann_entropy(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .filter(|&l| l > 1e-15)
            .map(|l| -l * l.ln())
            .sum()
    }

    /// Checks Hermiticity (1e-12), unit trace (1e-9) and positivity (−1e-9).
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_error();
        if h > 1e-12 {
            return Err(Error::invalid(format!(
                "density matrix not Hermitian (error {h:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("trace {} differs from 1", tr.re)));
        }
        let min = self.min_eigenvalue();
        if min < -1e-9 {
            return Err(Error::invalid(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// `U ρ U†` with `U = e^{iθn̂}`, mapping `q̂ → cos θ q̂ + sin θ p̂`
    /// in the Heisenberg sense of `Tr(Uρ U† X) = Tr(ρ U† X U)`.
    pub fn rotated(&self, angle: f64) -> FockState {
        let n = self.dim;
        let mut rho = self.rho.clone();
        for ((i, j), v) in rho.indexed_iter_mut() {
            let (a, b) = (i % n, j % n);
            *v *= C64::from_polar(1.0, angle * (a as f64 - b as f64));
        }
        Self {
            dim: n,
            with_spin: self.with_spin,
            rho,
        }
    }

    /// Maps `ρ → Σ_k A_k ρ A_k†` over an oscillator-only state.
    pub(crate) fn apply_kraus(&self, ops: &[&Array2<C64>]) -> FockState {
        assert!(!self.with_spin);
        let mut out = Array2::zeros(self.rho.raw_dim());
        for a in ops {
            let ar = a.dot(&self.rho);
            let ah = a.t().mapv(|z| z.conj());
            out += &ar.dot(&ah);
        }
        Self {
            dim: self.dim,
            with_spin: false,
            rho: out,
        }
    }

    /// Forces exact Hermiticity by averaging with the adjoint.
    pub(crate) fn symmetrize(&mut self) {
        let h = self.rho.t().mapv(|z| z.conj());
        self.rho = (&self.rho + &h) * 0.5;
    }
}

/// Mean energy `Tr(ρ(n̂ + ½))` in units of ħω.
pub fn mean_energy(state: &FockState) -> f64 {
    state.mean_energy()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_examples() {
        let g = FockState::thermal(&ThermalSpec::new(0.0).unwrap(), 8).unwrap();
        assert_eq!(g.populations()[0], 1.0);
        assert!((g.mean_energy() - 0.5).abs() < 1e-15);

        let t = FockState::thermal(&ThermalSpec::new(1.0).unwrap(), 64).unwrap();
        assert!((t.populations()[0] - 0.5).abs() < 1e-12);
        assert!((t.populations()[1] - 0.25).abs() < 1e-12);

        let spec = ThermalSpec::new(34.0).unwrap();
        let t = FockState::thermal(&spec, spec.default_dim()).unwrap();
        assert!((t.mean_occupation() - 34.0).abs() < 1e-3 * 34.0);
        assert!((t.moments().q2 - 17.25).abs() < 2e-3 * 17.25);
    }

    #[test]
    fn thermal_mean_is_exact_with_generous_truncation() {
        for nbar in [0.3, 1.0, 2.5, 5.0] {
            let spec = ThermalSpec::new(nbar).unwrap();
            let t = FockState::thermal(&spec, (40.0 * (nbar + 1.0)) as usize).unwrap();
            assert!((t.mean_occupation() - nbar).abs() < 1e-6 * nbar);
            let e = t.moments();
            assert!((e.energy - (nbar + 0.5)).abs() < 1e-6);
        }
    }

    #[test]
    fn thermal_truncation_error() {
        let spec = ThermalSpec::new(50.0).unwrap();
        assert!(matches!(
            FockState::thermal(&spec, 60),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn validated_thermal() {
        let spec = ThermalSpec::new(2.0).unwrap();
        FockState::thermal(&spec, 40).unwrap().validate().unwrap();
    }

    #[test]
    fn spin_round_trip() {
        let spec = ThermalSpec::new(2.0).unwrap();
        let t = FockState::thermal(&spec, 40).unwrap();
        let j = t.with_spin_up();
        assert_eq!(j.matrix().nrows(), 80);
        assert!((j.spin_up_probability() - 1.0).abs() < 1e-14);
        assert_eq!(j.oscillator(), t);
    }
}
