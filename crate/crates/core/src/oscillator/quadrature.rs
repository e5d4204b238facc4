use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};

use super::{displacement::DisplacementOperator, ThermalSpec, C64, DISPLACEMENT_GUARD};
use crate::special::laguerre;
use crate::{Error, Result};

/// Eigendecomposition of a real symmetric tridiagonal "position-like"
/// operator `X = Σ c_n (|n⟩⟨n+1| + |n+1⟩⟨n|)` in a truncated Fock basis.
///
/// Any function of a rotated copy `X_θ = U_θ X U_θ†`, `U_θ = e^{iθn̂}`, is
/// then `U_θ V f(Λ) Vᵀ U_θ†`. With `c_n = √(n+1)/2` this is the position
/// quadrature `q̂` and `X_θ = cos θ q̂ + sin θ p̂`.
#[derive(Debug, Clone)]
pub struct QuadratureBasis {
    nodes: Array1<f64>,
    vectors: Array2<f64>,
}

impl QuadratureBasis {
    /// `couplings[n]` couples levels `n` and `n+1`.
    pub fn from_couplings(couplings: &[f64]) -> Self {
        let dim = couplings.len() + 1;
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for (n, &c) in couplings.iter().enumerate() {
            m[(n, n + 1)] = c;
            m[(n + 1, n)] = c;
        }
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let nodes = Array1::from_iter(order.iter().map(|&k| eig.eigenvalues[k]));
        let mut vectors = Array2::zeros((dim, dim));
        for (col, &k) in order.iter().enumerate() {
            for n in 0..dim {
                vectors[(n, col)] = eig.eigenvectors[(n, k)];
            }
        }
        Self { nodes, vectors }
    }

    /// The bare position quadrature `q̂ = (a + a†)/2`.
    pub fn bare(dim: usize) -> Self {
        let c: Vec<f64> = (0..dim.saturating_sub(1))
            .map(|n| ((n + 1) as f64).sqrt() / 2.0)
            .collect();
        Self::from_couplings(&c)
    }

    /// The position-like operator of a laser drive kept to all orders in the
    /// Lamb-Dicke parameter, normalised so it tends to `q̂` as `η → 0`.
    pub fn lamb_dicke_dressed(dim: usize, eta: f64) -> Self {
        if eta == 0.0 {
            return Self::bare(dim);
        }
        let c: Vec<f64> = (1..dim)
            .map(|n| sideband_coupling(n, eta) / (2.0 * eta))
            .collect();
        Self::from_couplings(&c)
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// Eigenvalues of the unrotated operator, ascending.
    pub fn nodes(&self) -> &Array1<f64> {
        &self.nodes
    }

    /// Orthogonal eigenvectors as columns.
    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    fn rotated_vectors(&self, angle: f64) -> Array2<C64> {
        let dim = self.dim();
        Array2::from_shape_fn((dim, dim), |(n, k)| {
            C64::from_polar(1.0, angle * n as f64) * self.vectors[(n, k)]
        })
    }

    /// Matrix of `f(X_θ)`.
    pub fn function_matrix(&self, angle: f64, f: impl Fn(f64) -> C64) -> Array2<C64> {
        let w = self.rotated_vectors(angle);
        let fx: Vec<C64> = self.nodes.iter().map(|&x| f(x)).collect();
        let mut scaled = w.clone();
        for ((_, k), v) in scaled.indexed_iter_mut() {
            *v *= fx[k];
        }
        let wh = w.t().mapv(|z| z.conj());
        scaled.dot(&wh)
    }

    /// Diagonal of `ρ` in the eigenbasis of `X_θ`: `Tr(f(X_θ)ρ) = Σ_k f(x_k) w_k`.
    pub fn rotated_weights(&self, rho: &Array2<C64>, angle: f64) -> Vec<C64> {
        let w = self.rotated_vectors(angle);
        let rw = rho.dot(&w);
        let dim = self.dim();
        (0..dim)
            .map(|k| (0..dim).map(|n| w[(n, k)].conj() * rw[(n, k)]).sum())
            .collect()
    }
}

/// Signed `⟨n−1|D(iη)|n⟩ / i`, the carrier-free sideband coupling between
/// levels `n−1` and `n` to all orders in `η`.
pub fn sideband_coupling(n: usize, eta: f64) -> f64 {
    let x = eta * eta;
    eta / (n as f64).sqrt() * (-x / 2.0).exp() * laguerre(n - 1, 1, x)
}

/// Truncated Fock space of dimension `dim` together with the spectral
/// decomposition of `q̂` used to build every quadrature function.
#[derive(Debug, Clone)]
pub struct FockSpace {
    basis: QuadratureBasis,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::truncation(
                dim,
                "Fock space needs at least two levels",
            ));
        }
        Ok(Self {
            basis: QuadratureBasis::bare(dim),
        })
    }

    /// Space sized by [`ThermalSpec::default_dim`].
    pub fn for_thermal(spec: &ThermalSpec) -> Self {
        Self {
            basis: QuadratureBasis::bare(spec.default_dim()),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &QuadratureBasis {
        &self.basis
    }

    pub fn annihilation(&self) -> Array2<C64> {
        let dim = self.dim();
        let mut a = Array2::zeros((dim, dim));
        for n in 1..dim {
            a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        a
    }

    pub fn position(&self) -> Array2<C64> {
        let a = self.annihilation();
        (&a + &a.t()) * 0.5
    }

    pub fn momentum(&self) -> Array2<C64> {
        let a = self.annihilation();
        (&a - &a.t()) * C64::new(0.0, -0.5)
    }

    /// `f(cos θ q̂ + sin θ p̂)`.
    pub fn quadrature_function(&self, angle: f64, f: impl Fn(f64) -> C64) -> Array2<C64> {
        self.basis.function_matrix(angle, f)
    }

    /// `D(γ) = exp(γa† − γ*a) = exp(2i(Im γ q̂ − Re γ p̂))`.
    pub fn displacement(&self, gamma: C64) -> Result<DisplacementOperator> {
        self.check_displacement(gamma)?;
        let (angle, r) = displacement_direction(gamma);
        let matrix = self.quadrature_function(angle, |x| C64::from_polar(1.0, 2.0 * r * x));
        Ok(DisplacementOperator::from_parts(gamma, matrix))
    }

    pub(crate) fn check_displacement(&self, gamma: C64) -> Result<()> {
        if gamma.norm_sqr() > DISPLACEMENT_GUARD * self.dim() as f64 {
            return Err(Error::truncation(
                self.dim(),
                format!("|gamma|^2 = {:.4} exceeds dim/8", gamma.norm_sqr()),
            ));
        }
        Ok(())
    }
}

/// `(θ, r)` with `D(γ) = exp(2i r X_θ)`.
pub(crate) fn displacement_direction(gamma: C64) -> (f64, f64) {
    let r = gamma.norm();
    if r == 0.0 {
        return (0.0, 0.0);
    }
    ((-gamma.re).atan2(gamma.im), r)
}
