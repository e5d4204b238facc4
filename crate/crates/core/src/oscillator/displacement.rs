use ndarray::Array2;

use super::C64;
use crate::special::{laguerre, ln_factorial};

/// Matrix realisation of `D(γ)` in a truncated Fock basis.
#[derive(Debug, Clone)]
pub struct DisplacementOperator {
    gamma: C64,
    matrix: Array2<C64>,
}

impl DisplacementOperator {
    pub(crate) fn from_parts(gamma: C64, matrix: Array2<C64>) -> Self {
        Self { gamma, matrix }
    }

    pub fn gamma(&self) -> C64 {
        self.gamma
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }
}

/// Closed-form `⟨m|D(γ)|n⟩` of the untruncated operator.
pub fn displacement_element(m: usize, n: usize, gamma: C64) -> C64 {
    let x = gamma.norm_sqr();
    let (lo, hi, base) = if m >= n {
        (n, m, gamma)
    } else {
        (m, n, -gamma.conj())
    };
    let k = hi - lo;
    let lag = laguerre(lo, k, x);
    if lag == 0.0 {
        return C64::new(0.0, 0.0);
    }
    if k > 0 && gamma.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let ln_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi))
        + if k > 0 {
            k as f64 * gamma.norm().ln()
        } else {
            0.0
        }
        - x / 2.0;
    let phase = C64::from_polar(1.0, k as f64 * base.arg());
    phase * ln_mag.exp() * lag
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::FockSpace;

    #[test]
    fn vacuum_overlap() {
        let g = C64::new(0.3, -0.7);
        let v = displacement_element(0, 0, g);
        assert!((v - C64::new((-g.norm_sqr() / 2.0).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn matrix_matches_closed_form_on_low_block() {
        let space = FockSpace::new(120).unwrap();
        let g = C64::new(0.8, 1.1);
        let d = space.displacement(g).unwrap();
        for m in 0..30 {
            for n in 0..30 {
                let diff = (d.matrix()[(m, n)] - displacement_element(m, n, g)).norm();
                assert!(diff < 1e-10, "({m},{n}): {diff}");
            }
        }
    }

    #[test]
    fn zero_is_identity() {
        let space = FockSpace::new(16).unwrap();
        let d = space.displacement(C64::new(0.0, 0.0)).unwrap();
        for ((i, j), v) in d.matrix().indexed_iter() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((v - C64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn imaginary_argument_is_position_exponential() {
        let space = FockSpace::new(60).unwrap();
        let eps = 0.37;
        let d = space.displacement(C64::new(0.0, eps)).unwrap();
        let direct = space.quadrature_function(0.0, |x| C64::from_polar(1.0, 2.0 * eps * x));
        let diff = d
            .matrix()
            .iter()
            .zip(direct.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn guard_rejects_large_amplitudes() {
        let space = FockSpace::new(16).unwrap();
        assert!(space.displacement(C64::new(1.5, 0.0)).is_err());
    }
}
