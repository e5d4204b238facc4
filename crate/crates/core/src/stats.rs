//! Small statistics helpers: binomial intervals, percentiles, bootstrap and
//! a deterministic counter-keyed random stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// z-value of a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Linear-interpolated percentile, `q ∈ [0, 1]`. Sorts a copy.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < v.len() {
        v[i] * (1.0 - frac) + v[i + 1] * frac
    } else {
        v[i]
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Percentile-bootstrap 95% interval of the mean.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, rng: &mut impl Rng) -> (f64, f64) {
    if values.len() < 2 {
        let m = mean(values);
        return (m, m);
    }
    let n = values.len();
    let means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    (percentile(&means, 0.025), percentile(&means, 0.975))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random stream keyed by `(seed, stream, stage)`, independent of the order
/// in which streams are consumed.
pub fn keyed_rng(seed: u64, stream: u64, stage: u64) -> ChaCha8Rng {
    let key =
        splitmix(splitmix(splitmix(seed) ^ stream) ^ stage.wrapping_mul(0xa24b_aed4_963e_e407));
    ChaCha8Rng::seed_from_u64(key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(30, 100, Z95);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!((lo - 0.2189).abs() < 1e-3 && (hi - 0.3958).abs() < 1e-3);
        let (lo, hi) = wilson_interval(100, 100, Z95);
        assert!(hi == 1.0 && lo > 0.95);
    }

    #[test]
    fn percentiles() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert!((percentile(&v, 0.5) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn keyed_streams_are_reproducible_and_distinct() {
        let a: u64 = keyed_rng(7, 1, 2).random();
        let b: u64 = keyed_rng(7, 1, 2).random();
        let c: u64 = keyed_rng(7, 2, 1).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
