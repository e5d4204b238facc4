/// Entropy of a thermal state in nats, `−n̄ ln(n̄/(n̄+1)) + ln(n̄+1)`.
pub fn entropy_thermal(nbar: f64) -> f64 {
    if nbar <= 0.0 {
        return 0.0;
    }
    (nbar + 1.0) * (nbar + 1.0).ln() - nbar * nbar.ln()
}

/// Large-occupation approximation `ln n̄`.
pub fn entropy_large_nbar(nbar: f64) -> f64 {
    nbar.ln()
}

/// Entropy that `resets` spin resets can remove, `resets · ln 2`.
pub fn reset_entropy_budget(resets: u32) -> f64 {
    resets as f64 * std::f64::consts::LN_2
}

/// Energy reduction per round if every reset removed a full `ln 2`:
/// at large n̄ the entropy is `ln n̄`, so removing `k ln 2` divides n̄ by `2^k`.
pub fn ideal_reduction_factor(resets: u32) -> f64 {
    reset_entropy_budget(resets).exp()
}

/// Energy reduction per round achieved by the optimal protocol, `e/(e−1)`.
pub fn achieved_round_factor() -> f64 {
    1.0 / crate::CONTRACTION_FACTOR
}

/// Headroom between the two-reset entropy bound and the achieved reduction.
pub fn optimality_gap() -> f64 {
    ideal_reduction_factor(2) / achieved_round_factor()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_has_zero_entropy() {
        assert_eq!(entropy_thermal(0.0), 0.0);
    }

    #[test]
    fn large_nbar_limit() {
        for nbar in [50.0, 100.0, 1000.0] {
            // S = ln n̄ + 1 + O(1/n̄)
            let excess = entropy_thermal(nbar) - entropy_large_nbar(nbar) - 1.0;
            assert!(excess.abs() < 1.0 / nbar, "n̄={nbar}: {excess}");
        }
    }

    #[test]
    fn efficiency_gap() {
        assert!((ideal_reduction_factor(2) - 4.0).abs() < 1e-12);
        assert!((optimality_gap() - 2.528).abs() < 1e-3);
    }

    #[test]
    fn monotone() {
        let mut last = -1.0;
        for i in 0..200 {
            let s = entropy_thermal(i as f64 * 0.25);
            assert!(s > last);
            last = s;
        }
    }
}
