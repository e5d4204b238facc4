use std::f64::consts::E;

use modcool::semiclassical::{
    bayes_round, optimal_classical_alpha, optimal_classical_params, tail_mass, GridDensity,
    RoundParams,
};
use modcool::ThermalSpec;

#[test]
fn measurement_posterior_is_centred_on_the_feedback() {
    // m₁(q|−X) ∝ f₀(q)(1 + sin 4εq) has mean 4εs² e^{−8ε²s²}
    for s in [0.8, 1.0, 2.5] {
        let spec = ThermalSpec::from_width(s).unwrap();
        let g = GridDensity::thermal(&spec).unwrap();
        for scale in [0.5, 1.0, 1.4] {
            let eps = scale * 0.25 / s;
            let u = bayes_round(&g, &RoundParams::position(eps, 0.3)).unwrap();
            let expect = 4.0 * eps * s * s * (-8.0 * eps * eps * s * s).exp();
            assert!(
                (u.posterior_minus.mean() - expect).abs() < 1e-6,
                "s={s} eps={eps}"
            );
            assert!((u.posterior_plus.mean() + expect).abs() < 1e-6);
        }
    }
    let spec = ThermalSpec::from_width(1.0).unwrap();
    let p = optimal_classical_params(&spec);
    let u = bayes_round(&GridDensity::thermal(&spec).unwrap(), &p).unwrap();
    assert!((u.posterior_minus.mean() - p.alpha).abs() < 1e-6);
}

#[test]
fn posterior_mode_solves_the_stationarity_condition() {
    // at s = 1, ε = 1/4 the mode satisfies q(1 + sin q) = cos q
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid * (1.0 + mid.sin()) < mid.cos() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let spec = ThermalSpec::from_width(1.0).unwrap();
    let g = GridDensity::thermal(&spec).unwrap();
    let u = bayes_round(&g, &optimal_classical_params(&spec)).unwrap();
    assert!((u.posterior_minus.mode() - lo).abs() <= g.dx());
}

#[test]
fn smaller_pitch_suppresses_the_tails() {
    let spec = ThermalSpec::from_width(1.0).unwrap();
    let g = GridDensity::thermal(&spec).unwrap();
    let tail = |eps: f64| {
        let u = bayes_round(
            &g,
            &RoundParams::position(eps, optimal_classical_alpha(eps, 1.0)),
        )
        .unwrap();
        tail_mass(&u.updated, 4.0, u.updated.second_moment().sqrt())
    };
    let optimal = tail(0.25);
    let gentle = tail(0.25 / 2f64.sqrt());
    assert!(optimal / gentle > 5.0, "{optimal} vs {gentle}");
    // the gentler round still cools, just less
    let u = bayes_round(
        &g,
        &RoundParams::position(
            0.25 / 2f64.sqrt(),
            optimal_classical_alpha(0.25 / 2f64.sqrt(), 1.0),
        ),
    )
    .unwrap();
    let v = bayes_round(&g, &RoundParams::position(0.25, 1.0 / E.sqrt())).unwrap();
    assert!(
        v.updated.second_moment() < u.updated.second_moment() && u.updated.second_moment() < 1.0
    );
}
