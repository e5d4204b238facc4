use modcool::doppler::{
    classical_nbar, doppler_cooling_trajectory, doppler_limit, doppler_temperature,
    modular_steady_state, steady_state_nbar, DopplerConfig,
};
use modcool::ThermalSpec;

fn cfg(ratio: f64, detuning_over_gamma: f64) -> DopplerConfig {
    DopplerConfig {
        gamma: ratio,
        detuning: detuning_over_gamma * ratio,
        omega: 1.0,
        eta: 0.05,
        pe: 0.5,
    }
}

#[test]
fn trajectories_approach_the_fixed_point_from_both_sides() {
    let c = cfg(100.0, -0.5);
    let target = steady_state_nbar(&c).unwrap();
    for start in [2.0, 200.0] {
        let traj =
            doppler_cooling_trajectory(&ThermalSpec::new(start).unwrap(), &c, 200_000).unwrap();
        let last = *traj.last().unwrap();
        assert!(
            (last / target - 1.0).abs() < 1e-3,
            "start {start}: {last} vs {target}"
        );
        assert!(traj
            .windows(2)
            .all(|w| (w[1] - target).abs() <= (w[0] - target).abs() + 1e-12));
    }
}

#[test]
fn scanned_detuning_agrees_with_the_closed_form() {
    for ratio in [10.0, 50.0, 100.0, 500.0] {
        let limit = doppler_limit(ratio, 1.0).unwrap();
        assert!((limit.scanned_detuning / limit.detuning - 1.0).abs() < 1e-6);
        // no detuning beats the limit
        for x in [-0.1, -0.3, -0.7, -2.0] {
            assert!(steady_state_nbar(&cfg(ratio, x)).unwrap() >= limit.nbar_min - 1e-12);
        }
    }
}

#[test]
fn modular_picture_tracks_the_doppler_curve_off_optimum() {
    for x in [-0.25, -0.5, -1.0] {
        let c = cfg(200.0, x);
        let doppler = steady_state_nbar(&c).unwrap() + 0.5;
        let modular = modular_steady_state(&c).unwrap() + 0.5;
        assert!(
            (modular / doppler - 1.0).abs() < 1e-2,
            "Δ/Γ={x}: {modular} vs {doppler}"
        );
    }
}

#[test]
fn doppler_temperature_matches_the_occupation_limit() {
    // k_B T_D/(ħω) = Γ/(4ω) in the high-temperature limit
    let gamma = 2.0 * std::f64::consts::PI * 22e6;
    let omega = 2.0 * std::f64::consts::PI * 1.7e6;
    let n = classical_nbar(doppler_temperature(gamma), omega);
    assert!((n / (gamma / (4.0 * omega)) - 1.0).abs() < 1e-12);
}
