//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each. Exits non-zero if a criterion fails that is not
//! listed in `EXPECTED_FAILURES`, or if a listed one starts passing.

use std::f64::consts::{E, PI};
use std::time::{Duration, Instant};

use modcool::doppler::{doppler_limit, epsilon_equivalent, modular_steady_state, DopplerConfig};
use modcool::measurement::{
    fit_nbar, fit_tails, readout_alphas, simulate_bsb, simulate_readout, BsbSettings,
    DecayEnvelope, FitTailsOptions, LambDickeOrder, RabiScaling, ReadoutModel, ReadoutSimulator,
};
use modcool::noise::{repump, RadialModes, RecoilConfig};
use modcool::protocol::{
    build_kraus, char_func, expand_round_to_displacement_sum, mean_occupation_from_char,
    optimize_epsilon, quantum_energy, run_schedule, CoolingRound, NbarEstimator, ParameterSchedule,
    Quadrature, RoundOrder, ScheduleMode, ScheduleOptions,
};
use modcool::semiclassical::{
    bayes_round, classical_energy, classical_quadrature_variance, minimize_classical_energy,
    GridDensity, RoundParams, DEFAULT_POINTS, DEFAULT_SPAN,
};
use modcool::stats::keyed_rng;
use modcool::{FockSpace, FockState, ThermalSpec, C64};
use rand::Rng;

type Check = Result<String, String>;

/// Criteria that fail at their stated bound with the current model. The
/// tail trade-off reaches about 4.7x against the required 5x.
const EXPECTED_FAILURES: &[usize] = &[7];
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: modcool::Error) -> String {
    format!("error: {e}")
}

fn c1_optimal_contraction() -> Check {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for nbar in [20.0, 50.0, 200.0] {
        let spec = ThermalSpec::new(nbar).map_err(err)?;
        let s = spec.width();
        let (eps, alpha, energy) = minimize_classical_energy(&spec);
        let ratio = energy / (2.0 * s * s);
        worst.0 = worst.0.max((ratio - (E - 1.0) / E).abs());
        worst.1 = worst.1.max((eps * s - 0.25).abs());
        worst.2 = worst.2.max((alpha / s - (-0.5f64).exp()).abs());
    }
    ensure(
        worst.0 < 1e-3 && worst.1 < 1e-3 && worst.2 < 1e-3,
        format!(
            "max |ratio-(e-1)/e|={:.1e}, |eps*s-1/4|={:.1e}, |alpha/s-e^-1/2|={:.1e}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn c2_grid_vs_closed_form() -> Check {
    let g = GridDensity::gaussian(1.0, DEFAULT_SPAN, DEFAULT_POINTS).map_err(err)?;
    let (eps0, alpha0) = (0.25, (-0.5f64).exp());
    let mut worst = 0.0f64;
    for i in 0..5 {
        for j in 0..5 {
            let eps = eps0 * (0.8 + 0.1 * i as f64);
            let alpha = alpha0 * (0.8 + 0.1 * j as f64);
            let u = bayes_round(&g, &RoundParams::position(eps, alpha)).map_err(err)?;
            let exact = classical_quadrature_variance(eps, alpha, 1.0);
            worst = worst.max((u.updated.second_moment() / exact - 1.0).abs());
        }
    }
    ensure(
        worst < 1e-5,
        format!("max relative deviation {worst:.2e} over 25 lattice points"),
    )
}

fn c3_quantum_classical() -> Check {
    let mut detail = Vec::new();
    let mut ok = true;
    for s in [2.0, 4.0, 8.0] {
        let spec = ThermalSpec::from_width(s).map_err(err)?;
        let (eps, alpha) = (0.25 / s, s / E.sqrt());
        let c = classical_energy(eps, alpha, &spec);
        let rel = (quantum_energy(eps, alpha, &spec) - c).abs() / c;
        ok &= rel <= 2.0 / (s * s);
        detail.push(format!("s={s}: {rel:.2e} (bound {:.2e})", 2.0 / (s * s)));
    }
    ensure(ok, detail.join(", "))
}

fn c4_cross_path() -> Check {
    let mut detail = Vec::new();
    let mut ok = true;
    for nbar in [1.0, 5.0, 20.0] {
        let spec = ThermalSpec::new(nbar).map_err(err)?;
        let dim = 24 * (nbar as usize + 1);
        let opt = optimize_epsilon(&spec).map_err(err)?;
        let q = RoundParams::position(opt.epsilon, opt.alpha);
        let p = RoundParams::momentum(opt.epsilon, opt.alpha);
        let closed = quantum_energy(opt.epsilon, opt.alpha, &spec);
        let space = FockSpace::new(dim).map_err(err)?;
        let state = FockState::thermal(&spec, dim).map_err(err)?;
        let round = CoolingRound::new(&space, &q, &p, RoundOrder::PositionFirst).map_err(err)?;
        let fock = round.apply(&state).map_err(err)?.mean_energy();
        let sum = expand_round_to_displacement_sum(&q, &p);
        let charfn = mean_occupation_from_char(&sum, &spec) + 0.5;
        let trace = (char_func(&sum, C64::new(0.0, 0.0), &spec) - C64::new(1.0, 0.0)).norm();
        let r_fock = (fock / closed - 1.0).abs();
        let r_char = (charfn / closed - 1.0)
            .abs()
            .max((charfn / fock - 1.0).abs());
        ok &= r_fock < 1e-4 && r_char < 1e-6 && trace < 1e-10;
        detail.push(format!("n={nbar}: fock {r_fock:.1e}, charfn {r_char:.1e}"));
    }
    ensure(ok, detail.join(", "))
}

fn c5_multi_round() -> Check {
    let spec = ThermalSpec::new(34.0).map_err(err)?;
    let analytic = run_schedule(
        &spec,
        3,
        ScheduleMode::Analytic,
        &ScheduleOptions::default(),
    )
    .map_err(err)?;
    let n3 = analytic.rows[3].nbar_analytic;
    let mut ok = (n3 - 8.58).abs() <= 0.1;
    let mut detail = vec![format!("analytic n3={n3:.3}")];
    for n0 in [15.0, 34.0] {
        let spec = ThermalSpec::new(n0).map_err(err)?;
        let dim = ScheduleOptions::default_dim(n0).map_err(err)?;
        ok &= dim <= 1024;
        let run =
            run_schedule(&spec, 6, ScheduleMode::Fock, &ScheduleOptions::default()).map_err(err)?;
        for row in &run.rows[3..] {
            let f = row.nbar_fock.unwrap_or(f64::NAN);
            ok &= f <= row.nbar_analytic;
        }
        let cells: Vec<String> = run.rows[3..]
            .iter()
            .map(|r| {
                format!(
                    "{:.2}/{:.2}",
                    r.nbar_fock.unwrap_or(f64::NAN),
                    r.nbar_analytic
                )
            })
            .collect();
        detail.push(format!(
            "n0={n0} dim={dim} fock/analytic rounds 3-6: {}",
            cells.join(" ")
        ));
    }
    ensure(ok, detail.join("; "))
}

fn c6_sub_quantum() -> Check {
    // closed loop: each round's optimum is taken at the n̄ reported by the
    // readout of the previous round
    let spec = ThermalSpec::new(5.0).map_err(err)?;
    let opts = ScheduleOptions {
        policy: ParameterSchedule::QuantumOptimal,
        estimator: NbarEstimator::ThermalFraction,
        closed_loop: true,
        ..Default::default()
    };
    let run = run_schedule(&spec, 12, ScheduleMode::Fock, &opts).map_err(err)?;
    let trace: Vec<f64> = run
        .rows
        .iter()
        .map(|r| r.nbar_fock.unwrap_or(f64::NAN))
        .collect();
    let monotone = trace.windows(2).all(|w| w[1] < w[0]);
    let crossing = trace.iter().position(|&n| n < 1.0);
    let crossed = crossing.is_some_and(|k| k <= 6);
    let mean = run
        .final_state
        .as_ref()
        .map_or(f64::NAN, |s| s.mean_occupation());
    ensure(
        monotone && crossed,
        format!(
            "monotone={monotone}, n<1 at round {crossing:?}, n after 6/12 rounds {:.3}/{:.4}, <n> after 12 rounds {mean:.3}",
            trace[6], trace[12]
        ),
    )
}

fn c7_tail_tradeoff() -> Check {
    let spec = ThermalSpec::new(34.0).map_err(err)?;
    let tail = |policy: ParameterSchedule| -> Result<(f64, f64), String> {
        let opts = ScheduleOptions {
            policy,
            ..Default::default()
        };
        let run = run_schedule(&spec, 8, ScheduleMode::Fock, &opts).map_err(err)?;
        let state = run.final_state.ok_or("no final state")?;
        let nbar = state.mean_occupation();
        let mass = state
            .populations()
            .iter()
            .enumerate()
            .filter(|(n, _)| *n as f64 > 4.0 * nbar)
            .map(|(_, p)| p)
            .sum();
        Ok((nbar, mass))
    };
    let (n_o, t_o) = tail(ParameterSchedule::Auto)?;
    let (n_s, t_s) = tail(ParameterSchedule::ScaledEpsilon {
        factor: 0.5f64.sqrt(),
    })?;
    let ratio = t_o / t_s;
    ensure(
        ratio >= 5.0,
        format!("eps_o: n={n_o:.2} tail={t_o:.2e}; eps_o/sqrt2: n={n_s:.2} tail={t_s:.2e}; ratio {ratio:.2} (need >= 5)"),
    )
}

fn c8_readout() -> Check {
    let eta = 0.05;
    let axial = 2.0 * PI * 1.7e6;
    let mut ok = true;
    let mut detail = Vec::new();
    for (idx, nbar) in [15.0, 34.0, 51.0].into_iter().enumerate() {
        let spec = ThermalSpec::new(nbar).map_err(err)?;
        let dim = ScheduleOptions::default_dim(nbar).map_err(err)?;
        let state = FockState::thermal(&spec, dim).map_err(err)?;
        let radial = RadialModes::default().at_equal_temperature(nbar, axial);
        let alphas = readout_alphas(nbar, 50);
        let model = ReadoutModel::Full {
            eta,
            radial: Some(radial.clone()),
            dim: None,
        };
        let sim = ReadoutSimulator::new(&state, LambDickeOrder::Full, eta);
        let mut hits = 0;
        for seed in 0..20 {
            let mut rng = keyed_rng(seed, 100 + idx as u64, 0);
            let curve = sim
                .curve(&alphas, Some(&radial), 400, &mut rng)
                .map_err(err)?;
            let fit = fit_nbar(&curve, &model).map_err(err)?;
            if (fit.nbar / nbar - 1.0).abs() <= 0.05 {
                hits += 1;
            }
        }
        ok &= hits >= 19;
        detail.push(format!("n={nbar}: {hits}/20"));
    }
    ensure(ok, format!("within 5%: {}", detail.join(", ")))
}

fn c9_tail_fit() -> Check {
    let mut ok = true;
    let mut detail = Vec::new();
    let tail = ThermalSpec::new(40.0).map_err(err)?;
    let dim = tail.default_dim();
    let times: Vec<f64> = (0..100).map(|i| 500e-6 * i as f64 / 99.0).collect();
    let rabi_0 = 2.0 * PI * 10e3;
    let scaling = RabiScaling::Auto { eta: 0.05 };
    let settings = BsbSettings {
        rabi_0,
        scaling,
        envelope: DecayEnvelope {
            exponential: 500.0,
            gaussian: 0.0,
        },
        radial: None,
    };
    for (i, ground) in [0.974, 0.929, 0.873].into_iter().enumerate() {
        let shape: Vec<f64> = (1..dim).map(|n| tail.population(n)).collect();
        let norm: f64 = shape.iter().sum();
        let mut pops = vec![ground];
        pops.extend(shape.iter().map(|p| p / norm * (1.0 - ground)));
        let state = FockState::from_populations(&pops).map_err(err)?;
        let mut rng = keyed_rng(9, i as u64, 0);
        let curve = simulate_bsb(&state, &times, &settings, 400, &mut rng).map_err(err)?;
        let options = FitTailsOptions {
            rabi_0,
            scaling,
            bootstrap: 200,
            seed: 9 + i as u64,
        };
        let report = fit_tails(&curve, 0, &options).map_err(err)?;
        let injected = 1.0 - ground;
        ok &= report.ci_low <= injected && injected <= report.ci_high;
        detail.push(format!(
            "{injected:.3} -> {:.4} [{:.4}, {:.4}]",
            report.tail_mass, report.ci_low, report.ci_high
        ));
    }
    ensure(ok, detail.join(", "))
}

fn c10_doppler() -> Check {
    let mut ok = true;
    let mut detail = Vec::new();
    let omega = 1.0;
    for ratio in [50.0, 100.0, 500.0] {
        let gamma = ratio * omega;
        let limit = doppler_limit(gamma, omega).map_err(err)?;
        let exact_energy = gamma / (4.0 * omega);
        ok &= limit.detuning == -gamma / 2.0 && limit.nbar_min + 0.5 == exact_energy;
        let cfg = DopplerConfig {
            gamma,
            detuning: -gamma / 2.0,
            omega,
            eta: 0.05,
            pe: 0.5,
        };
        let modular = modular_steady_state(&cfg).map_err(err)?;
        let rel = ((modular + 0.5) / exact_energy - 1.0).abs();
        ok &= rel < 0.01;
        detail.push(format!(
            "G/w={ratio}: eps={:.4} rel={rel:.1e}",
            epsilon_equivalent(&cfg)
        ));
    }
    ensure(ok, detail.join(", "))
}

fn c11_channel_sanity() -> Check {
    let mut rng = keyed_rng(11, 0, 0);
    let mut worst = [0.0f64; 4];
    let mut deterministic = true;
    for draw in 0..100u64 {
        let nbar = rng.random_range(0.2..8.0);
        let spec = ThermalSpec::new(nbar).map_err(err)?;
        let s = spec.width();
        let eps = rng.random_range(0.3..1.5) * 0.25 / s;
        let alpha = rng.random_range(0.0..1.5) * s / E.sqrt();
        let dim = ScheduleOptions::default_dim(nbar).map_err(err)?;
        let space = FockSpace::new(dim).map_err(err)?;
        let state = FockState::thermal(&spec, dim)
            .map_err(err)?
            .rotated(rng.random_range(0.0..2.0 * PI));
        for quad in [Quadrature::Position, Quadrature::Momentum] {
            let k = build_kraus(&space, quad, eps, alpha).map_err(err)?;
            worst[0] = worst[0].max(k.completeness_error(dim / 2));
        }
        let round = CoolingRound::new(
            &space,
            &RoundParams::position(eps, alpha),
            &RoundParams::momentum(eps, alpha),
            RoundOrder::PositionFirst,
        )
        .map_err(err)?;
        let out = round.apply(&state).map_err(err)?;
        worst[1] = worst[1].max((out.trace() - C64::new(1.0, 0.0)).norm());
        worst[2] = worst[2].max(-out.min_eigenvalue());
        worst[3] = worst[3].max(out.hermiticity_error());

        let recoil = RecoilConfig::default();
        let spin = out.with_spin_up();
        let a = repump(&spin, &recoil, &mut keyed_rng(draw, 1, 0)).map_err(err)?;
        let b = repump(&spin, &recoil, &mut keyed_rng(draw, 1, 0)).map_err(err)?;
        let alphas = readout_alphas(nbar, 10);
        let r1 = simulate_readout(
            &out,
            &alphas,
            None,
            LambDickeOrder::Full,
            0.05,
            100,
            &mut keyed_rng(draw, 2, 0),
        )
        .map_err(err)?;
        let r2 = simulate_readout(
            &out,
            &alphas,
            None,
            LambDickeOrder::Full,
            0.05,
            100,
            &mut keyed_rng(draw, 2, 0),
        )
        .map_err(err)?;
        deterministic &= a.matrix() == b.matrix() && r1.probs == r2.probs;
    }
    ensure(
        worst[0] < 1e-8 && worst[1] < 1e-8 && worst[2] < 1e-10 && worst[3] < 1e-10 && deterministic,
        format!(
            "completeness {:.1e}, trace {:.1e}, min eigenvalue {:.1e}, hermiticity {:.1e}, deterministic={deterministic}",
            worst[0], worst[1], -worst[2], worst[3]
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        (
            "optimal contraction factor",
            c1_optimal_contraction,
            Duration::from_secs(1),
        ),
        (
            "grid vs closed form",
            c2_grid_vs_closed_form,
            Duration::from_secs(10),
        ),
        (
            "quantum/classical agreement",
            c3_quantum_classical,
            Duration::from_secs(1),
        ),
        (
            "cross-path consistency",
            c4_cross_path,
            Duration::from_secs(60),
        ),
        (
            "multi-round schedule",
            c5_multi_round,
            Duration::from_secs(300),
        ),
        (
            "cooling below one quantum",
            c6_sub_quantum,
            Duration::from_secs(300),
        ),
        ("tail trade-off", c7_tail_tradeoff, Duration::from_secs(300)),
        ("readout round trip", c8_readout, Duration::from_secs(300)),
        (
            "tail fitting round trip",
            c9_tail_fit,
            Duration::from_secs(120),
        ),
        ("doppler limit", c10_doppler, Duration::from_secs(1)),
        (
            "channel sanity",
            c11_channel_sanity,
            Duration::from_secs(120),
        ),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut unexpected = 0;
    let mut expected = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| *f == number.to_string()) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let (pass, detail) = match result {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        let known = EXPECTED_FAILURES.contains(&number);
        let note = match (pass, known) {
            (false, true) => {
                expected += 1;
                " [expected failure]"
            }
            (false, false) => {
                unexpected += 1;
                ""
            }
            (true, true) => {
                unexpected += 1;
                " [listed as expected failure, update EXPECTED_FAILURES]"
            }
            (true, false) => "",
        };
        println!(
            "criterion {number} {name}: {} ({detail}; {:.2}s of {}s){}{note}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { " over time budget" }
        );
    }
    println!("acceptance: {expected} expected failure(s), {unexpected} unexpected result(s)");
    if unexpected > 0 {
        std::process::exit(1);
    }
}
