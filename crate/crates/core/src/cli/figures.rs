//! Figure-ready CSV bundles. No plotting is done here.

use clap::ValueEnum;

use super::config::ExperimentConfig;
use super::run::{schedule_options, Outputs, Table};
use crate::measurement::{readout_alphas, simulate_bsb, BsbSettings, ReadoutSimulator};
use crate::oscillator::{FockSpace, QuadratureBasis};
use crate::protocol::{run_schedule, ScheduleMode};
use crate::semiclassical::{bayes_round, optimal_classical_params, GridDensity};
use crate::stats::keyed_rng;
use crate::{Result, ThermalSpec, CONTRACTION_FACTOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureKind {
    /// One position contraction of a thermal density with `s = 1`.
    Fig2,
    /// Occupation after each round for `n̄₀ ∈ {15, 34, 51}`.
    Fig3,
    /// Leading-order versus all-order readout of a thermal state.
    #[value(name = "figS1")]
    FigS1,
    /// Readout curves after each of ten rounds.
    #[value(name = "figS2")]
    FigS2,
    /// Blue-sideband flops of the cooled end states.
    #[value(name = "figS3")]
    FigS3,
}

pub const FIG3_INITIAL: [f64; 3] = [15.0, 34.0, 51.0];
pub const FIG_S2_ROUNDS: usize = 10;

pub fn emit_figure_data(kind: FigureKind, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    match kind {
        FigureKind::Fig2 => fig2(out),
        FigureKind::Fig3 => fig3(cfg, out),
        FigureKind::FigS1 => fig_s1(cfg, out),
        FigureKind::FigS2 => fig_s2(cfg, out),
        FigureKind::FigS3 => fig_s3(cfg, out),
    }
}

fn fig2(out: &mut Outputs) -> Result<()> {
    let spec = ThermalSpec::from_width(1.0)?;
    let f0 = GridDensity::gaussian(1.0, 10.0, 2001)?;
    let update = bayes_round(&f0, &optimal_classical_params(&spec))?;
    let mut t = Table::new(&[
        "q [dimensionless]",
        "f0 [dimensionless]",
        "m1_minus [dimensionless]",
        "f1 [dimensionless]",
    ]);
    for i in 0..f0.len() {
        t.push(vec![
            f0.x(i),
            f0.fs()[i],
            update.posterior_minus.fs()[i],
            update.updated.fs()[i],
        ]);
    }
    out.table("fig2.csv", &t)
}

fn fig3(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let opts = schedule_options(cfg);
    for n0 in FIG3_INITIAL {
        let spec = ThermalSpec::new(n0)?;
        let run = run_schedule(&spec, cfg.rounds, ScheduleMode::Fock, &opts)?;
        let mut t = Table::new(&[
            "round",
            "reference [dimensionless]",
            "nbar_analytic [dimensionless]",
            "nbar_fock [dimensionless]",
        ]);
        for row in &run.rows {
            let reference = n0 * CONTRACTION_FACTOR.powi(row.round as i32);
            t.push(vec![
                row.round as f64,
                reference,
                row.nbar_analytic,
                row.nbar_fock.unwrap_or(f64::NAN),
            ]);
        }
        out.table(&format!("fig3_n{n0}.csv"), &t)?;
    }
    Ok(())
}

fn fig_s1(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let spec = cfg.initial;
    let dim = crate::protocol::ScheduleOptions::default_dim(spec.nbar())?;
    let state = crate::FockState::thermal(&spec, dim)?;
    let leading = ReadoutSimulator::with_basis(&QuadratureBasis::bare(dim), &state);
    let full = ReadoutSimulator::with_basis(
        &QuadratureBasis::lamb_dicke_dressed(dim, cfg.trap.eta),
        &state,
    );
    let factors = cfg
        .radial
        .at_equal_temperature(spec.nbar(), cfg.trap.omega)
        .factor_distribution(64);
    let mut t = Table::new(&[
        "alpha [dimensionless]",
        "p_leading [dimensionless]",
        "p_full [dimensionless]",
    ]);
    for a in readout_alphas(spec.nbar(), 200) {
        t.push(vec![
            a,
            leading.probability(a, 1.0),
            full.averaged_probability(a, &factors),
        ]);
    }
    out.table("figS1.csv", &t)
}

fn fig_s2(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let opts = schedule_options(cfg);
    let dim = opts.dim.map_or_else(
        || crate::protocol::ScheduleOptions::default_dim(cfg.initial.nbar()),
        Ok,
    )?;
    let space = FockSpace::new(dim)?;
    let alphas = readout_alphas(
        cfg.initial.nbar() * CONTRACTION_FACTOR.powi(FIG_S2_ROUNDS as i32),
        100,
    );
    let mut curves = Vec::with_capacity(FIG_S2_ROUNDS + 1);
    let mut state = crate::FockState::thermal(&cfg.initial, dim)?;
    let mut header = vec!["alpha [dimensionless]".to_string()];
    for r in 0..=FIG_S2_ROUNDS {
        if r > 0 {
            let assumed =
                ThermalSpec::new(cfg.initial.nbar() * CONTRACTION_FACTOR.powi(r as i32 - 1))?;
            let s = opts.policy.settings(r - 1, &assumed)?;
            state =
                crate::protocol::CoolingRound::new(&space, &s.position, &s.momentum, opts.order)?
                    .apply(&state)?;
        }
        let sim = ReadoutSimulator::with_basis(space.basis(), &state);
        curves.push(
            alphas
                .iter()
                .map(|&a| sim.probability(a, 1.0))
                .collect::<Vec<_>>(),
        );
        header.push(format!("p_round{r} [dimensionless]"));
    }
    let mut t = Table {
        header,
        rows: Vec::new(),
    };
    for (i, &a) in alphas.iter().enumerate() {
        let mut row = vec![a];
        row.extend(curves.iter().map(|c| c[i]));
        t.push(row);
    }
    out.table("figS2.csv", &t)
}

fn fig_s3(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let opts = schedule_options(cfg);
    let b = &cfg.bsb;
    let times: Vec<f64> = (0..b.points)
        .map(|i| b.duration * i as f64 / (b.points - 1) as f64)
        .collect();
    let settings = BsbSettings {
        rabi_0: b.rabi_0,
        scaling: b.scaling,
        envelope: b.envelope,
        radial: None,
    };
    let mut curves = Vec::new();
    let mut header = vec!["time [s]".to_string()];
    for n0 in FIG3_INITIAL {
        let run = run_schedule(
            &ThermalSpec::new(n0)?,
            cfg.rounds,
            ScheduleMode::Fock,
            &opts,
        )?;
        let state = run.final_state.expect("fock mode keeps the state");
        let curve = simulate_bsb(&state, &times, &settings, 0, &mut keyed_rng(cfg.seed, 0, 0))?;
        curves.push(curve.probs);
        header.push(format!("p_n{n0} [dimensionless]"));
    }
    let mut t = Table {
        header,
        rows: Vec::new(),
    };
    for (i, &time) in times.iter().enumerate() {
        let mut row = vec![time];
        row.extend(curves.iter().map(|c| c[i]));
        t.push(row);
    }
    out.table("figS3.csv", &t)
}
