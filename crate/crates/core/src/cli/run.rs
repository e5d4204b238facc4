//! Execution of one experiment kind and emission of its result files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind, FitModelKind};
use crate::doppler::{
    doppler_energy_update, doppler_limit, epsilon_equivalent, modular_steady_state,
    steady_state_nbar, DopplerConfig,
};
use crate::measurement::{
    fit_nbar, fit_tails, readout_alphas, simulate_bsb, simulate_readout, BsbCurve, BsbSettings,
    FitTailsOptions, ReadoutCurve, ReadoutModel,
};
use crate::noise::{run_noisy_experiment, ExperimentSetup, RadialModes};
use crate::oscillator::FockState;
use crate::protocol::{optimize_epsilon, run_schedule, ScheduleOptions};
use crate::semiclassical::{classical_energy, minimize_classical_energy, PhaseSpaceDensity};
use crate::stats::keyed_rng;
use crate::{Error, Result, ThermalSpec};

/// Stream ids separating the random draws of different pipelines.
const STREAM_READOUT: u64 = 1 << 40;
const STREAM_BSB: u64 = 2 << 40;

/// Column-labelled numeric table.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.push_cells(row.into_iter().map(format_value).collect());
    }

    pub fn push_cells(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(csv_err)?;
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e15)`.
fn format_value(v: f64) -> String {
    let a = v.abs();
    if v.is_nan() {
        String::new()
    } else if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("{other:?}")),
    }
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Files written by a run, relative to the output directory.
#[derive(Debug, Default)]
pub struct Outputs {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        table.write(&self.dir.join(name))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        write_json(&self.dir.join(name), value)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

pub(crate) fn schedule_options(cfg: &ExperimentConfig) -> ScheduleOptions {
    ScheduleOptions {
        policy: cfg.parameters.clone(),
        estimator: cfg.schedule.estimator,
        dim: cfg.schedule.dim,
        order: cfg.schedule.order,
        closed_loop: cfg.schedule.closed_loop,
    }
}

pub(crate) fn experiment_setup(cfg: &ExperimentConfig) -> ExperimentSetup {
    ExperimentSetup {
        schedule: schedule_options(cfg),
        noise: cfg.noise.clone(),
        radial: cfg.radial.clone(),
        axial_omega: cfg.trap.omega,
        rabi: cfg.trap.coupling / cfg.trap.eta,
        lamb_dicke: cfg.trap.eta,
        drive_order: cfg.trap.drive_order,
        repump_duration: cfg.trap.repump_duration,
        bootstrap: cfg.noisy.bootstrap,
    }
}

/// Runs `cfg` and writes its result files into `out`.
pub fn execute(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    match cfg.kind {
        ExperimentKind::Optimize => optimize(cfg, out),
        ExperimentKind::CoolClassical => cool_classical(cfg, out),
        ExperimentKind::CoolQuantum => cool_quantum(cfg, out),
        ExperimentKind::CoolNoisy => cool_noisy(cfg, out),
        ExperimentKind::ReadoutFit => readout_fit(cfg, out),
        ExperimentKind::BsbFit => bsb_fit(cfg, out),
        ExperimentKind::DopplerCompare => doppler_compare(cfg, out),
    }
}

#[derive(Serialize)]
struct OptimizeReport {
    nbar: f64,
    initial_energy: f64,
    epsilon: f64,
    alpha: f64,
    energy: f64,
    energy_ratio: f64,
    classical_epsilon: f64,
    classical_alpha: f64,
    classical_energy_ratio: f64,
}

fn optimize(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let q = optimize_epsilon(&cfg.initial)?;
    let (ce, ca, cen) = minimize_classical_energy(&cfg.initial);
    out.json(
        "result.json",
        &OptimizeReport {
            nbar: cfg.initial.nbar(),
            initial_energy: q.initial_energy,
            epsilon: q.epsilon,
            alpha: q.alpha,
            energy: q.energy,
            energy_ratio: q.energy_ratio(),
            classical_epsilon: ce,
            classical_alpha: ca,
            classical_energy_ratio: cen / cfg.initial.energy(),
        },
    )
}

fn cool_classical(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let opts = schedule_options(cfg);
    let mut density = PhaseSpaceDensity::thermal(&cfg.initial)?;
    let mut gaussian = cfg.initial.energy();
    let mut table = Table::new(&[
        "round",
        "energy_grid [hbar*omega]",
        "energy_gaussian [hbar*omega]",
        "epsilon [dimensionless]",
        "alpha [dimensionless]",
    ]);
    table.push(vec![0.0, density.energy(), gaussian, f64::NAN, f64::NAN]);
    for r in 0..cfg.rounds {
        let assumed = ThermalSpec::new((density.energy() - 0.5).max(0.0))?;
        let settings = opts.policy.settings(r, &assumed)?;
        density = density.cool_round(&settings.position, &settings.momentum)?;
        let spec = ThermalSpec::new((gaussian - 0.5).max(0.0))?;
        gaussian = 0.5
            * (classical_energy(settings.position.epsilon, settings.position.alpha, &spec)
                + classical_energy(settings.momentum.epsilon, settings.momentum.alpha, &spec));
        table.push(vec![
            (r + 1) as f64,
            density.energy(),
            gaussian,
            settings.position.epsilon,
            settings.position.alpha,
        ]);
    }
    out.table("rounds.csv", &table)
}

fn cool_quantum(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let run = run_schedule(
        &cfg.initial,
        cfg.rounds,
        cfg.schedule.mode,
        &schedule_options(cfg),
    )?;
    let mut table = Table::new(&[
        "round",
        "nbar_analytic [dimensionless]",
        "nbar_fock [dimensionless]",
        "energy [hbar*omega]",
        "epsilon [dimensionless]",
        "alpha [dimensionless]",
    ]);
    for row in &run.rows {
        let (eps, alpha) = row.settings.map_or((f64::NAN, f64::NAN), |s| {
            (s.position.epsilon, s.position.alpha)
        });
        table.push(vec![
            row.round as f64,
            row.nbar_analytic,
            row.nbar_fock.unwrap_or(f64::NAN),
            row.energy,
            eps,
            alpha,
        ]);
    }
    out.table("rounds.csv", &table)?;
    if let Some(state) = &run.final_state {
        let mut pops = Table::new(&["n", "population [dimensionless]"]);
        for (n, p) in state.populations().into_iter().enumerate() {
            pops.push(vec![n as f64, p]);
        }
        out.table("final_populations.csv", &pops)?;
    }
    Ok(())
}

fn cool_noisy(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let setup = experiment_setup(cfg);
    let result = run_noisy_experiment(
        &cfg.initial,
        cfg.rounds,
        &setup,
        cfg.noisy.trajectories,
        cfg.seed,
    )?;
    let mut table = Table::new(&[
        "round",
        "nbar_mean [dimensionless]",
        "ci_low [dimensionless]",
        "ci_high [dimensionless]",
    ]);
    for row in &result.rows {
        table.push(vec![
            row.round as f64,
            row.nbar_mean,
            row.ci_low,
            row.ci_high,
        ]);
    }
    out.table("rounds.csv", &table)?;
    if cfg.noisy.dump_trajectories {
        let mut dump = Table::new(&["trajectory", "round", "nbar [dimensionless]"]);
        for (i, series) in result.trajectories.iter().enumerate() {
            for (r, v) in series.iter().enumerate() {
                dump.push(vec![i as f64, r as f64, *v]);
            }
        }
        out.table("trajectories.csv", &dump)?;
    }
    Ok(())
}

/// Reads a three-column numeric CSV with a header row.
pub(crate) fn read_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<u32>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |k: usize| -> Result<&str> {
            rec.get(k).ok_or_else(|| {
                Error::Config(format!(
                    "{}: row {} has fewer than 3 columns",
                    path.display(),
                    i + 1
                ))
            })
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("{}: row {}: {e}", path.display(), i + 1)))
        };
        a.push(num(field(0)?)?);
        b.push(num(field(1)?)?);
        c.push(num(field(2)?)? as u32);
    }
    Ok((a, b, c))
}

#[derive(Serialize)]
struct ReadoutReport {
    true_nbar: Option<f64>,
    fit: crate::measurement::NbarFit,
}

fn radial_for(cfg: &ExperimentConfig, enabled: bool) -> Option<RadialModes> {
    enabled.then(|| {
        cfg.radial
            .at_equal_temperature(cfg.initial.nbar(), cfg.trap.omega)
    })
}

fn readout_fit(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let rc = &cfg.readout;
    let radial = radial_for(cfg, rc.radial_sampling);
    let (curve, true_nbar) = match &rc.data {
        Some(path) => {
            let (alphas, probs, shots) = read_columns(path)?;
            (ReadoutCurve::new(alphas, probs, shots)?, None)
        }
        None => {
            let dim = ScheduleOptions::default_dim(cfg.initial.nbar())?;
            let state = FockState::thermal(&cfg.initial, dim)?;
            let alphas = readout_alphas(cfg.initial.nbar(), rc.points);
            let mut rng = keyed_rng(cfg.seed, STREAM_READOUT, 0);
            let curve = simulate_readout(
                &state,
                &alphas,
                radial.as_ref(),
                rc.order,
                cfg.trap.eta,
                rc.shots,
                &mut rng,
            )?;
            (curve, Some(cfg.initial.nbar()))
        }
    };
    let model = match rc.model {
        FitModelKind::Gaussian => ReadoutModel::Gaussian,
        FitModelKind::Full => ReadoutModel::Full {
            eta: cfg.trap.eta,
            radial,
            dim: None,
        },
    };
    let fit = fit_nbar(&curve, &model)?;
    let mut table = Table::new(&[
        "alpha [dimensionless]",
        "prob [dimensionless]",
        "shots",
        "ci_low [dimensionless]",
        "ci_high [dimensionless]",
    ]);
    for i in 0..curve.len() {
        table.push(vec![
            curve.alphas[i],
            curve.probs[i],
            curve.shots[i] as f64,
            curve.ci[i].0,
            curve.ci[i].1,
        ]);
    }
    out.table("curve.csv", &table)?;
    out.json("fit.json", &ReadoutReport { true_nbar, fit })
}

/// Low-level populations followed by a thermal tail holding the remainder.
pub(crate) fn tailed_state(populations: &[f64], tail_nbar: f64) -> Result<FockState> {
    let tail = ThermalSpec::new(tail_nbar)?;
    let dim = tail.default_dim().max(populations.len() + 1);
    let low: f64 = populations.iter().sum();
    let shape: Vec<f64> = (populations.len()..dim)
        .map(|n| tail.population(n))
        .collect();
    let norm: f64 = shape.iter().sum();
    let mut pops = populations.to_vec();
    pops.extend(shape.iter().map(|p| {
        if norm > 0.0 {
            p / norm * (1.0 - low)
        } else {
            0.0
        }
    }));
    FockState::from_populations(&pops)
}

#[derive(Serialize)]
struct BsbReport {
    injected_populations: Option<Vec<f64>>,
    injected_tail_mass: Option<f64>,
    report: crate::measurement::TailReport,
}

fn bsb_fit(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let b = &cfg.bsb;
    let (curve, injected) = match &b.data {
        Some(path) => {
            let (times, probs, shots) = read_columns(path)?;
            (BsbCurve::new(times, probs, shots, b.envelope)?, None)
        }
        None => {
            let state = tailed_state(&b.populations, b.tail_nbar)?;
            let times: Vec<f64> = (0..b.points)
                .map(|i| b.duration * i as f64 / (b.points - 1) as f64)
                .collect();
            let settings = BsbSettings {
                rabi_0: b.rabi_0,
                scaling: b.scaling,
                envelope: b.envelope,
                radial: None,
            };
            let mut rng = keyed_rng(cfg.seed, STREAM_BSB, 0);
            (
                simulate_bsb(&state, &times, &settings, b.shots, &mut rng)?,
                Some(b.populations.clone()),
            )
        }
    };
    let max_level = b.max_level.unwrap_or(b.populations.len().max(1) - 1);
    let options = FitTailsOptions {
        rabi_0: b.rabi_0,
        scaling: b.scaling,
        bootstrap: b.bootstrap,
        seed: cfg.seed,
    };
    let report = fit_tails(&curve, max_level, &options)?;
    let mut table = Table::new(&[
        "time [s]",
        "prob [dimensionless]",
        "shots",
        "ci_low [dimensionless]",
        "ci_high [dimensionless]",
    ]);
    for i in 0..curve.times.len() {
        table.push(vec![
            curve.times[i],
            curve.probs[i],
            curve.shots[i] as f64,
            curve.ci[i].0,
            curve.ci[i].1,
        ]);
    }
    out.table("curve.csv", &table)?;
    let injected_tail_mass = injected
        .as_ref()
        .map(|p| 1.0 - p.iter().take(max_level + 1).sum::<f64>());
    out.json(
        "fit.json",
        &BsbReport {
            injected_populations: injected,
            injected_tail_mass,
            report,
        },
    )
}

fn doppler_compare(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let d = &cfg.doppler;
    let mut table = Table::new(&[
        "gamma_over_omega [dimensionless]",
        "detuning_over_gamma [dimensionless]",
        "method",
        "nbar_steady [dimensionless]",
        "epsilon [dimensionless]",
        "energy_change_per_cycle [hbar*omega]",
    ]);
    let row = |ratio: f64, x: f64, method: &str, rest: &[f64]| {
        let mut cells = vec![format_value(ratio), format_value(x), method.to_string()];
        cells.extend(rest.iter().map(|v| format_value(*v)));
        cells
    };
    let omega = cfg.trap.omega;
    for &ratio in &d.gamma_over_omega {
        let gamma = ratio * omega;
        let limit = doppler_limit(gamma, omega)?;
        let mut detunings = vec![limit.detuning / gamma];
        detunings.extend(
            d.detunings
                .iter()
                .copied()
                .filter(|x| (x + 0.5).abs() > 1e-12),
        );
        for x in detunings {
            let dc = DopplerConfig {
                gamma,
                detuning: x * gamma,
                omega,
                eta: d.eta,
                pe: d.pe,
            };
            let n_doppler = steady_state_nbar(&dc)
                .ok_or_else(|| Error::Config("detuning must be negative".into()))?;
            let eps = epsilon_equivalent(&dc);
            // energy change of one cycle applied to the initial state
            let de = doppler_energy_update(&cfg.initial, &dc) - cfg.initial.energy();
            table.push_cells(row(ratio, x, "doppler", &[n_doppler, eps, de]));
            let n_modular = modular_steady_state(&dc)?;
            let de_mod = classical_energy(eps, d.eta, &cfg.initial) - cfg.initial.energy();
            table.push_cells(row(ratio, x, "modular", &[n_modular, eps, de_mod]));
        }
    }
    out.table("comparison.csv", &table)
}
