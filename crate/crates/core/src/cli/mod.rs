//! Batch front-end: config ingestion, orchestration and result files.
//!
//! `modcool run <config.toml>` executes one experiment and writes
//! `resolved_config.toml`, the result tables and `manifest.json` into the
//! output directory. `modcool figure <kind>` writes figure-ready CSV bundles.
//! Failures exit with code 2 (config), 3 (numerical) or 4 (i/o) and print a
//! single `modcool-error code=.. kind=.. message=".."` line on stderr.

pub mod config;
mod figures;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use config::{ExperimentConfig, ExperimentKind};
pub use figures::{emit_figure_data, FigureKind, FIG3_INITIAL, FIG_S2_ROUNDS};
pub use run::{execute, Outputs, Table};

use crate::{Error, ErrorClass, Result};

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "MODCOOL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "modcool",
    version,
    about = "Modular-variable laser cooling simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Override the seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for trajectory-parallel runs.
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Print the resolved config to stdout.
    #[arg(long)]
    pub echo_config: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write the data behind one figure.
    Figure {
        kind: FigureKind,
        /// Config supplying schedule, trap and readout settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of cooling rounds (overrides the config).
        #[arg(long)]
        rounds: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Serialize)]
struct Manifest<'a> {
    program: &'static str,
    version: &'static str,
    command: String,
    kind: &'a str,
    seed: u64,
    threads: usize,
    wall_time_s: f64,
    outputs: &'a [String],
}

pub fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Io => 4,
    }
}

/// One machine-parsable diagnostic line.
pub fn diagnostic(err: &Error) -> String {
    format!(
        "modcool-error code={} kind={} message={:?}",
        exit_code(err.class()),
        err.kind(),
        err.to_string()
    )
}

fn apply_common(cfg: &mut ExperimentConfig, common: &CommonArgs) {
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<(T, usize)> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    let n = pool.current_num_threads();
    pool.install(f).map(|v| (v, n))
}

fn finish(
    cfg: &ExperimentConfig,
    common: &CommonArgs,
    command: String,
    body: impl FnOnce(&mut Outputs) -> Result<()> + Send,
) -> Result<()> {
    let start = Instant::now();
    let resolved = cfg.to_toml()?;
    if common.echo_config {
        print!("{resolved}");
    }
    let mut out = Outputs::new(&cfg.output.dir)?;
    std::fs::write(out.dir.join("resolved_config.toml"), &resolved)?;
    let (mut out, threads) = with_threads(common.threads, move || body(&mut out).map(|_| out))?;
    let files = out.files.clone();
    let manifest = Manifest {
        program: "modcool",
        version: env!("CARGO_PKG_VERSION"),
        command,
        kind: cfg.kind.name(),
        seed: cfg.seed,
        threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: &files,
    };
    out.json("manifest.json", &manifest)
}

/// Executes a parsed command line.
pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, common } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply_common(&mut cfg, &common);
            let c = cfg.clone();
            finish(&cfg, &common, "run".into(), move |out| execute(&c, out))
        }
        Command::Figure {
            kind,
            config,
            rounds,
            common,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::new(ExperimentKind::CoolQuantum),
            };
            apply_common(&mut cfg, &common);
            if let Some(r) = rounds {
                cfg.rounds = r;
            }
            let c = cfg.clone();
            let name = format!(
                "figure {}",
                kind.to_possible_value()
                    .map(|v| v.get_name().to_string())
                    .unwrap_or_default()
            );
            finish(&cfg, &common, name, move |out| {
                emit_figure_data(kind, &c, out)
            })
        }
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            if code != 0 {
                let first = e.to_string().lines().next().unwrap_or_default().to_string();
                eprintln!("modcool-error code=2 kind=usage message={first:?}");
            }
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", diagnostic(&e));
            exit_code(e.class())
        }
    }
}
