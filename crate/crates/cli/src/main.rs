//! Command-line front end: parses a run configuration, dispatches it to a
//! solver tier and writes CSV series with JSON metadata.

mod config;
mod error;
mod output;
mod presets;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nrfermion::liouville::{compare, Tolerance};

use config::{ConfigBuilder, Solver, KEYS_HELP};
use error::CliError;
use output::{table_series, Table};

pub const THREADS_VAR: &str = "NONRECIP_THREADS";

#[derive(Parser)]
#[command(name = "nrfermion", version, about = "Dissipative fermion chains with nonreciprocal bond jumps", after_help = KEYS_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file of `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set gamma=0.2`; may be repeated.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form infinite-ring results.
    #[command(after_help = KEYS_HELP)]
    Analytic(RunArgs),
    /// Correlation-matrix evolution (delta = 0).
    #[command(after_help = KEYS_HELP)]
    Gaussian(RunArgs),
    /// Quantum-jump trajectory ensemble.
    #[command(after_help = KEYS_HELP)]
    Trajectories(RunArgs),
    /// Dense master equation for small chains.
    #[command(after_help = KEYS_HELP)]
    Liouville(RunArgs),
    /// Run the solver named by the `solver` key of the configuration.
    #[command(after_help = KEYS_HELP)]
    Run(RunArgs),
    /// Run a named configuration; `preset list` shows them.
    Preset {
        name: String,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Compare two series files; fails with status 2 when they disagree.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Absolute tolerance.
        #[arg(long = "abs", conflicts_with = "sigmas")]
        absolute: Option<f64>,
        /// Tolerance in combined standard errors.
        #[arg(long)]
        sigmas: Option<f64>,
    },
}

fn threads() -> Result<usize, CliError> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!("{THREADS_VAR} must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn build(args: &RunArgs, base: Option<&str>, solver: Option<Solver>) -> Result<config::RunConfig, CliError> {
    let mut b = ConfigBuilder::new();
    if let Some(text) = base {
        b.load_str(text)?;
    }
    if let Some(path) = &args.config {
        b.load_file(path)?;
    }
    for o in &args.overrides {
        b.set_pair(o)?;
    }
    let solver = match solver {
        Some(s) => s,
        None => b
            .solver()
            .ok_or_else(|| CliError::Config("the run command needs a solver key".into()))?,
    };
    b.finish(solver)
}

fn execute(args: &RunArgs, base: Option<&str>, solver: Option<Solver>) -> Result<(), CliError> {
    let cfg = build(args, base, solver)?;
    let n = threads()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    log::info!("{} grid points with {} threads", cfg.point_count(), n);
    let results = run::execute(&cfg, n)?;
    println!(
        "{}: {} run(s), see {}",
        cfg.solver.name(),
        results.len(),
        run::describe(&cfg.out_dir, &results).display()
    );
    Ok(())
}

fn compare_files(a: &PathBuf, b: &PathBuf, absolute: Option<f64>, sigmas: Option<f64>) -> Result<(), CliError> {
    let tol = match (absolute, sigmas) {
        (Some(x), None) if x > 0.0 => Tolerance::Absolute(x),
        (None, Some(k)) if k > 0.0 => Tolerance::StandardErrors(k),
        _ => return Err(CliError::Config("give one positive tolerance, --abs or --sigmas".into())),
    };
    let (ta, tb) = (Table::read(a)?, Table::read(b)?);
    let (sa, sb) = (table_series(&ta)?, table_series(&tb)?);
    let report = compare(&sa, &sb, tol)?;
    let both_d = ta.column("D").is_some() && tb.column("D").is_some();
    let mut pass = true;
    for d in report.deviations.iter().filter(|d| both_d || d.observable != "doublons") {
        pass &= d.pass;
        println!(
            "{} {:<9} max {:e} ratio {:.3} at t = {}",
            if d.pass { "ok  " } else { "FAIL" },
            d.observable,
            d.max_deviation,
            d.worst_ratio,
            d.worst_time
        );
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Numerical("series disagree beyond the tolerance".into()))
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analytic(a) => execute(&a, None, Some(Solver::Analytic)),
        Command::Gaussian(a) => execute(&a, None, Some(Solver::Gaussian)),
        Command::Trajectories(a) => execute(&a, None, Some(Solver::Trajectories)),
        Command::Liouville(a) => execute(&a, None, Some(Solver::Liouville)),
        Command::Run(a) => execute(&a, None, None),
        Command::Preset { name, args } => {
            if name == "list" {
                for p in &presets::PRESETS {
                    println!("{:<16} {:<13} {}", p.name, p.solver.name(), p.about);
                }
                return Ok(());
            }
            let p = presets::find(&name).ok_or_else(|| {
                CliError::Config(format!("unknown preset '{name}'; try `nrfermion preset list`"))
            })?;
            execute(&args, Some(p.config), Some(p.solver))
        }
        Command::Compare { a, b, absolute, sigmas } => compare_files(&a, &b, absolute, sigmas),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
