//! Batch front-end: `calibrate`, `simulate`, `meanfield`, `sweep` and
//! `compare` subcommands over a TOML experiment config.
//!
//! Exit codes: 0 on success, 2 for configuration errors (including CLI
//! usage), 3 for runtime errors, 4 when `compare --max-dev` is exceeded.
//! Every output file embeds the resolved config, seed and RNG name, so any
//! artifact can be reproduced from its own header.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::Error;
use crate::geometry::{calibrate, CalibrationResult};
use crate::meanfield::{integrate, MeanFieldConfig};
use crate::metrics::{
    delivery_rate, delivery_rate_of_row, ensemble_mean, sweep_radio_range,
    time_averaged_delivery_rate, trajectory_deviation, DeviationReport, SweepRow,
};
use crate::model::RateParameters;
use crate::ssa::{child_seed, run_ensemble, RNG_ALGORITHM};
use crate::trajectory::Trajectory;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_THRESHOLD: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "patchmule", version, about = "Patch-based data-mule network simulator")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the probe-agent micro-simulation and write a rates file.
    Calibrate(CalibrateArgs),
    /// Run a stochastic ensemble and write trajectories plus a report.
    Simulate(SimulateArgs),
    /// Integrate the mean-field ODEs and write the trajectory.
    Meanfield(MeanfieldArgs),
    /// Sweep the base-station radio range and tabulate delivery rates.
    Sweep(SweepArgs),
    /// Compare two trajectory CSV files column by column.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Experiment config (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output rates file (JSON).
    #[arg(long, default_value = "rates.json")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Calibrated rates file from `calibrate` (or a bare rates JSON).
    #[arg(long)]
    rates: PathBuf,
    /// Output directory for run CSVs, the ensemble mean and the report.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured number of runs.
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Also report the time-averaged delivery rate per run.
    #[arg(long)]
    time_averaged_r: bool,
    /// Print the resolved plan without running.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Args)]
struct MeanfieldArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rates: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Print the resolved plan without running.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Reference trajectory CSV (for example an ensemble mean).
    reference: PathBuf,
    /// Candidate trajectory CSV (for example a mean-field run).
    candidate: PathBuf,
    /// Fail (exit 4) when any column's max deviation exceeds this.
    #[arg(long)]
    max_dev: Option<f64>,
    /// Optional JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure routed to a specific process exit code.
#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::InvalidConfig(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

fn runtime(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_RUNTIME,
        message: message.into(),
    }
}

/// Parses the command line, runs the command and returns the exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {}", err.message);
            err.code
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Meanfield(args) => cmd_meanfield(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, CliError> {
    match path {
        Some(p) => Ok(ExperimentConfig::load(p)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn load_rates(path: &Path) -> Result<RateParameters, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| runtime(format!("cannot read rates file {}: {e}", path.display())))?;
    let rates = match serde_json::from_str::<CalibrationResult>(&text) {
        Ok(result) => result.rates,
        Err(_) => serde_json::from_str::<RateParameters>(&text)
            .map_err(|e| runtime(format!("malformed rates file {}: {e}", path.display())))?,
    };
    rates.validate()?;
    Ok(rates)
}

fn config_json(config: &ExperimentConfig) -> String {
    serde_json::to_string(config).expect("config serializes")
}

/// Writes a file through a temp sibling and a rename, so a crash never
/// leaves half a file behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(Error::from)?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(Error::from)?;
    fs::rename(&tmp, path).map_err(Error::from)?;
    Ok(())
}

fn csv_meta(config: &ExperimentConfig, command: &str, seed: u64) -> Vec<(String, String)> {
    vec![
        (
            "tool".into(),
            format!("patchmule {}", env!("CARGO_PKG_VERSION")),
        ),
        ("command".into(), command.into()),
        ("rng".into(), RNG_ALGORITHM.into()),
        ("seed".into(), seed.to_string()),
        ("config".into(), config_json(config)),
    ]
}

fn csv_bytes(
    trajectory: &Trajectory,
    meta: &[(String, String)],
) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    trajectory.write_csv(&mut buf, meta)?;
    Ok(buf)
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| runtime(format!("cannot build worker pool: {e}")))
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let seed = args.seed.unwrap_or(config.simulation.seed);
    let map = config.resolve_map(seed)?;
    let movement = config.movement_params();
    let result = calibrate(&map, &movement, config.movement.calibration_days, child_seed(seed, 1))?;
    if result.no_events {
        eprintln!(
            "warning: no events observed in {} days; all rates are zero",
            result.sim_duration_days
        );
    }
    let json = serde_json::to_string_pretty(&result).expect("calibration serializes");
    write_atomic(&args.out, json.as_bytes())?;
    println!(
        "calibrated {} patches over {} days -> {}",
        map.n_patches(),
        config.movement.calibration_days,
        args.out.display()
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.simulation.seed = seed;
    }
    if let Some(runs) = args.runs {
        config.simulation.runs = runs;
    }
    config.validate()?;
    let rates = load_rates(&args.rates)?;
    let model = config.build_model(rates)?;
    let seed = config.simulation.seed;
    let sim = config.simulation_config(seed)?;
    let runs = config.simulation.runs;
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.directory));

    if args.dry_run {
        println!(
            "plan: {} runs x {} days, {} patches, seed {} (child seeds {}..), out {}",
            runs,
            sim.horizon,
            model.n_patches(),
            seed,
            child_seed(seed, 0),
            out_dir.display()
        );
        return Ok(());
    }

    let pool = thread_pool(args.jobs)?;
    let trajectories = pool.install(|| run_ensemble(&model, &sim, runs))?;
    let mean = ensemble_mean(&trajectories)?;

    fs::create_dir_all(&out_dir).map_err(Error::from)?;
    for (k, trajectory) in trajectories.iter().enumerate() {
        let meta = csv_meta(&config, "simulate", child_seed(seed, k as u64));
        write_atomic(
            &out_dir.join(format!("run_{k:03}.csv")),
            &csv_bytes(trajectory, &meta)?,
        )?;
    }
    write_atomic(
        &out_dir.join("mean.csv"),
        &csv_bytes(&mean, &csv_meta(&config, "simulate-mean", seed))?,
    )?;

    let horizon = sim.horizon;
    let per_run_r: Vec<f64> = trajectories
        .iter()
        .map(|t| -> Result<f64, CliError> {
            let state = t.snapshot(t.len() - 1)?;
            Ok(delivery_rate(&state, model.total_population(), horizon)?.r)
        })
        .collect::<Result<_, _>>()?;
    let mean_r = per_run_r.iter().sum::<f64>() / per_run_r.len() as f64;
    let std_r = if per_run_r.len() > 1 {
        (per_run_r.iter().map(|r| (r - mean_r).powi(2)).sum::<f64>()
            / (per_run_r.len() - 1) as f64)
            .sqrt()
    } else {
        0.0
    };
    let mut report = serde_json::json!({
        "command": "simulate",
        "tool": format!("patchmule {}", env!("CARGO_PKG_VERSION")),
        "rng": RNG_ALGORITHM,
        "seed": seed,
        "runs": runs,
        "horizon_days": horizon,
        "per_run_r": per_run_r,
        "mean_r": mean_r,
        "std_r": std_r,
        "config": serde_json::to_value(&config).expect("config serializes"),
    });
    if args.time_averaged_r {
        let averaged: Vec<f64> = trajectories
            .iter()
            .map(time_averaged_delivery_rate)
            .collect::<Result<_, _>>()?;
        let mean = averaged.iter().sum::<f64>() / averaged.len() as f64;
        report["per_run_time_averaged_r"] = serde_json::json!(averaged);
        report["mean_time_averaged_r"] = serde_json::json!(mean);
    }
    write_atomic(
        &out_dir.join("report.json"),
        serde_json::to_string_pretty(&report)
            .expect("report serializes")
            .as_bytes(),
    )?;
    println!(
        "{} runs -> {} (mean R = {:.6} +/- {:.6})",
        runs,
        out_dir.display(),
        mean_r,
        std_r
    );
    Ok(())
}

fn cmd_meanfield(args: MeanfieldArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let rates = load_rates(&args.rates)?;
    let model = config.build_model(rates)?;
    let seed = config.simulation.seed;
    let sim = config.simulation_config(seed)?;
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.directory));

    let mf = MeanFieldConfig::new(sim.horizon)?
        .with_step(config.simulation.meanfield_step_days)
        .with_sample_grid(sim.sample_grid.clone())
        .with_initial_population(config.expected_initial_population(model.n_patches()));
    let trajectory = integrate(&model, &mf)?;

    fs::create_dir_all(&out_dir).map_err(Error::from)?;
    write_atomic(
        &out_dir.join("meanfield.csv"),
        &csv_bytes(&trajectory, &csv_meta(&config, "meanfield", seed))?,
    )?;
    let final_row = trajectory.row(trajectory.len() - 1);
    let r = delivery_rate_of_row(final_row, &trajectory.layout(), sim.horizon)?;
    let report = serde_json::json!({
        "command": "meanfield",
        "tool": format!("patchmule {}", env!("CARGO_PKG_VERSION")),
        "step_days": config.simulation.meanfield_step_days,
        "horizon_days": sim.horizon,
        "final_r": r,
        "config": serde_json::to_value(&config).expect("config serializes"),
    });
    write_atomic(
        &out_dir.join("meanfield_report.json"),
        serde_json::to_string_pretty(&report)
            .expect("report serializes")
            .as_bytes(),
    )?;
    println!(
        "mean-field -> {} (R at horizon = {:.6})",
        out_dir.display(),
        r
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.simulation.seed = seed;
    }
    config.validate()?;
    let seed = config.simulation.seed;
    let sweep = config.sweep_config(seed);
    sweep.validate()?;
    let template = config.resolve_map(seed)?;
    let movement = config.movement_params();
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.directory));

    if args.dry_run {
        println!(
            "plan: {} ranges x {} runs, horizon {} days, calibration {} days, seed {}, out {}",
            sweep.ranges_m.len(),
            sweep.runs_per_range,
            sweep.horizon_days,
            sweep.calibration_days,
            seed,
            out_dir.display()
        );
        for r in &sweep.ranges_m {
            println!("  range {r} m");
        }
        return Ok(());
    }

    let pool = thread_pool(args.jobs)?;
    let rows = pool.install(|| sweep_radio_range(&template, &movement, &sweep))?;

    let mut csv = String::new();
    csv.push_str(&format!(
        "# tool: patchmule {}\n# command: sweep\n# rng: {}\n# seed: {}\n# config: {}\n",
        env!("CARGO_PKG_VERSION"),
        RNG_ALGORITHM,
        seed,
        config_json(&config)
    ));
    csv.push_str("range_m,mean_R,std_R,runs\n");
    for row in &rows {
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{}\n",
            row.range_m, row.mean_r, row.std_r, row.runs
        ));
    }
    fs::create_dir_all(&out_dir).map_err(Error::from)?;
    write_atomic(&out_dir.join("sweep.csv"), csv.as_bytes())?;
    let report = serde_json::json!({
        "command": "sweep",
        "tool": format!("patchmule {}", env!("CARGO_PKG_VERSION")),
        "rng": RNG_ALGORITHM,
        "seed": seed,
        "rows": rows,
        "config": serde_json::to_value(&config).expect("config serializes"),
    });
    write_atomic(
        &out_dir.join("sweep.json"),
        serde_json::to_string_pretty(&report)
            .expect("report serializes")
            .as_bytes(),
    )?;
    print_sweep_table(&rows);
    println!("sweep -> {}", out_dir.display());
    Ok(())
}

fn print_sweep_table(rows: &[SweepRow]) {
    println!("{:>10} {:>12} {:>12} {:>6}", "range_m", "mean_R", "std_R", "runs");
    for row in rows {
        println!(
            "{:>10.0} {:>12.6} {:>12.6} {:>6}",
            row.range_m, row.mean_r, row.std_r, row.runs
        );
    }
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let read = |path: &Path| -> Result<Trajectory, CliError> {
        let file = fs::File::open(path)
            .map_err(|e| runtime(format!("cannot open {}: {e}", path.display())))?;
        Ok(Trajectory::read_csv(std::io::BufReader::new(file))?)
    };
    let reference = read(&args.reference)?;
    let candidate = read(&args.candidate)?;
    let report = trajectory_deviation(&reference, &candidate)?;
    print_deviation(&report);
    if let Some(out) = &args.out {
        write_atomic(
            out,
            serde_json::to_string_pretty(&report)
                .expect("report serializes")
                .as_bytes(),
        )?;
    }
    if let Some(limit) = args.max_dev {
        if report.max_abs > limit {
            return Err(CliError {
                code: EXIT_THRESHOLD,
                message: format!(
                    "max deviation {:.6e} exceeds threshold {:.6e}",
                    report.max_abs, limit
                ),
            });
        }
    }
    Ok(())
}

fn print_deviation(report: &DeviationReport) {
    let mut worst: Vec<_> = report.columns.iter().collect();
    worst.sort_by(|a, b| b.max_abs.total_cmp(&a.max_abs));
    println!("overall: max {:.6e}, rms {:.6e}", report.max_abs, report.rms);
    println!("worst columns:");
    for column in worst.iter().take(5) {
        println!(
            "  {:>8}: max {:.6e}, rms {:.6e}",
            column.column, column.max_abs, column.rms
        );
    }
}
