//! Command line front end for the exit-rule library. Four subcommands:
//! `sweep` runs one full threshold mesh and writes its result files,
//! `batch` runs the standard 25-experiment table, `estimate` fits the
//! price recursion to observed data, and `moments` prints the closed-form
//! P&L moments for a parameter set.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use otr_core::{
    fmt_csv, phi_from_half_life, pnl_moments, run_batch, run_estimate, run_sweep, BatchSpec,
    ExperimentConfig, HalfLife, OuParams, RowOutcome, DEFAULT_MAX_HOLDING_PERIOD,
    DEFAULT_MESH_MAX_MULTIPLE, DEFAULT_MESH_STEP_MULTIPLE, DEFAULT_N_PATHS,
    DEFAULT_NO_OPTIMUM_THRESHOLD, HEATMAP_FILE, MANIFEST_FILE, MATRIX_CSV_FILE, NODE_CSV_FILE,
};

#[derive(Parser)]
#[command(name = "otr", version, about = "Optimal exit rules for mean-reverting prices")]
struct Cli {
    /// Worker threads for path simulation. Defaults to all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the profit-taking/stop-loss mesh for one parameter set.
    Sweep(SweepArgs),
    /// Run the standard 25-experiment forecast/half-life table.
    Batch(BatchArgs),
    /// Fit the price recursion to a price-series CSV.
    Estimate(EstimateArgs),
    /// Print closed-form P&L moments at a fixed horizon.
    Moments(MomentsArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Long-run price level the process reverts toward.
    #[arg(long, allow_negative_numbers = true)]
    forecast: f64,
    /// Mean-reversion half-life in steps.
    #[arg(long)]
    half_life: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    sigma: f64,
    /// Entry price.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    p0: f64,
    /// Steps before a position is force-exited.
    #[arg(long, default_value_t = DEFAULT_MAX_HOLDING_PERIOD)]
    max_hp: u32,
    /// Simulated paths per mesh node.
    #[arg(long, default_value_t = DEFAULT_N_PATHS)]
    n_paths: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest threshold, as a multiple of sigma.
    #[arg(long, default_value_t = DEFAULT_MESH_MAX_MULTIPLE)]
    mesh_max: f64,
    /// Mesh spacing, as a multiple of sigma.
    #[arg(long, default_value_t = DEFAULT_MESH_STEP_MULTIPLE)]
    mesh_step: f64,
    /// Directory the result files are written into.
    #[arg(long)]
    out: PathBuf,
    /// Run name recorded in the manifest.
    #[arg(long, default_value = "sweep")]
    name: String,
}

#[derive(Args)]
struct BatchArgs {
    /// Root directory; each experiment writes into its own subdirectory.
    #[arg(long)]
    out: PathBuf,
    /// Base seed; experiment k runs with seed + k - 1.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_N_PATHS)]
    n_paths: u64,
    /// Keep only the experiments with this forecast.
    #[arg(long, allow_negative_numbers = true)]
    forecast: Option<f64>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Price-series CSV with header opportunity_id,t,price,forecast.
    input: PathBuf,
    /// Also write the report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Reversion {
    /// Mean-reversion half-life in steps.
    #[arg(long)]
    half_life: Option<f64>,
    /// Autoregressive weight, as an alternative to --half-life.
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long, allow_negative_numbers = true)]
    forecast: f64,
    #[command(flatten)]
    reversion: Reversion,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    sigma: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    p0: f64,
    /// Position size multiplying the P&L.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    position_size: f64,
    #[arg(long)]
    horizon: u32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("initializing the worker pool")?;
    }
    match cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Batch(args) => batch(args),
        Command::Estimate(args) => estimate(args),
        Command::Moments(args) => moments(args),
    }
}

fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let mut config = ExperimentConfig::new(
        args.name,
        args.forecast,
        args.half_life,
        args.sigma,
        args.out,
    );
    config.p0 = args.p0;
    config.max_holding_period = args.max_hp;
    config.n_paths = args.n_paths;
    config.master_seed = args.seed;
    config.mesh_max_multiple = args.mesh_max;
    config.mesh_step_multiple = args.mesh_step;

    let run = run_sweep(&config).context("running the sweep")?;
    println!(
        "best rule: profit_taking = {}, stop_loss = {}, max_holding_period = {}",
        fmt_csv(run.best.rule.profit_taking),
        fmt_csv(run.best.rule.stop_loss),
        run.best.rule.max_holding_period,
    );
    println!(
        "sharpe = {}, mean = {}, std = {}",
        fmt_csv(run.best.stats.sharpe),
        fmt_csv(run.best.stats.mean),
        fmt_csv(run.best.stats.std),
    );
    if run.best.no_recognizable_optimum {
        println!(
            "warning: no recognizable optimum, peak sharpe is below {}",
            fmt_csv(DEFAULT_NO_OPTIMUM_THRESHOLD)
        );
    }
    println!(
        "wrote {} ({NODE_CSV_FILE}, {MATRIX_CSV_FILE}, {HEATMAP_FILE}, {MANIFEST_FILE})",
        run.out_dir.display()
    );
    Ok(())
}

fn batch(args: BatchArgs) -> anyhow::Result<()> {
    let mut spec = BatchSpec::default_table(&args.out, args.seed, args.n_paths);
    if let Some(forecast) = args.forecast {
        spec.retain_forecast(forecast);
        if spec.experiments.is_empty() {
            bail!("no experiments in the standard table have forecast {forecast}");
        }
    }
    println!("running {} experiments under {}", spec.experiments.len(), args.out.display());
    let summary = run_batch(&spec).context("running the batch")?;
    for row in &summary.rows {
        match &row.outcome {
            RowOutcome::Completed { best_pt, best_sl, best_sharpe, flagged } => {
                let note = if *flagged { "  [no recognizable optimum]" } else { "" };
                println!(
                    "{}: forecast {}, half-life {}: best (pt {}, sl {}) sharpe {}{note}",
                    row.name,
                    fmt_csv(row.forecast),
                    fmt_csv(row.half_life),
                    fmt_csv(*best_pt),
                    fmt_csv(*best_sl),
                    fmt_csv(*best_sharpe),
                );
            }
            RowOutcome::Failed(reason) => {
                println!("{}: failed: {reason}", row.name);
            }
        }
    }
    println!("summary written to {}", summary.summary_csv.display());
    Ok(())
}

fn estimate(args: EstimateArgs) -> anyhow::Result<()> {
    let report = run_estimate(&args.input, args.report.as_deref())
        .with_context(|| format!("estimating from {}", args.input.display()))?;
    print!("{}", report.text);
    Ok(())
}

fn moments(args: MomentsArgs) -> anyhow::Result<()> {
    let phi = match (args.reversion.half_life, args.reversion.phi) {
        (Some(half_life), None) => {
            phi_from_half_life(HalfLife::new(half_life).context("invalid half-life")?)
        }
        (None, Some(phi)) => phi,
        _ => unreachable!("clap enforces exactly one of --half-life and --phi"),
    };
    let params = OuParams::new(args.forecast, phi, args.sigma)
        .and_then(|p| p.with_entry_price(args.p0))
        .and_then(|p| p.with_position_size(args.position_size))
        .context("invalid parameters")?;
    let m = pnl_moments(&params, args.horizon).context("computing moments")?;
    println!("phi = {phi}");
    println!("horizon = {}", args.horizon);
    println!("mean = {}", fmt_csv(m.mean));
    println!("variance = {}", fmt_csv(m.variance));
    println!("std = {}", fmt_csv(m.std()));
    Ok(())
}
