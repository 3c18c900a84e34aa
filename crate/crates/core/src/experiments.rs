//! End-to-end runs: one sweep with its output files, batches of sweeps over
//! the standard forecast/half-life table, and estimation reports for
//! observed series.
//!
//! A sweep run writes four files into its output directory: `nodes.csv`,
//! `matrix.csv`, `heatmap.pgm` and `manifest.txt`. A batch nests one such
//! directory per experiment under a common root and adds a `summary.csv`
//! with the best rule found per experiment.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimator::{build_design, estimate, OuEstimate};
use crate::format::fmt_csv;
use crate::ou::{phi_from_half_life, HalfLife, OuParams};
use crate::output::{
    run_file, write_heatmap_pgm, write_matrix_csv, write_node_csv, HEATMAP_FILE, MANIFEST_FILE,
    MATRIX_CSV_FILE, NODE_CSV_FILE, SUMMARY_CSV_FILE,
};
use crate::rng::{RngSpec, STREAM_DERIVATION};
use crate::series::read_price_series;
use crate::sweep::{best_rule, build_mesh, sweep, OptimalRule, SweepResult};

pub const DEFAULT_MAX_HOLDING_PERIOD: u32 = 100;
pub const DEFAULT_N_PATHS: u64 = 100_000;

/// Everything one sweep run needs. Construct with [`ExperimentConfig::new`]
/// and adjust fields as needed; [`run_sweep`] validates before running.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub forecast: f64,
    pub half_life: f64,
    pub sigma: f64,
    pub p0: f64,
    pub max_holding_period: u32,
    pub n_paths: u64,
    pub master_seed: u64,
    pub mesh_max_multiple: f64,
    pub mesh_step_multiple: f64,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(
        name: impl Into<String>,
        forecast: f64,
        half_life: f64,
        sigma: f64,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            name: name.into(),
            forecast,
            half_life,
            sigma,
            p0: 0.0,
            max_holding_period: DEFAULT_MAX_HOLDING_PERIOD,
            n_paths: DEFAULT_N_PATHS,
            master_seed: 0,
            mesh_max_multiple: crate::sweep::DEFAULT_MESH_MAX_MULTIPLE,
            mesh_step_multiple: crate::sweep::DEFAULT_MESH_STEP_MULTIPLE,
            out_dir: out_dir.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Validation {
                field: "name",
                message: "must not be empty".to_string(),
            });
        }
        HalfLife::new(self.half_life).map_err(|e| Error::Validation {
            field: "half_life",
            message: e.to_string(),
        })?;
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(Error::Validation {
                field: "sigma",
                message: format!("must be finite and positive, got {}", self.sigma),
            });
        }
        if !self.forecast.is_finite() {
            return Err(Error::Validation {
                field: "forecast",
                message: format!("must be finite, got {}", self.forecast),
            });
        }
        if !self.p0.is_finite() {
            return Err(Error::Validation {
                field: "p0",
                message: format!("must be finite, got {}", self.p0),
            });
        }
        if self.max_holding_period < 1 {
            return Err(Error::Validation {
                field: "max_holding_period",
                message: "must be at least 1 step".to_string(),
            });
        }
        if self.n_paths < 2 {
            return Err(Error::Validation {
                field: "n_paths",
                message: format!("need at least 2 paths, got {}", self.n_paths),
            });
        }
        Ok(())
    }

    /// The process parameters this config describes.
    pub fn params(&self) -> Result<OuParams> {
        let phi = phi_from_half_life(HalfLife::new(self.half_life)?);
        OuParams::new(self.forecast, phi, self.sigma)?.with_entry_price(self.p0)
    }
}

/// A finished sweep run: the grid, the winning rule, and where the files
/// went.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub sweep: SweepResult,
    pub best: OptimalRule,
    pub out_dir: PathBuf,
}

impl SweepRun {
    pub fn node_csv(&self) -> PathBuf {
        run_file(&self.out_dir, NODE_CSV_FILE)
    }

    pub fn matrix_csv(&self) -> PathBuf {
        run_file(&self.out_dir, MATRIX_CSV_FILE)
    }

    pub fn heatmap(&self) -> PathBuf {
        run_file(&self.out_dir, HEATMAP_FILE)
    }

    pub fn manifest(&self) -> PathBuf {
        run_file(&self.out_dir, MANIFEST_FILE)
    }
}

/// Runs one configured sweep and writes its four output files.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepRun> {
    config.validate()?;
    let params = config.params()?;
    let mesh = build_mesh(config.sigma, config.mesh_max_multiple, config.mesh_step_multiple)?;
    let rng = RngSpec::new(config.master_seed);
    let result = sweep(&params, &mesh, config.n_paths, config.max_holding_period, &rng)?;
    let best = best_rule(&result);

    fs::create_dir_all(&config.out_dir)
        .map_err(|source| Error::Io { path: config.out_dir.clone(), source })?;
    write_node_csv(&run_file(&config.out_dir, NODE_CSV_FILE), &result)?;
    write_matrix_csv(&run_file(&config.out_dir, MATRIX_CSV_FILE), &result)?;
    write_heatmap_pgm(&run_file(&config.out_dir, HEATMAP_FILE), &result)?;
    let manifest_path = run_file(&config.out_dir, MANIFEST_FILE);
    let manifest = render_manifest(config, &result);
    fs::write(&manifest_path, manifest)
        .map_err(|source| Error::Io { path: manifest_path.clone(), source })?;

    Ok(SweepRun { sweep: result, best, out_dir: config.out_dir.clone() })
}

/// Key-value record of how a run was produced. Everything needed to repeat
/// it, plus the gray mapping of the heat-map.
fn render_manifest(config: &ExperimentConfig, result: &SweepResult) -> String {
    let (sharpe_min, sharpe_max) = result.sharpe_range();
    let mut text = String::new();
    let mut kv = |k: &str, v: String| {
        text.push_str(k);
        text.push_str(" = ");
        text.push_str(&v);
        text.push('\n');
    };
    kv("name", config.name.clone());
    kv("forecast", config.forecast.to_string());
    kv("half_life", config.half_life.to_string());
    kv("sigma", config.sigma.to_string());
    kv("p0", config.p0.to_string());
    kv("max_holding_period", config.max_holding_period.to_string());
    kv("n_paths", config.n_paths.to_string());
    kv("master_seed", config.master_seed.to_string());
    kv("mesh_max_multiple", config.mesh_max_multiple.to_string());
    kv("mesh_step_multiple", config.mesh_step_multiple.to_string());
    kv("out_dir", config.out_dir.display().to_string());
    kv("phi", result.params.phi.to_string());
    kv("position_size", result.params.m.to_string());
    kv("mesh_levels_per_axis", result.mesh.profit_taking_levels.len().to_string());
    kv("rng_streams", STREAM_DERIVATION.to_string());
    kv("library", format!("otr-core {}", env!("CARGO_PKG_VERSION")));
    kv("sharpe_min", fmt_csv(sharpe_min));
    kv("sharpe_max", fmt_csv(sharpe_max));
    kv("heatmap_scale", "linear [sharpe_min, sharpe_max] -> [0, 255]".to_string());
    text
}

/// The forecasts of the standard table, in execution order.
pub const TABLE_FORECASTS: [f64; 5] = [10.0, 5.0, 0.0, -5.0, -10.0];
/// The half-lives of the standard table, in execution order.
pub const TABLE_HALF_LIVES: [f64; 5] = [5.0, 10.0, 25.0, 50.0, 100.0];

/// Table numbering groups forecasts as {0, 5, 10, -5, -10} with half-lives
/// ascending inside each group, regardless of execution order.
fn table_number(forecast: f64, half_life: f64) -> Option<usize> {
    const NUMBERING_FORECASTS: [f64; 5] = [0.0, 5.0, 10.0, -5.0, -10.0];
    let block = NUMBERING_FORECASTS.iter().position(|f| *f == forecast)?;
    let offset = TABLE_HALF_LIVES.iter().position(|h| *h == half_life)?;
    Some(1 + block * 5 + offset)
}

/// A list of experiments sharing one output root.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSpec {
    pub out_dir: PathBuf,
    pub experiments: Vec<ExperimentConfig>,
}

impl BatchSpec {
    /// The standard 25-experiment batch: every forecast in {10, 5, 0, -5,
    /// -10} crossed with every half-life in {5, 10, 25, 50, 100}, sigma 1.
    /// Experiments are named `Table_1` through `Table_25` by the conventional
    /// numbering, which orders forecasts {0, 5, 10, -5, -10}; execution keeps
    /// the product order of the constants above, so `Table_11` runs first.
    /// Each experiment gets `base_seed + table_number - 1` as its master
    /// seed, so an experiment's streams do not depend on which subset of the
    /// table runs.
    pub fn default_table(out_dir: impl Into<PathBuf>, base_seed: u64, n_paths: u64) -> Self {
        let out_dir = out_dir.into();
        let mut experiments = Vec::with_capacity(25);
        for forecast in TABLE_FORECASTS {
            for half_life in TABLE_HALF_LIVES {
                let number = table_number(forecast, half_life)
                    .expect("the standard table covers its own constants");
                let name = format!("Table_{number}");
                let mut config =
                    ExperimentConfig::new(&name, forecast, half_life, 1.0, out_dir.join(&name));
                config.n_paths = n_paths;
                config.master_seed = base_seed + (number as u64 - 1);
                experiments.push(config);
            }
        }
        Self { out_dir, experiments }
    }

    /// Keeps only experiments with the given forecast.
    pub fn retain_forecast(&mut self, forecast: f64) {
        self.experiments.retain(|c| c.forecast == forecast);
    }
}

/// How one experiment of a batch ended.
#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Completed { best_pt: f64, best_sl: f64, best_sharpe: f64, flagged: bool },
    Failed(String),
}

/// One line of the batch summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub forecast: f64,
    pub half_life: f64,
    pub sigma: f64,
    pub outcome: RowOutcome,
}

/// A finished batch: all rows in execution order and the summary file path.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub rows: Vec<SummaryRow>,
    pub summary_csv: PathBuf,
}

pub const SUMMARY_CSV_HEADER: &str =
    "name,forecast,half_life,sigma,best_pt,best_sl,best_sharpe,flagged";

/// Runs every experiment of a batch. A failing experiment is recorded in its
/// summary row and does not stop the rest. The summary is written to
/// `summary.csv` under the batch root.
pub fn run_batch(spec: &BatchSpec) -> Result<BatchSummary> {
    if spec.experiments.is_empty() {
        return Err(Error::Validation {
            field: "experiments",
            message: "batch must contain at least one experiment".to_string(),
        });
    }
    fs::create_dir_all(&spec.out_dir)
        .map_err(|source| Error::Io { path: spec.out_dir.clone(), source })?;

    let mut rows = Vec::with_capacity(spec.experiments.len());
    for config in &spec.experiments {
        let outcome = match run_sweep(config) {
            Ok(run) => RowOutcome::Completed {
                best_pt: run.best.rule.profit_taking,
                best_sl: run.best.rule.stop_loss,
                best_sharpe: run.best.stats.sharpe,
                flagged: run.best.no_recognizable_optimum,
            },
            Err(e) => RowOutcome::Failed(e.to_string()),
        };
        rows.push(SummaryRow {
            name: config.name.clone(),
            forecast: config.forecast,
            half_life: config.half_life,
            sigma: config.sigma,
            outcome,
        });
    }

    let summary_csv = run_file(&spec.out_dir, SUMMARY_CSV_FILE);
    let mut text = String::from(SUMMARY_CSV_HEADER);
    text.push('\n');
    for row in &rows {
        match &row.outcome {
            RowOutcome::Completed { best_pt, best_sl, best_sharpe, flagged } => {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    row.name,
                    fmt_csv(row.forecast),
                    fmt_csv(row.half_life),
                    fmt_csv(row.sigma),
                    fmt_csv(*best_pt),
                    fmt_csv(*best_sl),
                    fmt_csv(*best_sharpe),
                    flagged,
                ));
            }
            RowOutcome::Failed(_) => {
                text.push_str(&format!(
                    "{},{},{},{},,,,error\n",
                    row.name,
                    fmt_csv(row.forecast),
                    fmt_csv(row.half_life),
                    fmt_csv(row.sigma),
                ));
            }
        }
    }
    fs::write(&summary_csv, text)
        .map_err(|source| Error::Io { path: summary_csv.clone(), source })?;

    Ok(BatchSummary { rows, summary_csv })
}

/// An estimation run: the fitted values plus the rendered report text.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimate: OuEstimate,
    pub text: String,
}

/// Fits the price recursion to a price-series CSV file. The report is
/// returned as text and, when `report_out` is given, also written there.
pub fn run_estimate(input: &Path, report_out: Option<&Path>) -> Result<EstimateReport> {
    let opportunities = read_price_series(input)?;
    let design = build_design(&opportunities)?;
    if design.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: design.len() });
    }
    let est = estimate(&design)?;

    let mut text = String::new();
    text.push_str(&format!("n_obs = {}\n", est.n_obs));
    text.push_str(&format!("phi_hat = {}\n", fmt_csv(est.phi_hat)));
    text.push_str(&format!("sigma_hat = {}\n", fmt_csv(est.sigma_hat)));
    match est.implied_half_life() {
        Some(hl) => text.push_str(&format!("half_life = {}\n", fmt_csv(hl.get()))),
        None => text.push_str(&format!(
            "warning = phi_hat {} is outside (0, 1); the series does not mean-revert\n",
            fmt_csv(est.phi_hat)
        )),
    }
    if let Some(path) = report_out {
        fs::write(path, &text)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    }
    Ok(EstimateReport { estimate: est, text })
}
