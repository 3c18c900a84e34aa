//! Optimal exit rules for mean-reverting prices.
//!
//! A position opened at some entry price is assumed to follow a discrete
//! mean-reverting recursion toward a forecast level. The question this crate
//! answers: which pair of profit-taking and stop-loss thresholds, together
//! with a maximum holding period, gives the best Sharpe ratio?
//!
//! There is no closed form for that, so the crate walks a mesh of candidate
//! threshold pairs, simulates a fixed number of price paths per pair with
//! deterministic per-path RNG streams, and reports the per-node P&L mean,
//! standard deviation and Sharpe ratio. The winning node, exit-reason
//! censuses, CSV/heat-map renderings of the grid, and batch drivers over the
//! standard forecast/half-life table are built on top of that sweep.
//!
//! The recursion itself also admits exact first and second P&L moments at a
//! fixed horizon ([`pnl_moments`]), which serve as an independent check on
//! the simulator, and an OLS fit ([`estimate`]) that recovers the recursion
//! parameters from observed prices.

mod error;
mod estimator;
mod experiments;
mod format;
mod ou;
mod output;
mod rng;
mod series;
mod simulator;
mod sweep;

pub use error::{Error, Result};
pub use estimator::{
    build_design, estimate, OpportunitySeries, OuEstimate, RegressionVectors,
};
pub use experiments::{
    run_batch, run_estimate, run_sweep, BatchSpec, BatchSummary, EstimateReport,
    ExperimentConfig, RowOutcome, SummaryRow, SweepRun, DEFAULT_MAX_HOLDING_PERIOD,
    DEFAULT_N_PATHS, SUMMARY_CSV_HEADER, TABLE_FORECASTS, TABLE_HALF_LIVES,
};
pub use format::{fmt_csv, fmt_sig, CSV_SIG_DIGITS};
pub use ou::{
    half_life_from_phi, phi_from_half_life, pnl_moments, step, HalfLife, OuParams, PnlMoments,
};
pub use output::{
    load_matrix_csv, run_file, write_heatmap_pgm, write_matrix_csv, write_node_csv, MatrixCsv,
    HEATMAP_FILE, MANIFEST_FILE, MATRIX_CSV_FILE, NODE_CSV_FILE, NODE_CSV_HEADER,
    SUMMARY_CSV_FILE,
};
pub use rng::{RngSpec, STREAM_DERIVATION};
pub use series::{parse_price_series, read_price_series, PRICE_SERIES_HEADER};
pub use simulator::{
    evaluate_rule, simulate_path, ExitCounts, ExitReason, PathOutcome, RuleStats, TradingRule,
    MIN_SHARPE_STD,
};
pub use sweep::{
    best_pt_given_max_sl, best_rule, best_rule_with_threshold, best_stop_loss_given_pt,
    build_mesh, sweep, Mesh, OptimalRule, SweepResult, DEFAULT_MESH_MAX_MULTIPLE,
    DEFAULT_MESH_STEP_MULTIPLE, DEFAULT_NO_OPTIMUM_THRESHOLD,
};
