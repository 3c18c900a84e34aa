//! Simulates single-position trades under a profit-taking / stop-loss rule.
//!
//! A path starts at the entry price and walks the mean-reverting recursion
//! one step at a time. It closes the first time the gain since entry strictly
//! exceeds the profit-taking threshold, the first time the loss strictly
//! exceeds the stop-loss threshold, or at the holding-period cap, whichever
//! comes first. P&L is quoted per unit held, and thresholds overshoot: the
//! recorded exit P&L is the actual gap at the exit step, not the threshold.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ou::{step, OuParams};
use crate::rng::RngSpec;

/// Dispersion below this is treated as exactly zero risk; the Sharpe ratio of
/// such a rule is reported as 0 rather than NaN, so degenerate nodes never
/// outrank an informative one.
pub const MIN_SHARPE_STD: f64 = 1e-12;

/// Exit thresholds and the holding-period cap. Thresholds are absolute price
/// gaps from entry; both must be finite and non-negative. A threshold of 0
/// still requires a strict crossing, so it triggers on any move in its
/// direction but never at entry itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradingRule {
    pub profit_taking: f64,
    pub stop_loss: f64,
    pub max_holding_period: u32,
}

impl TradingRule {
    pub fn new(profit_taking: f64, stop_loss: f64, max_holding_period: u32) -> Result<Self> {
        if !profit_taking.is_finite() || profit_taking < 0.0 {
            return Err(Error::Validation {
                field: "profit_taking",
                message: format!("must be finite and non-negative, got {profit_taking}"),
            });
        }
        if !stop_loss.is_finite() || stop_loss < 0.0 {
            return Err(Error::Validation {
                field: "stop_loss",
                message: format!("must be finite and non-negative, got {stop_loss}"),
            });
        }
        if max_holding_period < 1 {
            return Err(Error::Validation {
                field: "max_holding_period",
                message: "must be at least 1 step".to_string(),
            });
        }
        Ok(Self { profit_taking, stop_loss, max_holding_period })
    }
}

/// Why a simulated trade closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitReason {
    ProfitTaking,
    StopLoss,
    MaxHorizon,
}

/// One closed trade: its per-unit P&L, how long it was held, and why it
/// closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    pub exit_pnl: f64,
    pub holding_period: u32,
    pub exit_reason: ExitReason,
}

/// Exit tallies for a batch of simulated trades.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExitCounts {
    pub profit_taking: u64,
    pub stop_loss: u64,
    pub max_horizon: u64,
}

impl ExitCounts {
    pub fn total(&self) -> u64 {
        self.profit_taking + self.stop_loss + self.max_horizon
    }
}

/// Aggregate performance of one rule over a batch of paths. `mean` and `std`
/// describe the per-unit exit P&L, with the n-1 divisor on the variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleStats {
    pub mean: f64,
    pub std: f64,
    pub sharpe: f64,
    pub n_paths: u64,
    pub exit_counts: ExitCounts,
}

/// Walks one path until the rule closes it. Checks run in a fixed order at
/// each step: profit-taking first, then stop-loss, then the horizon cap.
pub fn simulate_path<R: Rng>(params: &OuParams, rule: &TradingRule, stream: &mut R) -> PathOutcome {
    let mut p = params.p0;
    let mut gap = 0.0;
    for hp in 1..=rule.max_holding_period {
        let eps: f64 = StandardNormal.sample(stream);
        p = step(params, p, eps);
        gap = p - params.p0;
        if gap > rule.profit_taking {
            return PathOutcome {
                exit_pnl: gap,
                holding_period: hp,
                exit_reason: ExitReason::ProfitTaking,
            };
        }
        if gap < -rule.stop_loss {
            return PathOutcome {
                exit_pnl: gap,
                holding_period: hp,
                exit_reason: ExitReason::StopLoss,
            };
        }
    }
    PathOutcome {
        exit_pnl: gap,
        holding_period: rule.max_holding_period,
        exit_reason: ExitReason::MaxHorizon,
    }
}

/// Simulates `n_paths` independent trades under one rule and aggregates their
/// exit P&L. Paths draw from the streams `(node_index, 0..n_paths)`, and the
/// aggregation always runs in path order, so the result is bit-identical for
/// a given `RngSpec` no matter how many workers are involved.
pub fn evaluate_rule(
    params: &OuParams,
    rule: &TradingRule,
    n_paths: u64,
    rng: &RngSpec,
    node_index: u64,
) -> Result<RuleStats> {
    if n_paths < 2 {
        return Err(Error::Validation {
            field: "n_paths",
            message: format!("need at least 2 paths for a dispersion estimate, got {n_paths}"),
        });
    }
    if n_paths >> 32 != 0 {
        return Err(Error::Validation {
            field: "n_paths",
            message: format!("path indices must fit in 32 bits, got {n_paths}"),
        });
    }
    let outcomes: Vec<PathOutcome> = (0..n_paths as usize)
        .into_par_iter()
        .with_min_len(1024)
        .map(|path_index| {
            let mut stream = rng.stream(node_index, path_index as u64);
            simulate_path(params, rule, &mut stream)
        })
        .collect();
    Ok(aggregate(&outcomes))
}

/// Path-order aggregation of exit P&L into summary statistics.
fn aggregate(outcomes: &[PathOutcome]) -> RuleStats {
    let n = outcomes.len() as f64;
    let mean = outcomes.iter().map(|o| o.exit_pnl).sum::<f64>() / n;
    let ss = outcomes
        .iter()
        .map(|o| {
            let d = o.exit_pnl - mean;
            d * d
        })
        .sum::<f64>();
    let std = (ss / (n - 1.0)).sqrt();
    let sharpe = if std < MIN_SHARPE_STD { 0.0 } else { mean / std };
    let mut exit_counts = ExitCounts::default();
    for o in outcomes {
        match o.exit_reason {
            ExitReason::ProfitTaking => exit_counts.profit_taking += 1,
            ExitReason::StopLoss => exit_counts.stop_loss += 1,
            ExitReason::MaxHorizon => exit_counts.max_horizon += 1,
        }
    }
    RuleStats { mean, std, sharpe, n_paths: outcomes.len() as u64, exit_counts }
}
