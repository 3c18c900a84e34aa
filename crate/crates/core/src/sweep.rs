//! Threshold meshes, full-grid evaluation, and optimal-rule queries.
//!
//! A mesh crosses a list of profit-taking levels with a list of stop-loss
//! levels. Sweeping it scores every node by Monte Carlo and the queries then
//! read optima off the stored grid: the global best, the best stop-loss for a
//! fixed profit-taking level, or the best node under a stop-loss cap. Ties
//! always resolve toward the smaller profit-taking level, then the smaller
//! stop-loss, so results are reproducible.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ou::OuParams;
use crate::rng::RngSpec;
use crate::simulator::{evaluate_rule, RuleStats, TradingRule};

pub const DEFAULT_MESH_MAX_MULTIPLE: f64 = 10.0;
pub const DEFAULT_MESH_STEP_MULTIPLE: f64 = 0.5;

/// A sweep's best node is still reported when the whole surface is flat, but
/// it gets flagged as "no recognizable optimum" when the best Sharpe ratio
/// sits below this threshold. Picking a winner on such a surface would be
/// fitting noise.
pub const DEFAULT_NO_OPTIMUM_THRESHOLD: f64 = 0.05;

/// Strictly increasing, non-negative threshold levels on both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub profit_taking_levels: Vec<f64>,
    pub stop_loss_levels: Vec<f64>,
}

impl Mesh {
    pub fn new(profit_taking_levels: Vec<f64>, stop_loss_levels: Vec<f64>) -> Result<Self> {
        validate_levels("profit_taking_levels", &profit_taking_levels)?;
        validate_levels("stop_loss_levels", &stop_loss_levels)?;
        Ok(Self { profit_taking_levels, stop_loss_levels })
    }

    pub fn node_count(&self) -> usize {
        self.profit_taking_levels.len() * self.stop_loss_levels.len()
    }

    /// Row-major node ordinal: profit-taking is the outer axis, stop-loss the
    /// inner one. This same ordinal keys the node's RNG streams.
    pub fn node_ordinal(&self, pt_index: usize, sl_index: usize) -> usize {
        debug_assert!(pt_index < self.profit_taking_levels.len());
        debug_assert!(sl_index < self.stop_loss_levels.len());
        pt_index * self.stop_loss_levels.len() + sl_index
    }

    pub fn node_indices(&self, ordinal: usize) -> (usize, usize) {
        let n_sl = self.stop_loss_levels.len();
        (ordinal / n_sl, ordinal % n_sl)
    }
}

fn validate_levels(field: &'static str, levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::Validation { field, message: "must not be empty".to_string() });
    }
    for w in levels.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Validation {
                field,
                message: format!("levels must be strictly increasing, got {} then {}", w[0], w[1]),
            });
        }
    }
    if let Some(bad) = levels.iter().find(|l| !l.is_finite() || **l < 0.0) {
        return Err(Error::Validation {
            field,
            message: format!("levels must be finite and non-negative, got {bad}"),
        });
    }
    Ok(())
}

/// Builds the standard square mesh `{0, step, 2*step, ..., max} * sigma` on
/// both axes. The defaults give 21 levels from 0 to 10 sigma.
pub fn build_mesh(sigma: f64, max_multiple: f64, step_multiple: f64) -> Result<Mesh> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::Validation {
            field: "sigma",
            message: format!("must be finite and positive, got {sigma}"),
        });
    }
    if !step_multiple.is_finite() || step_multiple <= 0.0 {
        return Err(Error::Validation {
            field: "step_multiple",
            message: format!("must be finite and positive, got {step_multiple}"),
        });
    }
    if !max_multiple.is_finite() || max_multiple < step_multiple {
        return Err(Error::Validation {
            field: "max_multiple",
            message: format!("must be finite and at least step_multiple, got {max_multiple}"),
        });
    }
    // The small slack keeps 'max / step' honest when the quotient is an
    // integer that floating division lands just below.
    let steps = (max_multiple / step_multiple + 1e-9).floor() as usize;
    let levels: Vec<f64> = (0..=steps).map(|k| k as f64 * step_multiple * sigma).collect();
    Mesh::new(levels.clone(), levels)
}

/// Full grid of per-node statistics from one sweep, with everything needed to
/// reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub mesh: Mesh,
    pub params: OuParams,
    pub n_paths: u64,
    pub max_holding_period: u32,
    pub master_seed: u64,
    grid: Vec<RuleStats>,
}

impl SweepResult {
    /// Assembles a result from an existing grid, which must be row-major with
    /// one entry per mesh node.
    pub fn from_grid(
        mesh: Mesh,
        params: OuParams,
        n_paths: u64,
        max_holding_period: u32,
        master_seed: u64,
        grid: Vec<RuleStats>,
    ) -> Result<Self> {
        if grid.len() != mesh.node_count() {
            return Err(Error::Validation {
                field: "grid",
                message: format!(
                    "expected {} entries for the mesh, got {}",
                    mesh.node_count(),
                    grid.len()
                ),
            });
        }
        Ok(Self { mesh, params, n_paths, max_holding_period, master_seed, grid })
    }

    pub fn stats(&self, pt_index: usize, sl_index: usize) -> &RuleStats {
        &self.grid[self.mesh.node_ordinal(pt_index, sl_index)]
    }

    /// Row-major view of the grid.
    pub fn grid(&self) -> &[RuleStats] {
        &self.grid
    }

    /// Smallest and largest Sharpe ratio on the grid.
    pub fn sharpe_range(&self) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for s in &self.grid {
            min = min.min(s.sharpe);
            max = max.max(s.sharpe);
        }
        (min, max)
    }

    fn rule_at(&self, pt_index: usize, sl_index: usize) -> TradingRule {
        TradingRule {
            profit_taking: self.mesh.profit_taking_levels[pt_index],
            stop_loss: self.mesh.stop_loss_levels[sl_index],
            max_holding_period: self.max_holding_period,
        }
    }
}

/// Scores every mesh node with `n_paths` simulated trades each. Node
/// `(pt_index, sl_index)` uses the RNG streams keyed by its row-major
/// ordinal, so a grid value never depends on which other nodes were swept.
pub fn sweep(
    params: &OuParams,
    mesh: &Mesh,
    n_paths: u64,
    max_holding_period: u32,
    rng: &RngSpec,
) -> Result<SweepResult> {
    if mesh.node_count() as u64 >> 32 != 0 {
        return Err(Error::Validation {
            field: "mesh",
            message: "node ordinals must fit in 32 bits".to_string(),
        });
    }
    let grid: Vec<RuleStats> = (0..mesh.node_count())
        .into_par_iter()
        .map(|ordinal| {
            let (pt_index, sl_index) = mesh.node_indices(ordinal);
            let rule = TradingRule::new(
                mesh.profit_taking_levels[pt_index],
                mesh.stop_loss_levels[sl_index],
                max_holding_period,
            )?;
            evaluate_rule(params, &rule, n_paths, rng, ordinal as u64)
        })
        .collect::<Result<_>>()?;
    SweepResult::from_grid(mesh.clone(), *params, n_paths, max_holding_period, rng.master_seed, grid)
}

/// The winning node of a query, with its grid position and the advisory flag
/// for surfaces too flat to trust.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalRule {
    pub rule: TradingRule,
    pub stats: RuleStats,
    pub pt_index: usize,
    pub sl_index: usize,
    pub no_recognizable_optimum: bool,
}

fn pick(
    result: &SweepResult,
    nodes: impl Iterator<Item = (usize, usize)>,
    threshold: f64,
) -> Option<OptimalRule> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (pt_index, sl_index) in nodes {
        let sharpe = result.stats(pt_index, sl_index).sharpe;
        // Strict comparison in row-major visit order implements the
        // tie-break: smaller profit-taking first, then smaller stop-loss.
        if best.map_or(true, |(_, _, s)| sharpe > s) {
            best = Some((pt_index, sl_index, sharpe));
        }
    }
    best.map(|(pt_index, sl_index, sharpe)| OptimalRule {
        rule: result.rule_at(pt_index, sl_index),
        stats: *result.stats(pt_index, sl_index),
        pt_index,
        sl_index,
        no_recognizable_optimum: sharpe < threshold,
    })
}

fn all_nodes(result: &SweepResult) -> impl Iterator<Item = (usize, usize)> + '_ {
    let n_sl = result.mesh.stop_loss_levels.len();
    (0..result.mesh.profit_taking_levels.len())
        .flat_map(move |pt| (0..n_sl).map(move |sl| (pt, sl)))
}

/// Best node of the whole grid under the default flatness threshold.
pub fn best_rule(result: &SweepResult) -> OptimalRule {
    best_rule_with_threshold(result, DEFAULT_NO_OPTIMUM_THRESHOLD)
}

/// Best node of the whole grid, flagging it when its Sharpe ratio falls below
/// `threshold`.
pub fn best_rule_with_threshold(result: &SweepResult, threshold: f64) -> OptimalRule {
    pick(result, all_nodes(result), threshold).expect("mesh is never empty")
}

/// Best stop-loss for one of the mesh's profit-taking levels. The level must
/// match a mesh level; there is no interpolation.
pub fn best_stop_loss_given_pt(result: &SweepResult, profit_taking: f64) -> Result<OptimalRule> {
    let pt_index = result
        .mesh
        .profit_taking_levels
        .iter()
        .position(|l| level_matches(*l, profit_taking))
        .ok_or(Error::NotOnMesh { value: profit_taking })?;
    let n_sl = result.mesh.stop_loss_levels.len();
    let nodes = (0..n_sl).map(move |sl| (pt_index, sl));
    Ok(pick(result, nodes, DEFAULT_NO_OPTIMUM_THRESHOLD).expect("row is never empty"))
}

/// Best node among those whose stop-loss does not exceed `sl_max`.
pub fn best_pt_given_max_sl(result: &SweepResult, sl_max: f64) -> Result<OptimalRule> {
    if !sl_max.is_finite() {
        return Err(Error::Validation {
            field: "sl_max",
            message: format!("must be finite, got {sl_max}"),
        });
    }
    let slack = 1e-9 * sl_max.abs().max(1.0);
    let n_sl = result
        .mesh
        .stop_loss_levels
        .iter()
        .take_while(|l| **l <= sl_max + slack)
        .count();
    if n_sl == 0 {
        return Err(Error::NoEligibleNodes { sl_max });
    }
    let nodes = (0..result.mesh.profit_taking_levels.len())
        .flat_map(move |pt| (0..n_sl).map(move |sl| (pt, sl)));
    Ok(pick(result, nodes, DEFAULT_NO_OPTIMUM_THRESHOLD).expect("mesh is never empty"))
}

fn level_matches(level: f64, requested: f64) -> bool {
    (level - requested).abs() <= 1e-9 * level.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::ExitCounts;

    fn synthetic(sharpes: &[&[f64]]) -> SweepResult {
        let n_pt = sharpes.len();
        let n_sl = sharpes[0].len();
        let levels = |n: usize| (0..n).map(|k| k as f64 * 0.5).collect::<Vec<_>>();
        let mesh = Mesh::new(levels(n_pt), levels(n_sl)).unwrap();
        let grid: Vec<RuleStats> = sharpes
            .iter()
            .flat_map(|row| row.iter())
            .map(|&sharpe| RuleStats {
                mean: sharpe,
                std: 1.0,
                sharpe,
                n_paths: 10,
                exit_counts: ExitCounts { profit_taking: 10, ..Default::default() },
            })
            .collect();
        let params = OuParams::new(0.0, 0.5, 1.0).unwrap();
        SweepResult::from_grid(mesh, params, 10, 5, 0, grid).unwrap()
    }

    #[test]
    fn default_mesh_has_21_levels_per_axis() {
        let mesh = build_mesh(1.0, DEFAULT_MESH_MAX_MULTIPLE, DEFAULT_MESH_STEP_MULTIPLE).unwrap();
        assert_eq!(mesh.profit_taking_levels.len(), 21);
        assert_eq!(mesh.stop_loss_levels.len(), 21);
        assert_eq!(mesh.profit_taking_levels[0], 0.0);
        assert_eq!(mesh.profit_taking_levels[1], 0.5);
        assert_eq!(mesh.profit_taking_levels[20], 10.0);
        assert_eq!(mesh.node_count(), 441);
    }

    #[test]
    fn mesh_levels_scale_with_sigma() {
        let mesh = build_mesh(2.0, 10.0, 0.5).unwrap();
        assert_eq!(mesh.profit_taking_levels[1], 1.0);
        assert_eq!(mesh.profit_taking_levels[20], 20.0);
    }

    #[test]
    fn small_mesh_example() {
        let mesh = build_mesh(1.0, 2.0, 1.0).unwrap();
        assert_eq!(mesh.profit_taking_levels, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn awkward_step_ratio_still_hits_the_cap() {
        // 1.0 / 0.1 floats to 9.999...; the mesh must still reach 1.0.
        let mesh = build_mesh(1.0, 1.0, 0.1).unwrap();
        assert_eq!(mesh.profit_taking_levels.len(), 11);
        assert!((mesh.profit_taking_levels[10] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mesh_rejects_bad_inputs() {
        assert!(build_mesh(0.0, 10.0, 0.5).is_err());
        assert!(build_mesh(1.0, 10.0, 0.0).is_err());
        assert!(build_mesh(1.0, 0.25, 0.5).is_err());
        assert!(Mesh::new(vec![], vec![0.0]).is_err());
        assert!(Mesh::new(vec![0.0, 0.0], vec![0.0]).is_err());
        assert!(Mesh::new(vec![1.0, 0.5], vec![0.0]).is_err());
        assert!(Mesh::new(vec![-1.0, 0.5], vec![0.0]).is_err());
    }

    #[test]
    fn ordinals_are_row_major() {
        let mesh = build_mesh(1.0, 2.0, 1.0).unwrap();
        assert_eq!(mesh.node_ordinal(0, 0), 0);
        assert_eq!(mesh.node_ordinal(0, 2), 2);
        assert_eq!(mesh.node_ordinal(1, 0), 3);
        assert_eq!(mesh.node_indices(5), (1, 2));
    }

    #[test]
    fn argmax_finds_the_single_peak() {
        let r = synthetic(&[&[0.1, 0.2], &[3.0, 0.4]]);
        let best = best_rule(&r);
        assert_eq!((best.pt_index, best.sl_index), (1, 0));
        assert_eq!(best.stats.sharpe, 3.0);
        assert!(!best.no_recognizable_optimum);
    }

    #[test]
    fn ties_resolve_to_smaller_thresholds() {
        let r = synthetic(&[&[0.5, 2.0], &[2.0, 0.1]]);
        let best = best_rule(&r);
        assert_eq!((best.pt_index, best.sl_index), (0, 1));
        let flat = synthetic(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let best = best_rule(&flat);
        assert_eq!((best.pt_index, best.sl_index), (0, 0));
    }

    #[test]
    fn flat_surface_is_flagged() {
        let r = synthetic(&[&[0.01, 0.02], &[0.0, -0.3]]);
        let best = best_rule(&r);
        assert_eq!((best.pt_index, best.sl_index), (0, 1));
        assert!(best.no_recognizable_optimum);
        assert!(!best_rule_with_threshold(&r, 0.01).no_recognizable_optimum);
    }

    #[test]
    fn row_query_scans_a_single_profit_taking_level() {
        let r = synthetic(&[&[0.1, 9.0], &[0.3, 0.2]]);
        let best = best_stop_loss_given_pt(&r, 0.5).unwrap();
        assert_eq!((best.pt_index, best.sl_index), (1, 0));
        assert_eq!(best.stats.sharpe, 0.3);
        assert!(matches!(
            best_stop_loss_given_pt(&r, 0.25),
            Err(Error::NotOnMesh { .. })
        ));
    }

    #[test]
    fn capped_query_ignores_large_stop_losses() {
        let r = synthetic(&[&[0.1, 9.0], &[0.3, 0.2]]);
        let best = best_pt_given_max_sl(&r, 0.0).unwrap();
        assert_eq!((best.pt_index, best.sl_index), (1, 0));
        assert!(matches!(
            best_pt_given_max_sl(&r, -1.0),
            Err(Error::NoEligibleNodes { .. })
        ));
    }

    #[test]
    fn slack_cap_equals_unconstrained_best() {
        let r = synthetic(&[&[0.1, 9.0], &[0.3, 0.2]]);
        let capped = best_pt_given_max_sl(&r, 100.0).unwrap();
        let best = best_rule(&r);
        assert_eq!(capped.pt_index, best.pt_index);
        assert_eq!(capped.sl_index, best.sl_index);
        assert_eq!(capped.stats, best.stats);
    }

    #[test]
    fn noiseless_grid_sweeps_to_all_zero_sharpes() {
        let params = OuParams::new(5.0, 0.5, 0.0).unwrap();
        let mesh = build_mesh(1.0, 1.0, 0.5).unwrap();
        let r = sweep(&params, &mesh, 10, 5, &RngSpec::new(0)).unwrap();
        assert!(r.grid().iter().all(|s| s.sharpe == 0.0));
        assert_eq!(r.grid().len(), 9);
    }

    #[test]
    fn sweep_matches_node_by_node_evaluation() {
        let params = OuParams::new(2.0, 0.8, 1.0).unwrap();
        let mesh = build_mesh(1.0, 1.0, 1.0).unwrap();
        let spec = RngSpec::new(77);
        let r = sweep(&params, &mesh, 200, 25, &spec).unwrap();
        for ordinal in 0..mesh.node_count() {
            let (pt, sl) = mesh.node_indices(ordinal);
            let rule = TradingRule::new(
                mesh.profit_taking_levels[pt],
                mesh.stop_loss_levels[sl],
                25,
            )
            .unwrap();
            let direct = evaluate_rule(&params, &rule, 200, &spec, ordinal as u64).unwrap();
            assert_eq!(*r.stats(pt, sl), direct);
        }
    }

    #[test]
    fn sweep_is_deterministic_across_pools() {
        let params = OuParams::new(1.0, 0.7, 1.0).unwrap();
        let mesh = build_mesh(1.0, 2.0, 1.0).unwrap();
        let spec = RngSpec::new(4);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sweep(&params, &mesh, 500, 20, &spec).unwrap());
        let several = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| sweep(&params, &mesh, 500, 20, &spec).unwrap());
        assert_eq!(single, several);
    }
}
