//! Writers for sweep output files, plus a loader for the matrix layout.
//!
//! Three views of the same grid get written per run: a long-form CSV with one
//! row per node, a matrix CSV with profit-taking down the side and stop-loss
//! across the top, and a plain-text graymap so the Sharpe surface can be
//! eyeballed in any image viewer. All floats pass through [`fmt_csv`], so a
//! rerun with the same seed reproduces every file byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::format::fmt_csv;
use crate::sweep::SweepResult;

pub const NODE_CSV_HEADER: &str = "pt,sl,mean,std,sharpe,n_pt_exits,n_sl_exits,n_horizon_exits";

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// One row per node, in the same row-major order the sweep evaluates.
pub fn write_node_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let mut text = String::from(NODE_CSV_HEADER);
    text.push('\n');
    for (pt_index, pt) in result.mesh.profit_taking_levels.iter().enumerate() {
        for (sl_index, sl) in result.mesh.stop_loss_levels.iter().enumerate() {
            let s = result.stats(pt_index, sl_index);
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt_csv(*pt),
                fmt_csv(*sl),
                fmt_csv(s.mean),
                fmt_csv(s.std),
                fmt_csv(s.sharpe),
                s.exit_counts.profit_taking,
                s.exit_counts.stop_loss,
                s.exit_counts.max_horizon,
            ));
        }
    }
    write_file(path, &text)
}

/// Sharpe ratios as a matrix: first row the stop-loss levels, first column
/// the profit-taking levels, corner cell empty.
pub fn write_matrix_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let mut text = String::new();
    for sl in &result.mesh.stop_loss_levels {
        text.push(',');
        text.push_str(&fmt_csv(*sl));
    }
    text.push('\n');
    for (pt_index, pt) in result.mesh.profit_taking_levels.iter().enumerate() {
        text.push_str(&fmt_csv(*pt));
        for sl_index in 0..result.mesh.stop_loss_levels.len() {
            text.push(',');
            text.push_str(&fmt_csv(result.stats(pt_index, sl_index).sharpe));
        }
        text.push('\n');
    }
    write_file(path, &text)
}

/// Plain-text graymap (P2) of the Sharpe surface, one pixel per node. Row `i`
/// is profit-taking level `i`, column `j` stop-loss level `j`. Values map
/// linearly from the grid's Sharpe range onto 0..=255; a flat surface maps to
/// all zeros. The range itself is recorded in the run manifest.
pub fn write_heatmap_pgm(path: &Path, result: &SweepResult) -> Result<()> {
    let (min, max) = result.sharpe_range();
    let span = max - min;
    let width = result.mesh.stop_loss_levels.len();
    let height = result.mesh.profit_taking_levels.len();
    let mut text = format!("P2\n{width} {height}\n255\n");
    for pt_index in 0..height {
        for sl_index in 0..width {
            if sl_index > 0 {
                text.push(' ');
            }
            let sharpe = result.stats(pt_index, sl_index).sharpe;
            let gray = if span > 0.0 {
                ((sharpe - min) / span * 255.0).round().clamp(0.0, 255.0) as u32
            } else {
                0
            };
            text.push_str(&gray.to_string());
        }
        text.push('\n');
    }
    write_file(path, &text)
}

/// A matrix CSV read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCsv {
    pub profit_taking_levels: Vec<f64>,
    pub stop_loss_levels: Vec<f64>,
    /// Row-major, profit-taking outer.
    pub sharpe: Vec<f64>,
}

impl MatrixCsv {
    pub fn sharpe_at(&self, pt_index: usize, sl_index: usize) -> f64 {
        self.sharpe[pt_index * self.stop_loss_levels.len() + sl_index]
    }
}

/// Loads a file written by [`write_matrix_csv`].
pub fn load_matrix_csv(path: &Path) -> Result<MatrixCsv> {
    let text =
        fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, message: "empty matrix file".to_string() })?;
    let mut header_fields = header.split(',');
    if header_fields.next() != Some("") {
        return Err(Error::Parse {
            line: 1,
            message: "matrix header must start with an empty corner cell".to_string(),
        });
    }
    let stop_loss_levels = parse_fields(header_fields, 1)?;
    if stop_loss_levels.is_empty() {
        return Err(Error::Parse { line: 1, message: "no stop-loss levels".to_string() });
    }

    let mut profit_taking_levels = Vec::new();
    let mut sharpe = Vec::new();
    for (index, line) in lines {
        let line_no = index + 1;
        let mut fields = line.split(',');
        let pt = fields
            .next()
            .filter(|f| !f.is_empty())
            .ok_or_else(|| Error::Parse {
                line: line_no,
                message: "missing profit-taking level".to_string(),
            })?
            .parse::<f64>()
            .map_err(|_| Error::Parse {
                line: line_no,
                message: "profit-taking level must be a number".to_string(),
            })?;
        profit_taking_levels.push(pt);
        let row = parse_fields(fields, line_no)?;
        if row.len() != stop_loss_levels.len() {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "expected {} sharpe values, got {}",
                    stop_loss_levels.len(),
                    row.len()
                ),
            });
        }
        sharpe.extend(row);
    }
    if profit_taking_levels.is_empty() {
        return Err(Error::Parse { line: 1, message: "no matrix rows".to_string() });
    }
    Ok(MatrixCsv { profit_taking_levels, stop_loss_levels, sharpe })
}

fn parse_fields<'a>(fields: impl Iterator<Item = &'a str>, line_no: usize) -> Result<Vec<f64>> {
    fields
        .map(|f| {
            f.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("expected a number, got '{f}'"),
            })
        })
        .collect()
}

/// File names used inside a run's output directory.
pub const NODE_CSV_FILE: &str = "nodes.csv";
pub const MATRIX_CSV_FILE: &str = "matrix.csv";
pub const HEATMAP_FILE: &str = "heatmap.pgm";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SUMMARY_CSV_FILE: &str = "summary.csv";

/// Joins a run directory with one of the standard file names.
pub fn run_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ou::OuParams;
    use crate::simulator::{ExitCounts, RuleStats};
    use crate::sweep::{Mesh, SweepResult};

    fn tiny_result() -> SweepResult {
        let mesh = Mesh::new(vec![0.0, 0.5], vec![0.0, 0.5, 1.0]).unwrap();
        let grid: Vec<RuleStats> = (0..6)
            .map(|i| RuleStats {
                mean: i as f64 / 4.0,
                std: 1.0,
                sharpe: i as f64 / 4.0,
                n_paths: 7,
                exit_counts: ExitCounts { profit_taking: 3, stop_loss: 2, max_horizon: 2 },
            })
            .collect();
        let params = OuParams::new(1.0, 0.5, 1.0).unwrap();
        SweepResult::from_grid(mesh, params, 7, 9, 1, grid).unwrap()
    }

    #[test]
    fn node_csv_layout_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nodes.csv");
        write_node_csv(&path, &tiny_result()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let expected = "\
pt,sl,mean,std,sharpe,n_pt_exits,n_sl_exits,n_horizon_exits
0,0,0,1,0,3,2,2
0,0.5,0.25,1,0.25,3,2,2
0,1,0.5,1,0.5,3,2,2
0.5,0,0.75,1,0.75,3,2,2
0.5,0.5,1,1,1,3,2,2
0.5,1,1.25,1,1.25,3,2,2
";
        assert_eq!(text, expected);
    }

    #[test]
    fn matrix_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("matrix.csv");
        let result = tiny_result();
        write_matrix_csv(&path, &result).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(",0,0.5,1\n0,0,0.25,0.5\n"));

        let loaded = load_matrix_csv(&path).unwrap();
        assert_eq!(loaded.profit_taking_levels, vec![0.0, 0.5]);
        assert_eq!(loaded.stop_loss_levels, vec![0.0, 0.5, 1.0]);
        for pt in 0..2 {
            for sl in 0..3 {
                assert_eq!(loaded.sharpe_at(pt, sl), result.stats(pt, sl).sharpe);
            }
        }
    }

    #[test]
    fn heatmap_is_a_valid_text_graymap() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("heatmap.pgm");
        write_heatmap_pgm(&path, &tiny_result()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let expected = "P2\n3 2\n255\n0 51 102\n153 204 255\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn flat_surface_maps_to_black() {
        let mesh = Mesh::new(vec![0.0, 0.5], vec![0.0]).unwrap();
        let stats = RuleStats {
            mean: 1.0,
            std: 1.0,
            sharpe: 1.0,
            n_paths: 2,
            exit_counts: ExitCounts::default(),
        };
        let params = OuParams::new(1.0, 0.5, 1.0).unwrap();
        let result =
            SweepResult::from_grid(mesh, params, 2, 1, 0, vec![stats, stats]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("flat.pgm");
        write_heatmap_pgm(&path, &result).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "P2\n1 2\n255\n0\n0\n");
    }

    #[test]
    fn malformed_matrix_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "0,1\n2,3\n").unwrap();
        assert!(matches!(load_matrix_csv(&path), Err(Error::Parse { line: 1, .. })));
        std::fs::write(&path, ",0,1\n0,0.5\n").unwrap();
        assert!(matches!(load_matrix_csv(&path), Err(Error::Parse { line: 2, .. })));
    }
}
