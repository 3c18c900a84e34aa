//! Reads observed price paths from CSV in the layout
//! `opportunity_id,t,price,forecast`.
//!
//! Rows belonging to one opportunity must be contiguous, with `t` counting
//! up from 0 and the forecast held constant. Every violation is reported
//! with its 1-based line number, since these files are usually exported from
//! elsewhere and the line number is what lets someone fix them.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::OpportunitySeries;

pub const PRICE_SERIES_HEADER: &str = "opportunity_id,t,price,forecast";

/// Reads and validates a price-series CSV file.
pub fn read_price_series(path: &Path) -> Result<Vec<OpportunitySeries>> {
    let file = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_price_series(BufReader::new(file), path)
}

/// Parses price-series CSV from any reader. `path` only labels I/O errors.
pub fn parse_price_series(reader: impl BufRead, path: &Path) -> Result<Vec<OpportunitySeries>> {
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, Ok(line))) => line,
        Some((_, Err(source))) => {
            return Err(Error::Io { path: path.to_path_buf(), source });
        }
        None => return Err(Error::Parse { line: 1, message: "empty file".to_string() }),
    };
    if header.trim_end_matches('\r') != PRICE_SERIES_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header '{PRICE_SERIES_HEADER}', got '{header}'"),
        });
    }

    let mut out: Vec<OpportunitySeries> = Vec::new();
    let mut finished_ids: HashSet<String> = HashSet::new();
    let mut current: Option<Group> = None;
    let mut last_line = 1;

    for (index, line) in lines {
        let line_no = index + 1;
        last_line = line_no;
        let line = line.map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let row = parse_row(line.trim_end_matches('\r'), line_no)?;

        match current.as_mut() {
            Some(group) if group.id == row.id => {
                let expected_t = group.prices.len() as u64;
                if row.t != expected_t {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!(
                            "opportunity '{}' expects t = {expected_t} here, got {}",
                            row.id, row.t
                        ),
                    });
                }
                if row.forecast != group.forecast {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!(
                            "forecast changed within opportunity '{}': {} then {}",
                            row.id, group.forecast, row.forecast
                        ),
                    });
                }
                group.prices.push(row.price);
            }
            _ => {
                if let Some(group) = current.take() {
                    finished_ids.insert(group.id.clone());
                    out.push(group.finish()?);
                }
                if finished_ids.contains(&row.id) {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!(
                            "opportunity '{}' reappears after other rows; groups must be contiguous",
                            row.id
                        ),
                    });
                }
                if row.t != 0 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!(
                            "opportunity '{}' must start at t = 0, got t = {}",
                            row.id, row.t
                        ),
                    });
                }
                current = Some(Group {
                    id: row.id,
                    forecast: row.forecast,
                    prices: vec![row.price],
                    start_line: line_no,
                });
            }
        }
    }

    if let Some(group) = current.take() {
        out.push(group.finish()?);
    }
    if out.is_empty() {
        return Err(Error::Parse { line: last_line, message: "no data rows".to_string() });
    }
    Ok(out)
}

struct Group {
    id: String,
    forecast: f64,
    prices: Vec<f64>,
    start_line: usize,
}

impl Group {
    fn finish(self) -> Result<OpportunitySeries> {
        if self.prices.len() < 2 {
            return Err(Error::Parse {
                line: self.start_line,
                message: format!(
                    "opportunity '{}' has only {} price; at least 2 are needed",
                    self.id,
                    self.prices.len()
                ),
            });
        }
        OpportunitySeries::new(self.prices, self.forecast)
    }
}

struct Row {
    id: String,
    t: u64,
    price: f64,
    forecast: f64,
}

fn parse_row(line: &str, line_no: usize) -> Result<Row> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 4 {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected 4 comma-separated fields, got {}", fields.len()),
        });
    }
    let id = fields[0].trim();
    if id.is_empty() {
        return Err(Error::Parse {
            line: line_no,
            message: "opportunity_id must not be empty".to_string(),
        });
    }
    let t: u64 = fields[1].trim().parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("t must be a non-negative integer, got '{}'", fields[1]),
    })?;
    let price = parse_finite(fields[2], "price", line_no)?;
    let forecast = parse_finite(fields[3], "forecast", line_no)?;
    Ok(Row { id: id.to_string(), t, price, forecast })
}

fn parse_finite(field: &str, name: &str, line_no: usize) -> Result<f64> {
    let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("{name} must be a number, got '{field}'"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line: line_no,
            message: format!("{name} must be finite, got '{field}'"),
        });
    }
    Ok(value)
}
