//! Least-squares fit of the price recursion to observed opportunities.
//!
//! Every opportunity contributes its consecutive price pairs to one stacked
//! regression. `x` holds the lagged gap to the forecast, `y` the next price
//! and `z` the forecast itself, so the recursion reads `y = z + phi * x + xi`.
//! The autoregressive weight is `cov[y, x] / cov[x, x]` and the noise scale
//! is the spread of the residuals `y - z - phi_hat * x`.

use crate::error::{Error, Result};
use crate::ou::{half_life_from_phi, HalfLife};

/// One observed trading opportunity: at least two consecutive prices and the
/// forecast that was live while they printed.
#[derive(Debug, Clone, PartialEq)]
pub struct OpportunitySeries {
    prices: Vec<f64>,
    forecast: f64,
}

impl OpportunitySeries {
    pub fn new(prices: Vec<f64>, forecast: f64) -> Result<Self> {
        if prices.len() < 2 {
            return Err(Error::Validation {
                field: "prices",
                message: format!("an opportunity needs at least 2 prices, got {}", prices.len()),
            });
        }
        if let Some(bad) = prices.iter().find(|p| !p.is_finite()) {
            return Err(Error::Validation {
                field: "prices",
                message: format!("prices must be finite, got {bad}"),
            });
        }
        if !forecast.is_finite() {
            return Err(Error::Validation {
                field: "forecast",
                message: format!("must be finite, got {forecast}"),
            });
        }
        Ok(Self { prices, forecast })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn forecast(&self) -> f64 {
        self.forecast
    }

    /// Number of price transitions this opportunity contributes.
    pub fn transitions(&self) -> usize {
        self.prices.len() - 1
    }
}

/// Stacked regression vectors of equal length. Row `k` pairs a lagged gap
/// `x[k]` with the price `y[k]` that followed it under forecast `z[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionVectors {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

impl RegressionVectors {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() != z.len() {
            return Err(Error::Validation {
                field: "vectors",
                message: format!(
                    "x, y and z must have equal lengths, got {}, {} and {}",
                    x.len(),
                    y.len(),
                    z.len()
                ),
            });
        }
        if x.len() < 2 {
            return Err(Error::InsufficientData { needed: 2, got: x.len() });
        }
        for v in x.iter().chain(&y).chain(&z) {
            if !v.is_finite() {
                return Err(Error::Validation {
                    field: "vectors",
                    message: format!("entries must be finite, got {v}"),
                });
            }
        }
        Ok(Self { x, y, z })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Fitted recursion parameters. `phi_hat` is reported raw, even when it falls
/// outside (0, 1); callers decide what a non-reverting fit means for them.
#[derive(Debug, Clone, PartialEq)]
pub struct OuEstimate {
    pub phi_hat: f64,
    pub sigma_hat: f64,
    pub residuals: Vec<f64>,
    pub n_obs: usize,
}

impl OuEstimate {
    /// True when the fitted weight implies actual decay toward the forecast.
    pub fn is_mean_reverting(&self) -> bool {
        self.phi_hat > 0.0 && self.phi_hat < 1.0
    }

    /// Half-life implied by `phi_hat`, when one exists.
    pub fn implied_half_life(&self) -> Option<HalfLife> {
        half_life_from_phi(self.phi_hat).ok()
    }
}

/// Stacks opportunities into regression vectors. Each opportunity with `T+1`
/// prices contributes `T` rows.
pub fn build_design(opportunities: &[OpportunitySeries]) -> Result<RegressionVectors> {
    if opportunities.is_empty() {
        return Err(Error::Validation {
            field: "opportunities",
            message: "at least one opportunity is required".to_string(),
        });
    }
    let total: usize = opportunities.iter().map(|o| o.transitions()).sum();
    let mut x = Vec::with_capacity(total);
    let mut y = Vec::with_capacity(total);
    let mut z = Vec::with_capacity(total);
    for opp in opportunities {
        let prices = opp.prices();
        for t in 1..prices.len() {
            x.push(prices[t - 1] - opp.forecast());
            y.push(prices[t]);
            z.push(opp.forecast());
        }
    }
    RegressionVectors::new(x, y, z)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample covariance with the n-1 divisor.
fn sample_cov(a: &[f64], b: &[f64]) -> f64 {
    let ma = mean(a);
    let mb = mean(b);
    let n = a.len() as f64;
    a.iter().zip(b).map(|(ai, bi)| (ai - ma) * (bi - mb)).sum::<f64>() / (n - 1.0)
}

/// Fits the recursion by least squares over at least 3 rows.
pub fn estimate(design: &RegressionVectors) -> Result<OuEstimate> {
    let n = design.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let var_x = sample_cov(design.x(), design.x());
    if var_x == 0.0 {
        return Err(Error::DegenerateDesign);
    }
    let phi_hat = sample_cov(design.y(), design.x()) / var_x;
    let residuals: Vec<f64> = design
        .x()
        .iter()
        .zip(design.y())
        .zip(design.z())
        .map(|((x, y), z)| y - z - phi_hat * x)
        .collect();
    let sigma_hat = sample_cov(&residuals, &residuals).sqrt();
    Ok(OuEstimate { phi_hat, sigma_hat, residuals, n_obs: n })
}
