//! Discrete mean-reverting price dynamics and closed-form P&L moments.
//!
//! Prices follow the one-step recursion
//! `P_t = (1 - phi) * forecast + phi * P_{t-1} + sigma * eps_t`
//! with `eps_t` standard normal. `phi` sets how hard each step pulls the
//! price toward the forecast and `sigma` scales the noise. Reversion speed is
//! usually quoted as a half-life: the number of steps for the expected gap to
//! the forecast to halve, which pins `phi = 2^(-1/half_life)`.

use crate::error::{Error, Result};

/// Parameters of the discrete mean-reverting price process, together with the
/// trade they score: entry price `p0` and signed position size `m`.
///
/// `phi` may be any finite value. The recursion and the moment formulas are
/// well defined even at or beyond the random-walk limit `phi = 1`; functions
/// that do require stationarity, such as [`half_life_from_phi`], check it
/// themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuParams {
    pub forecast: f64,
    pub phi: f64,
    pub sigma: f64,
    pub p0: f64,
    pub m: f64,
}

impl OuParams {
    /// Builds parameters with the usual conventions `p0 = 0` and `m = 1`.
    /// Rejects non-finite values and negative noise scales.
    pub fn new(forecast: f64, phi: f64, sigma: f64) -> Result<Self> {
        if !forecast.is_finite() {
            return Err(Error::Validation {
                field: "forecast",
                message: format!("must be finite, got {forecast}"),
            });
        }
        if !phi.is_finite() {
            return Err(Error::Validation {
                field: "phi",
                message: format!("must be finite, got {phi}"),
            });
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::Validation {
                field: "sigma",
                message: format!("must be finite and non-negative, got {sigma}"),
            });
        }
        Ok(Self { forecast, phi, sigma, p0: 0.0, m: 1.0 })
    }

    /// Replaces the entry price.
    pub fn with_entry_price(mut self, p0: f64) -> Result<Self> {
        if !p0.is_finite() {
            return Err(Error::Validation {
                field: "p0",
                message: format!("must be finite, got {p0}"),
            });
        }
        self.p0 = p0;
        Ok(self)
    }

    /// Replaces the signed position size. Zero is rejected since it would
    /// make every trade's P&L identically zero.
    pub fn with_position_size(mut self, m: f64) -> Result<Self> {
        if !m.is_finite() || m == 0.0 {
            return Err(Error::Validation {
                field: "m",
                message: format!("must be finite and nonzero, got {m}"),
            });
        }
        self.m = m;
        Ok(self)
    }
}

/// Half-life of mean reversion, in steps. Strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HalfLife(f64);

impl HalfLife {
    pub fn new(steps: f64) -> Result<Self> {
        if !steps.is_finite() || steps <= 0.0 {
            return Err(Error::Domain(format!(
                "half-life must be positive and finite, got {steps}"
            )));
        }
        Ok(Self(steps))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Autoregressive weight for a given half-life: `phi = 2^(-1/tau)`.
/// Always lands in (0, 1).
pub fn phi_from_half_life(tau: HalfLife) -> f64 {
    (-1.0 / tau.get()).exp2()
}

/// Half-life implied by an autoregressive weight: `tau = -ln 2 / ln phi`.
/// Only weights strictly inside (0, 1) decay, so anything else is a domain
/// error.
pub fn half_life_from_phi(phi: f64) -> Result<HalfLife> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::Domain(format!(
            "no finite half-life for phi = {phi}; need 0 < phi < 1"
        )));
    }
    HalfLife::new(-std::f64::consts::LN_2 / phi.ln())
}

/// One step of the price recursion.
pub fn step(params: &OuParams, p_prev: f64, epsilon: f64) -> f64 {
    (1.0 - params.phi) * params.forecast + params.phi * p_prev + params.sigma * epsilon
}

/// Exact mean and variance of the P&L `m * (P_t - p0)` at a fixed horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnlMoments {
    pub mean: f64,
    pub variance: f64,
    pub horizon: u32,
}

impl PnlMoments {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Closed-form P&L moments at horizon `t >= 1`, from unrolling the recursion:
///
/// ```text
/// mean = m * (1 - phi^t) * (forecast - p0)
/// var  = m^2 * sigma^2 * (1 - phi^(2t)) / (1 - phi^2)    (phi^2 != 1)
///      = m^2 * sigma^2 * t                               (phi^2 == 1)
/// ```
///
/// Both are finite sums, so any finite `phi` is accepted, including the
/// random-walk limit.
pub fn pnl_moments(params: &OuParams, horizon: u32) -> Result<PnlMoments> {
    if horizon < 1 {
        return Err(Error::Domain("horizon must be at least 1 step".to_string()));
    }
    let t = horizon as i32;
    let unit_mean = (1.0 - params.phi.powi(t)) * (params.forecast - params.p0);
    let r = params.phi * params.phi;
    let weight_sum = if r == 1.0 {
        horizon as f64
    } else {
        (1.0 - r.powi(t)) / (1.0 - r)
    };
    let unit_variance = params.sigma * params.sigma * weight_sum;
    Ok(PnlMoments {
        mean: params.m * unit_mean,
        variance: (params.m * params.m) * unit_variance,
        horizon,
    })
}
