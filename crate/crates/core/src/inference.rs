//! Pointwise confidence intervals for `f(v)` from the cube-root limit law
//! `n^{1/3}(f̂_n(v) − f(v)) → C(v)·Z`, `Z` Chernoff-distributed.
//!
//! Chernoff quantiles come from a normal approximation `N(0, 0.52²)` unless
//! the caller supplies a table.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::empirical::ValueSample;
use crate::error::{Error, Result};
use crate::estimator::Estimator;

/// Standard deviation of the normal approximation to Chernoff's distribution.
pub const CHERNOFF_NORMAL_SD: f64 = 0.52;
/// Approximate variance of Chernoff's distribution.
pub const CHERNOFF_VARIANCE: f64 = 0.26;
/// Bandwidth exponent of the derivative estimator, `h ∝ n^{-1/7}`.
pub const DERIVATIVE_RATE: f64 = 1.0 / 7.0;
pub const MIN_DERIVATIVE_WINDOW: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantilePoint {
    pub p: f64,
    pub q: f64,
}

/// Source of Chernoff quantiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernoffApprox {
    sd: f64,
    table: Option<Vec<QuantilePoint>>,
}

impl Default for ChernoffApprox {
    fn default() -> Self {
        Self { sd: CHERNOFF_NORMAL_SD, table: None }
    }
}

impl ChernoffApprox {
    pub fn normal(sd: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::InvalidParameter(format!("sd must be positive, got {sd}")));
        }
        Ok(Self { sd, table: None })
    }

    /// Quantile table, strictly increasing in both `p` and `q`, `p ∈ (0, 1)`.
    pub fn with_table(table: Vec<QuantilePoint>) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::InvalidParameter("quantile table needs at least two rows".into()));
        }
        if table.iter().any(|r| !(r.p > 0.0 && r.p < 1.0) || !r.q.is_finite()) {
            return Err(Error::InvalidParameter("quantile table p must lie in (0, 1)".into()));
        }
        if table.windows(2).any(|w| !(w[0].p < w[1].p && w[0].q < w[1].q)) {
            return Err(Error::InvalidParameter(
                "quantile table must be strictly increasing in p and q".into(),
            ));
        }
        Ok(Self { sd: CHERNOFF_NORMAL_SD, table: Some(table) })
    }

    /// Parses `[{"p": .., "q": ..}, ...]`.
    pub fn from_table_json(json: &str) -> Result<Self> {
        let rows: Vec<QuantilePoint> = serde_json::from_str(json)
            .map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        Self::with_table(rows)
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn table(&self) -> Option<&[QuantilePoint]> {
        self.table.as_deref()
    }
}

/// `p`-quantile of Chernoff's distribution under `approx`.
pub fn chernoff_quantile(approx: &ChernoffApprox, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("probability must lie in (0, 1), got {p}")));
    }
    if let Some(table) = approx.table() {
        let first = table[0];
        let last = table[table.len() - 1];
        if p < first.p || p > last.p {
            return Err(Error::InvalidParameter(format!(
                "p = {p} outside quantile table range [{}, {}]",
                first.p, last.p
            )));
        }
        let j = table.partition_point(|r| r.p < p);
        if table[j].p == p {
            return Ok(table[j].q);
        }
        let (lo, hi) = (table[j - 1], table[j]);
        return Ok(lo.q + (hi.q - lo.q) * (p - lo.p) / (hi.p - lo.p));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    let upper = p.max(1.0 - p);
    let z = approx.sd * std.inverse_cdf(upper);
    Ok(if p < 0.5 { -z } else { z })
}

/// `C = (8f³/(1 − F) + 4f·f′)^{1/3}`.
pub fn chernoff_scale(f: f64, f_prime: f64, cdf: f64) -> Result<f64> {
    if !(cdf < 1.0) {
        return Err(Error::InvalidParameter(format!("F must be below 1, got {cdf}")));
    }
    if !(f > 0.0) {
        return Err(Error::InvalidParameter(format!("density must be positive, got {f}")));
    }
    let bracket = 8.0 * f.powi(3) / (1.0 - cdf) + 4.0 * f * f_prime;
    if bracket < 0.0 {
        return Err(Error::RegularityViolated(bracket));
    }
    Ok(bracket.cbrt())
}

/// Confidence interval for `f(v)` with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub v: f64,
    pub f_hat: f64,
    pub c_hat: f64,
    pub f_prime_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub level: f64,
    pub n: usize,
    /// Chernoff quantile at `(1 + level)/2`.
    pub quantile: f64,
    #[serde(rename = "F_n")]
    pub f_n: f64,
    /// The estimated scale bracket was negative; `f′` was dropped from `Ĉ`.
    pub fallback: bool,
}

fn derivative_window(est: &Estimator, sample_sd: f64, v: f64) -> Result<f64> {
    let n = est.n();
    if n < 10 {
        return Err(Error::InsufficientData { needed: 10, got: n });
    }
    let (a, b) = est.interval();
    if !(v > a && v < b) {
        return Err(Error::Domain { value: v, lo: a, hi: b });
    }
    let h = (sample_sd * (n as f64).powf(-DERIVATIVE_RATE)).min(v - a).min(b - v);
    if !(h >= MIN_DERIVATIVE_WINDOW) {
        return Err(Error::WindowCollapsed { v, h });
    }
    Ok(h)
}

/// Symmetric difference quotient of `f̂_n` with `h = s_n·n^{-1/7}` clipped
/// to the working interval.
pub fn estimate_f_prime_with(est: &Estimator, sample_sd: f64, v: f64) -> Result<f64> {
    let h = derivative_window(est, sample_sd, v)?;
    let up = est.f_hat(v + h)?;
    let down = est.f_hat(v - h)?;
    if up == down {
        return Ok(0.0);
    }
    Ok((up - down) / (2.0 * h))
}

pub fn estimate_f_prime(sample: &ValueSample, v: f64, a: f64, b: f64) -> Result<f64> {
    let est = Estimator::fit(sample, a, b)?;
    estimate_f_prime_with(&est, sample.std_dev(), v)
}

/// Interval `f̂ ± n^{-1/3}·Ĉ·q_{(1+level)/2}` from a fitted estimator.
pub fn confidence_interval_with(
    est: &Estimator,
    sample_sd: f64,
    v: f64,
    level: f64,
    approx: &ChernoffApprox,
) -> Result<InferenceResult> {
    if !(0.5..1.0).contains(&level) {
        return Err(Error::InvalidParameter(format!("level must lie in [0.5, 1), got {level}")));
    }
    let (f_hat, _, f_n) = est.point(v)?;
    let f_prime_hat = estimate_f_prime_with(est, sample_sd, v)?;
    let (c_hat, fallback) = match chernoff_scale(f_hat, f_prime_hat, f_n) {
        Ok(c) => (c, false),
        Err(Error::RegularityViolated(_)) => (chernoff_scale(f_hat, 0.0, f_n)?, true),
        Err(e) => return Err(e),
    };
    let quantile = chernoff_quantile(approx, 0.5 * (1.0 + level))?;
    let n = est.n();
    let half = c_hat * quantile * (n as f64).cbrt().recip();
    Ok(InferenceResult {
        v,
        f_hat,
        c_hat,
        f_prime_hat,
        ci_lo: f_hat - half,
        ci_hi: f_hat + half,
        level,
        n,
        quantile,
        f_n,
        fallback,
    })
}

pub fn confidence_interval(
    sample: &ValueSample,
    v: f64,
    level: f64,
    approx: &ChernoffApprox,
    a: f64,
    b: f64,
) -> Result<InferenceResult> {
    let est = Estimator::fit(sample, a, b)?;
    confidence_interval_with(&est, sample.std_dev(), v, level, approx)
}
