//! The density estimator `f̂_n(v) = λ̂_n(v)(1 − F_n(v))²`.

use serde::{Deserialize, Serialize};

use crate::empirical::{ecdf, lambda_n, StepFunction, ValueSample};
use crate::error::{Error, Result};
use crate::gcm::{gcm_of_step, ConvexMinorant};

pub const DEFAULT_GRID_POINTS: usize = 257;
/// Empirical quantile levels used for the working interval when none is given.
pub const DEFAULT_INTERVAL_QUANTILES: (f64, f64) = (0.05, 0.95);

/// Estimator output on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub f_hat: Vec<f64>,
    pub lambda_hat: Vec<f64>,
    #[serde(rename = "F_n")]
    pub f_n_vals: Vec<f64>,
    pub interval: (f64, f64),
    pub n: usize,
}

/// A fitted estimator: `F_n`, `Λ_n` and the minorant on `[a, b]`.
#[derive(Debug, Clone)]
pub struct Estimator {
    n: usize,
    f_n: StepFunction,
    lambda: StepFunction,
    minorant: ConvexMinorant,
}

/// `(a, b)` at the 5% and 95% empirical quantiles.
pub fn default_interval(sample: &ValueSample) -> (f64, f64) {
    let (lo, hi) = DEFAULT_INTERVAL_QUANTILES;
    (sample.quantile(lo), sample.quantile(hi))
}

/// `points` equispaced values covering `[a, b]` inclusive.
pub fn default_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => {
            let step = (b - a) / (points - 1) as f64;
            (0..points)
                .map(|i| if i + 1 == points { b } else { a + step * i as f64 })
                .collect()
        }
    }
}

impl Estimator {
    pub fn fit(sample: &ValueSample, a: f64, b: f64) -> Result<Self> {
        let n = sample.len();
        if n < 3 {
            return Err(Error::InsufficientData { needed: 3, got: n });
        }
        if sample.min() == sample.max() {
            return Err(Error::Degenerate("all observations are identical"));
        }
        if !(a < b) {
            return Err(Error::InvalidInterval { a, b, reason: "a must be smaller than b" });
        }
        if a < sample.min() || b > sample.max() {
            return Err(Error::InvalidInterval { a, b, reason: "interval outside data range" });
        }
        let lambda = lambda_n(sample);
        let minorant = gcm_of_step(&lambda, a, b)?;
        Ok(Self { n, f_n: ecdf(sample), lambda, minorant })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn interval(&self) -> (f64, f64) {
        self.minorant.interval()
    }

    pub fn minorant(&self) -> &ConvexMinorant {
        &self.minorant
    }

    pub fn lambda_n(&self) -> &StepFunction {
        &self.lambda
    }

    pub fn ecdf(&self) -> &StepFunction {
        &self.f_n
    }

    /// `(f̂_n(v), λ̂_n(v), F_n(v))`.
    pub fn point(&self, v: f64) -> Result<(f64, f64, f64)> {
        let lambda_hat = self.minorant.left_derivative(v)?;
        let f = self.f_n.eval(v);
        let s = 1.0 - f;
        Ok((lambda_hat * (s * s), lambda_hat, f))
    }

    pub fn f_hat(&self, v: f64) -> Result<f64> {
        self.point(v).map(|p| p.0)
    }

    pub fn evaluate(&self, grid: &[f64]) -> Result<DensityEstimate> {
        let mut out = DensityEstimate {
            grid: grid.to_vec(),
            f_hat: Vec::with_capacity(grid.len()),
            lambda_hat: Vec::with_capacity(grid.len()),
            f_n_vals: Vec::with_capacity(grid.len()),
            interval: self.interval(),
            n: self.n,
        };
        for &v in grid {
            let (f_hat, lambda_hat, f) = self.point(v)?;
            out.f_hat.push(f_hat);
            out.lambda_hat.push(lambda_hat);
            out.f_n_vals.push(f);
        }
        Ok(out)
    }
}

/// Runs the full pipeline and evaluates on `grid`.
pub fn estimate_density(sample: &ValueSample, a: f64, b: f64, grid: &[f64]) -> Result<DensityEstimate> {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted != grid {
        return Err(Error::InvalidParameter("grid must be sorted ascending".into()));
    }
    Estimator::fit(sample, a, b)?.evaluate(grid)
}

pub fn estimate_at(sample: &ValueSample, v: f64, a: f64, b: f64) -> Result<f64> {
    Estimator::fit(sample, a, b)?.f_hat(v)
}
