//! Monte Carlo harness for consistency, the cube-root rate and CI coverage.
//!
//! Each replication draws its sample from a seed derived from
//! `(seed, n, rep)` alone, and results are reduced in replication order, so
//! reports are bit-identical under any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::empirical::ValueSample;
use crate::error::{Error, Result};
use crate::estimator::{default_grid, Estimator};
use crate::inference::{confidence_interval_with, ChernoffApprox};

/// Largest tolerated fraction of failed replications per sample size.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;
pub const DEFAULT_SUP_POINTS: usize = 33;

fn default_sup_points() -> usize {
    DEFAULT_SUP_POINTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub spec: DistributionSpec,
    pub v: f64,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub level: f64,
    /// Working interval `[a, b]` of the estimator.
    pub interval: (f64, f64),
    /// Range of the sup-error grid; defaults to `interval`.
    #[serde(default)]
    pub sup_interval: Option<(f64, f64)>,
    #[serde(default = "default_sup_points")]
    pub sup_points: usize,
    #[serde(default)]
    pub approx: ChernoffApprox,
}

/// One replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub f_hat: f64,
    pub truth: f64,
    /// `f̂(v) − f(v)`.
    pub err: f64,
    pub sup_err: f64,
    pub c_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub covered: bool,
    pub kde: f64,
}

/// Summary for one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NStats {
    pub n: usize,
    pub reps_ok: usize,
    pub failed: usize,
    pub mean_abs_err: f64,
    pub median_abs_err: f64,
    pub mean_err: f64,
    pub sup_err_mean: f64,
    pub coverage: f64,
    pub kde_mean_abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub per_n: Vec<NStats>,
    /// Least-squares slope of `ln(mean_abs_err)` on `ln n`; absent for a
    /// single sample size.
    pub slope: Option<f64>,
    /// Absent unless at least three sample sizes were run.
    pub slope_stderr: Option<f64>,
    #[serde(skip)]
    pub records: Vec<RepRecord>,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_grid must be non-empty and strictly increasing".into());
        }
        if self.n_grid[0] < 10 {
            return bad("every n must be at least 10".into());
        }
        let (a, b) = self.interval;
        if !(a < b) {
            return Err(Error::InvalidInterval { a, b, reason: "a must be smaller than b" });
        }
        if !(self.v > a && self.v < b) {
            return bad(format!("v = {} must lie inside ({a}, {b})", self.v));
        }
        if !(self.level >= 0.5 && self.level < 1.0) {
            return bad(format!("level must lie in [0.5, 1), got {}", self.level));
        }
        let (lo, hi) = self.sup_range();
        if !(a <= lo && lo <= hi && hi <= b) || self.sup_points == 0 {
            return bad("sup_interval must lie inside the working interval".into());
        }
        Ok(())
    }

    pub fn sup_range(&self) -> (f64, f64) {
        self.sup_interval.unwrap_or(self.interval)
    }
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep` at sample size `n`.
pub fn rep_seed(seed: u64, n: usize, rep: usize) -> u64 {
    seed ^ mix64(mix64(n as u64).wrapping_add(rep as u64))
}

/// Gaussian-kernel density estimate with bandwidth `1.06·s_n·n^{-1/5}`.
pub fn kde_baseline(sample: &ValueSample, v: f64) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let sd = sample.std_dev();
    if !(sd > 0.0) {
        return Err(Error::Degenerate("zero sample variance"));
    }
    let h = 1.06 * sd * (n as f64).powf(-0.2);
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * h * n as f64);
    let mass: f64 = sample
        .values()
        .iter()
        .map(|&x| {
            let z = (v - x) / h;
            (-0.5 * z * z).exp()
        })
        .sum();
    Ok(norm * mass)
}

fn one_rep(cfg: &McConfig, sup_grid: &[f64], truth: f64, sup_truth: &[f64], n: usize, rep: usize) -> Result<RepRecord> {
    let seed = rep_seed(cfg.seed, n, rep);
    let sample = cfg.spec.sample(n, seed)?;
    let (a, b) = cfg.interval;
    let est = Estimator::fit(&sample, a, b)?;
    let sd = sample.std_dev();
    let ci = confidence_interval_with(&est, sd, cfg.v, cfg.level, &cfg.approx)?;
    let mut sup_err: f64 = 0.0;
    for (&x, &t) in sup_grid.iter().zip(sup_truth) {
        sup_err = sup_err.max((est.f_hat(x)? - t).abs());
    }
    Ok(RepRecord {
        n,
        rep,
        seed,
        f_hat: ci.f_hat,
        truth,
        err: ci.f_hat - truth,
        sup_err,
        c_hat: ci.c_hat,
        ci_lo: ci.ci_lo,
        ci_hi: ci.ci_hi,
        covered: ci.ci_lo <= truth && truth <= ci.ci_hi,
        kde: kde_baseline(&sample, cfg.v)?,
    })
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

fn summarize(n: usize, records: &[RepRecord], failed: usize) -> NStats {
    let k = records.len() as f64;
    let mut abs: Vec<f64> = records.iter().map(|r| r.err.abs()).collect();
    let mean_abs_err = abs.iter().sum::<f64>() / k;
    abs.sort_by(f64::total_cmp);
    NStats {
        n,
        reps_ok: records.len(),
        failed,
        mean_abs_err,
        median_abs_err: median(&abs),
        mean_err: records.iter().map(|r| r.err).sum::<f64>() / k,
        sup_err_mean: records.iter().map(|r| r.sup_err).sum::<f64>() / k,
        coverage: records.iter().filter(|r| r.covered).count() as f64 / k,
        kde_mean_abs_err: records.iter().map(|r| (r.kde - r.truth).abs()).sum::<f64>() / k,
    }
}

/// Ordinary least-squares slope of `y` on `x` and its standard error.
pub fn ols_slope(x: &[f64], y: &[f64]) -> (Option<f64>, Option<f64>) {
    let m = x.len();
    if m < 2 {
        return (None, None);
    }
    let mx = x.iter().sum::<f64>() / m as f64;
    let my = y.iter().sum::<f64>() / m as f64;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    if m < 3 {
        return (Some(slope), None);
    }
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - intercept - slope * xi).powi(2)).sum();
    (Some(slope), Some((sse / (m - 2) as f64 / sxx).sqrt()))
}

fn run(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let truth = cfg.spec.pdf(cfg.v)?;
    let (lo, hi) = cfg.sup_range();
    let sup_grid = default_grid(lo, hi, cfg.sup_points);
    let sup_truth = sup_grid.iter().map(|&x| cfg.spec.pdf(x)).collect::<Result<Vec<_>>>()?;

    let mut per_n = Vec::with_capacity(cfg.n_grid.len());
    let mut records = Vec::with_capacity(cfg.n_grid.len() * cfg.reps);
    for &n in &cfg.n_grid {
        let outcomes: Vec<Result<RepRecord>> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| one_rep(cfg, &sup_grid, truth, &sup_truth, n, rep))
            .collect();
        let total = outcomes.len();
        let ok: Vec<RepRecord> = outcomes.into_iter().filter_map(|r| r.ok()).collect();
        let failed = total - ok.len();
        if ok.is_empty() || failed as f64 > MAX_FAILURE_FRACTION * total as f64 {
            return Err(Error::Experiment { n, failed, total });
        }
        per_n.push(summarize(n, &ok, failed));
        records.extend(ok);
    }

    let x: Vec<f64> = per_n.iter().map(|s| (s.n as f64).ln()).collect();
    let y: Vec<f64> = per_n.iter().map(|s| s.mean_abs_err.ln()).collect();
    let (slope, slope_stderr) = ols_slope(&x, &y);
    Ok(McReport { per_n, slope, slope_stderr, records })
}

fn run_on(cfg: &McConfig, threads: Option<usize>) -> Result<McReport> {
    match threads {
        None => run(cfg),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            pool.install(|| run(cfg))
        }
    }
}

/// Error statistics and the log-log slope across `cfg.n_grid`.
pub fn run_rate_experiment(cfg: &McConfig) -> Result<McReport> {
    run_on(cfg, None)
}

/// Coverage of the confidence interval for `f(v)` at each `n`.
pub fn run_coverage_experiment(cfg: &McConfig) -> Result<McReport> {
    run_on(cfg, None)
}

/// [`run_rate_experiment`] on a dedicated pool of `threads` workers.
pub fn run_rate_experiment_with_threads(cfg: &McConfig, threads: usize) -> Result<McReport> {
    run_on(cfg, Some(threads))
}

/// [`run_coverage_experiment`] on a dedicated pool of `threads` workers.
pub fn run_coverage_experiment_with_threads(cfg: &McConfig, threads: usize) -> Result<McReport> {
    run_on(cfg, Some(threads))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_grid: Vec<usize>, reps: usize) -> McConfig {
        McConfig {
            spec: DistributionSpec::uniform(0.0, 1.0).unwrap(),
            v: 0.5,
            n_grid,
            reps,
            seed: 42,
            level: 0.95,
            interval: (0.05, 0.95),
            sup_interval: Some((0.1, 0.9)),
            sup_points: 33,
            approx: ChernoffApprox::default(),
        }
    }

    #[test]
    fn single_rep_single_n() {
        let r = run_rate_experiment(&cfg(vec![500], 1)).unwrap();
        assert_eq!(r.slope, None);
        assert_eq!(r.slope_stderr, None);
        assert!(r.per_n[0].coverage == 0.0 || r.per_n[0].coverage == 1.0);
    }

    #[test]
    fn two_sizes_have_slope_without_stderr() {
        let r = run_rate_experiment(&cfg(vec![200, 800], 20)).unwrap();
        assert!(r.slope.is_some());
        assert_eq!(r.slope_stderr, None);
        assert_eq!(r.per_n.len(), 2);
        assert_eq!(r.records.len(), 40);
    }

    #[test]
    fn nested_levels_nested_coverage() {
        let mut c = cfg(vec![2000], 200);
        c.level = 0.90;
        let low = run_coverage_experiment(&c).unwrap();
        c.level = 0.99;
        let high = run_coverage_experiment(&c).unwrap();
        assert!(high.per_n[0].coverage >= low.per_n[0].coverage);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let c = cfg(vec![300, 1200], 40);
        let one = run_rate_experiment_with_threads(&c, 1).unwrap();
        let four = run_rate_experiment_with_threads(&c, 4).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn invalid_configs() {
        assert!(run_rate_experiment(&cfg(vec![], 10)).is_err());
        assert!(run_rate_experiment(&cfg(vec![800, 200], 10)).is_err());
        assert!(run_rate_experiment(&cfg(vec![200], 0)).is_err());
        let mut c = cfg(vec![200], 10);
        c.v = 0.99;
        assert!(run_rate_experiment(&c).is_err());
    }

    #[test]
    fn too_many_failures_abort() {
        // GCM interval far inside the lower tail fails for most small samples
        let mut c = cfg(vec![10], 50);
        c.interval = (0.001, 0.999);
        c.sup_interval = None;
        assert!(matches!(run_rate_experiment(&c), Err(Error::Experiment { .. })));
    }

    #[test]
    fn rep_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for n in [500, 2000] {
            for rep in 0..1000 {
                assert!(seen.insert(rep_seed(7, n, rep)));
            }
        }
    }

    #[test]
    fn ols_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 1.0, -1.0, -3.0];
        let (s, se) = ols_slope(&x, &y);
        assert_eq!(s, Some(-2.0));
        assert!(se.unwrap() < 1e-12);
    }

    #[test]
    fn kde_examples() {
        let s = DistributionSpec::uniform(0.0, 1.0).unwrap().sample(10_000, 12).unwrap();
        assert!((kde_baseline(&s, 0.5).unwrap() - 1.0).abs() < 0.1);
        let same = ValueSample::new(vec![0.4; 10]).unwrap();
        assert!(matches!(kde_baseline(&same, 0.4), Err(Error::Degenerate(_))));
        let one = ValueSample::new(vec![0.4]).unwrap();
        assert!(kde_baseline(&one, 0.4).is_err());
    }

    #[test]
    fn kde_symmetric_and_order_invariant() {
        let raw = vec![0.3, 0.7, 0.45, 0.55, 0.1, 0.9];
        let mut rev = raw.clone();
        rev.reverse();
        let a = kde_baseline(&ValueSample::new(raw.clone()).unwrap(), 0.5).unwrap();
        let b = kde_baseline(&ValueSample::new(rev).unwrap(), 0.5).unwrap();
        assert_eq!(a, b);

        let s = ValueSample::new(raw).unwrap();
        let h = 1.06 * s.std_dev() * 6f64.powf(-0.2);
        let avg: f64 = s
            .values()
            .iter()
            .map(|x| (-0.5 * ((0.5 - x) / h).powi(2)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * h))
            .sum::<f64>()
            / 6.0;
        assert!((a - avg).abs() < 1e-14);
    }
}
