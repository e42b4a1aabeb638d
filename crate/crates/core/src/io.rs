//! Plain-text serializations shared by the CLI: CSV tables with every number
//! printed to 17 significant digits so that files round-trip exactly.

use std::fmt::Write as _;

use crate::empirical::ValueSample;
use crate::estimator::DensityEstimate;
use crate::montecarlo::McReport;

pub const DENSITY_CSV_HEADER: &str = "v,f_hat,lambda_hat,F_n";
pub const SAMPLE_CSV_HEADER: &str = "value";
pub const RATE_CSV_HEADER: &str =
    "n,reps_ok,failed,mean_abs_err,median_abs_err,mean_err,sup_err_mean,coverage,kde_mean_abs_err";
pub const REPS_CSV_HEADER: &str = "n,rep,seed,f_hat,truth,err,sup_err,c_hat,ci_lo,ci_hi,covered,kde";

/// `x` with 17 significant digits in scientific notation.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn density_csv(est: &DensityEstimate) -> String {
    let mut out = String::with_capacity(80 * (est.grid.len() + 1));
    out.push_str(DENSITY_CSV_HEADER);
    out.push('\n');
    for i in 0..est.grid.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            sig17(est.grid[i]),
            sig17(est.f_hat[i]),
            sig17(est.lambda_hat[i]),
            sig17(est.f_n_vals[i])
        );
    }
    out
}

/// Values in generation order, one per line under a `value` header.
pub fn values_csv(values: &[f64]) -> String {
    let mut out = String::with_capacity(25 * (values.len() + 1));
    out.push_str(SAMPLE_CSV_HEADER);
    out.push('\n');
    for &v in values {
        out.push_str(&sig17(v));
        out.push('\n');
    }
    out
}

pub fn sample_csv(sample: &ValueSample) -> String {
    values_csv(sample.values())
}

/// Per-`n` summary, suitable for log-log plotting.
pub fn rate_csv(report: &McReport) -> String {
    let mut out = String::from(RATE_CSV_HEADER);
    out.push('\n');
    for s in &report.per_n {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.n,
            s.reps_ok,
            s.failed,
            sig17(s.mean_abs_err),
            sig17(s.median_abs_err),
            sig17(s.mean_err),
            sig17(s.sup_err_mean),
            sig17(s.coverage),
            sig17(s.kde_mean_abs_err)
        );
    }
    out
}

/// One line per successful replication.
pub fn reps_csv(report: &McReport) -> String {
    let mut out = String::from(REPS_CSV_HEADER);
    out.push('\n');
    for r in &report.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.rep,
            r.seed,
            sig17(r.f_hat),
            sig17(r.truth),
            sig17(r.err),
            sig17(r.sup_err),
            sig17(r.c_hat),
            sig17(r.ci_lo),
            sig17(r.ci_hi),
            r.covered,
            sig17(r.kde)
        );
    }
    out
}
