//! Greatest convex minorant of a nondecreasing step function on `[a, b]`.
//!
//! A convex function lies below a right-continuous step function that is
//! constant on `[x, x′)` iff it lies below the closure corners of each step.
//! For a nondecreasing step function the binding corners are `(a, Λ(a))`,
//! the pre-jump values `(x, Λ(x⁻))` at every jump inside `(a, b)`, and
//! `(b, Λ(b⁻))`. The minorant is the lower convex hull of those points.

use serde::{Deserialize, Serialize};

use crate::empirical::StepFunction;
use crate::error::{Error, Result};

/// Adjacent segments whose slopes differ by less than this are merged.
pub const SLOPE_MERGE_TOL: f64 = 1e-12;
/// Tolerance used by [`switching_check`] to detect ties.
pub const TIE_TOL: f64 = 1e-12;

/// Piecewise-linear convex function on `interval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexMinorant {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    interval: (f64, f64),
}

/// Outcome of [`switching_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Switching {
    Holds,
    Violated,
    /// `c` equals a hull slope, or minimizers tie across `v`.
    Indeterminate,
}

fn cross(o: (f64, f64), p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - o.0) * (q.1 - o.1) - (p.1 - o.1) * (q.0 - o.0)
}

fn validate_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInterval { a, b, reason: "endpoints must be finite" });
    }
    if a >= b {
        return Err(Error::InvalidInterval { a, b, reason: "a must be smaller than b" });
    }
    Ok(())
}

/// Corner points that bind a convex minorant of `lam` on `[a, b]`.
pub fn constraint_points(lam: &StepFunction, a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    validate_interval(a, b)?;
    let knots = lam.knots();
    match (knots.first(), knots.last()) {
        (Some(&lo), Some(&hi)) if lo <= a && b <= hi => {}
        _ => {
            return Err(Error::InvalidInterval { a, b, reason: "interval outside data range" });
        }
    }
    let start = knots.partition_point(|&k| k <= a);
    let end = knots.partition_point(|&k| k < b);
    let mut points = Vec::with_capacity(end.saturating_sub(start) + 2);
    points.push((a, lam.eval(a)));
    points.extend(knots[start..end].iter().map(|&x| (x, lam.left_limit(x))));
    points.push((b, lam.left_limit(b)));
    Ok(points)
}

impl ConvexMinorant {
    /// Lower convex hull of points with strictly increasing abscissae, by a
    /// single monotone-chain pass.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter("need at least two constraint points".into()));
        }
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::InvalidParameter(
                "constraint abscissae must be strictly increasing".into(),
            ));
        }
        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
        for &p in points {
            while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }

        let mut knots = vec![hull[0].0];
        let mut values = vec![hull[0].1];
        let mut slopes: Vec<f64> = Vec::with_capacity(hull.len() - 1);
        for w in hull.windows(2) {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            if let Some(&last) = slopes.last() {
                if slope - last < SLOPE_MERGE_TOL {
                    knots.pop();
                    values.pop();
                    slopes.pop();
                    let (x0, y0) = (knots[knots.len() - 1], values[values.len() - 1]);
                    slopes.push((w[1].1 - y0) / (w[1].0 - x0));
                    knots.push(w[1].0);
                    values.push(w[1].1);
                    continue;
                }
            }
            slopes.push(slope);
            knots.push(w[1].0);
            values.push(w[1].1);
        }
        let interval = (points[0].0, points[points.len() - 1].0);
        Ok(Self { knots, values, slopes, interval })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn check_domain(&self, v: f64) -> Result<()> {
        let (a, b) = self.interval;
        if v.is_nan() || v < a || v > b {
            return Err(Error::Domain { value: v, lo: a, hi: b });
        }
        Ok(())
    }

    /// Index of the segment whose closure `(k_j, k_{j+1}]` contains `v`;
    /// the first segment at `v = a`.
    fn segment_left(&self, v: f64) -> usize {
        self.knots.partition_point(|&k| k < v).saturating_sub(1).min(self.slopes.len() - 1)
    }

    /// Value of the minorant at `v`.
    pub fn eval(&self, v: f64) -> Result<f64> {
        self.check_domain(v)?;
        let j = self.segment_left(v);
        Ok(self.values[j] + self.slopes[j] * (v - self.knots[j]))
    }

    /// Left derivative at `v`; at `v = a` the first slope.
    pub fn left_derivative(&self, v: f64) -> Result<f64> {
        self.check_domain(v)?;
        Ok(self.slopes[self.segment_left(v)])
    }
}

/// Greatest convex minorant of `lam` restricted to `[a, b]`.
pub fn gcm_of_step(lam: &StepFunction, a: f64, b: f64) -> Result<ConvexMinorant> {
    ConvexMinorant::from_points(&constraint_points(lam, a, b)?)
}

/// Checks `λ̂(v) ≤ c ⟺ argmin_s {Λ(s) − c·s} ≥ v` over the constraint points of
/// `lam` on the minorant's interval, taking the largest minimizer.
pub fn switching_check(lam: &StepFunction, cm: &ConvexMinorant, v: f64, c: f64) -> Result<Switching> {
    let (a, b) = cm.interval();
    switching_check_points(&constraint_points(lam, a, b)?, cm, v, c)
}

/// [`switching_check`] against an explicit constraint set.
pub fn switching_check_points(
    points: &[(f64, f64)],
    cm: &ConvexMinorant,
    v: f64,
    c: f64,
) -> Result<Switching> {
    let (a, b) = cm.interval();
    if !(v > a && v < b) {
        return Err(Error::Domain { value: v, lo: a, hi: b });
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("slope level must be positive, got {c}")));
    }
    if cm.slopes().iter().any(|s| (s - c).abs() < TIE_TOL) {
        return Ok(Switching::Indeterminate);
    }

    let objective = |&(x, y): &(f64, f64)| y - c * x;
    let min = points.iter().map(objective).fold(f64::INFINITY, f64::min);
    let minimizers: Vec<f64> = points
        .iter()
        .filter(|p| objective(p) - min <= TIE_TOL)
        .map(|p| p.0)
        .collect();
    let argmin = minimizers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if minimizers.len() > 1 && minimizers.iter().any(|&x| x < v) && argmin >= v {
        return Ok(Switching::Indeterminate);
    }

    let lhs = cm.left_derivative(v)? <= c;
    let rhs = argmin >= v;
    Ok(if lhs == rhs { Switching::Holds } else { Switching::Violated })
}
