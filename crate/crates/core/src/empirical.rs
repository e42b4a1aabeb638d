//! Empirical CDF `F_n` and the transformed step function `Λ_n`.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed valuations, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ValueSample {
    values: Vec<f64>,
}

impl ValueSample {
    /// Sorts `values`; rejects empty input and non-finite entries.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite observation {bad}")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    /// Reads one value per line. A single leading `value` header is allowed;
    /// blank lines are skipped. Any other non-numeric line is a parse error
    /// carrying its 1-based line number.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut values = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
            let field = line.trim();
            if field.is_empty() {
                continue;
            }
            if line_no == 1 && field.eq_ignore_ascii_case("value") {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { line: line_no, msg: format!("non-finite value {field:?}") });
            }
            values.push(v);
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Sample standard deviation (`n − 1` denominator); zero for `n = 1`.
    pub fn std_dev(&self) -> f64 {
        let n = self.values.len();
        if n < 2 || self.min() == self.max() {
            return 0.0;
        }
        let mean = self.values.iter().sum::<f64>() / n as f64;
        let ss: f64 = self.values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    }

    /// Order-statistic quantile `V_(⌈pn⌉)`, with `p = 0` mapped to the minimum.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.values.len();
        let k = (p.clamp(0.0, 1.0) * n as f64).ceil() as usize;
        self.values[k.clamp(1, n) - 1]
    }

    /// Distinct values with their cumulative counts `#{V_i ≤ x}`.
    fn cumulative_counts(&self) -> (Vec<f64>, Vec<usize>) {
        let mut knots = Vec::new();
        let mut counts = Vec::new();
        for (i, &v) in self.values.iter().enumerate() {
            if knots.last() == Some(&v) {
                *counts.last_mut().unwrap() = i + 1;
            } else {
                knots.push(v);
                counts.push(i + 1);
            }
        }
        (knots, counts)
    }
}

impl TryFrom<Vec<f64>> for ValueSample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ValueSample> for Vec<f64> {
    fn from(s: ValueSample) -> Self {
        s.values
    }
}

/// Right-continuous nondecreasing step function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
    left_value: f64,
}

impl StepFunction {
    /// Builds a step function taking `values[i]` on `[knots[i], knots[i+1])`
    /// and `left_value` before the first knot.
    pub fn new(knots: Vec<f64>, values: Vec<f64>, left_value: f64) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::InvalidParameter("knots and values differ in length".into()));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("knots must be strictly increasing".into()));
        }
        let mut prev = left_value;
        for &v in &values {
            if !(v >= prev) {
                return Err(Error::InvalidParameter("step values must be nondecreasing".into()));
            }
            prev = v;
        }
        Ok(Self { knots, values, left_value })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_value(&self) -> f64 {
        self.left_value
    }

    /// Value at `x`: the value of the largest knot `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.knots.partition_point(|&k| k <= x) {
            0 => self.left_value,
            i => self.values[i - 1],
        }
    }

    /// Left limit `lim_{y↑x}` of the step function.
    pub fn left_limit(&self, x: f64) -> f64 {
        match self.knots.partition_point(|&k| k < x) {
            0 => self.left_value,
            i => self.values[i - 1],
        }
    }
}

/// Empirical CDF with a jump of `multiplicity/n` at each distinct value.
pub fn ecdf(sample: &ValueSample) -> StepFunction {
    let n = sample.len() as f64;
    let (knots, counts) = sample.cumulative_counts();
    let values = counts.into_iter().map(|c| c as f64 / n).collect();
    StepFunction { knots, values, left_value: 0.0 }
}

/// `p ↦ 1/(1 − p + 1/n)`, the map taking `F_n` to `Λ_n`.
pub fn lambda_transform(p: f64, n: usize) -> f64 {
    1.0 / (1.0 - p + 1.0 / n as f64)
}

/// `Λ_n(v) = 1/(1 − F_n(v) + 1/n)`, bounded above by `n`.
pub fn lambda_n(sample: &ValueSample) -> StepFunction {
    let n = sample.len();
    let f_n = ecdf(sample);
    let values = f_n.values.iter().map(|&p| lambda_transform(p, n)).collect();
    StepFunction {
        knots: f_n.knots,
        values,
        left_value: lambda_transform(0.0, n),
    }
}
