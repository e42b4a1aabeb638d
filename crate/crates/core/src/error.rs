use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value {value} is outside the domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("density vanishes at v = {0}; virtual value undefined")]
    ZeroDensity(f64),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate sample: {0}")]
    Degenerate(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid interval [{a}, {b}]: {reason}")]
    InvalidInterval { a: f64, b: f64, reason: &'static str },

    #[error("regularity violated: Chernoff scale bracket {0} is negative")]
    RegularityViolated(f64),

    #[error("derivative window collapsed at v = {v} (h = {h})")]
    WindowCollapsed { v: f64, h: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{failed} of {total} replications failed at n = {n}")]
    Experiment { n: usize, failed: usize, total: usize },

    #[error("certificate check failed: {0}")]
    Certificate(String),
}
