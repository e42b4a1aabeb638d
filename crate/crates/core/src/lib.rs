//! Tuning-parameter-free density estimation for bidder valuations under
//! Myerson regularity.
//!
//! Regularity of a value distribution `F` is equivalent to convexity of
//! `Λ = (1 − F)⁻¹`. The estimator replaces `F` by the empirical CDF, takes
//! the greatest convex minorant of the resulting step function, and maps the
//! left derivative of the minorant back to a density:
//!
//! ```text
//! F_n  →  Λ_n = (1 − F_n + 1/n)⁻¹  →  GCM  →  λ̂_n  →  f̂_n = λ̂_n (1 − F_n)²
//! ```
//!
//! No bandwidth or smoothing parameter is involved. The estimator converges
//! at rate `n^{-1/3}` with a Chernoff-distributed limit, which the
//! [`inference`] module turns into confidence intervals.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod empirical;
pub mod error;
pub mod estimator;
pub mod gcm;
pub mod inference;
pub mod io;
pub mod minimax;
pub mod montecarlo;
pub mod quadrature;

pub use distributions::{DistributionSpec, Family, RegularityReport};
pub use empirical::{StepFunction, ValueSample};
pub use error::{Error, Result};
pub use estimator::{DensityEstimate, Estimator};
pub use gcm::{ConvexMinorant, Switching};
pub use inference::{ChernoffApprox, InferenceResult, QuantilePoint};
pub use minimax::{MinimaxCertificate, PerturbedDensity};
pub use montecarlo::{McConfig, McReport, NStats, RepRecord};
