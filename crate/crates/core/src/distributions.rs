//! Analytic valuation distributions used as ground truth.
//!
//! Every family has compact support and exact `pdf`, `cdf` and `pdf_deriv`.
//! [`DistributionSpec::check_regularity`] decides Myerson regularity through
//! the sign of `ψ(v) = 2f(v)² + (1 − F(v))f′(v)`, the numerator of the second
//! derivative of `(1 − F)⁻¹`, together with the one-sided limits of
//! `λ = f/(1 − F)²` at density discontinuities.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::empirical::ValueSample;
use crate::error::{Error, Result};

/// Default tolerance for [`DistributionSpec::check_regularity`].
pub const DEFAULT_REGULARITY_TOL: f64 = 1e-9;
/// Default grid size for [`DistributionSpec::check_regularity`].
pub const DEFAULT_REGULARITY_GRID: usize = 10_001;

fn zero() -> f64 {
    0.0
}

fn one() -> f64 {
    1.0
}

/// Distribution family with its parameters. JSON form is internally tagged,
/// e.g. `{"family": "perturbed_uniform", "delta": 0.1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Uniform {
        #[serde(default = "zero")]
        lo: f64,
        #[serde(default = "one")]
        hi: f64,
    },
    /// Exponential with the given rate, truncated to `[lo, hi]`.
    TruncExp {
        rate: f64,
        #[serde(default = "zero")]
        lo: f64,
        #[serde(default = "one")]
        hi: f64,
    },
    /// Uniform on `[0, 1]` plus the tent-shaped perturbation
    /// `δ·φ((v − 1/2)/δ)` used in the minimax lower bound.
    PerturbedUniform { delta: f64 },
    /// Mixture of two uniforms separated by a gap; deliberately irregular.
    GapMixture {
        w: f64,
        lo1: f64,
        hi1: f64,
        lo2: f64,
        hi2: f64,
    },
}

/// A validated distribution with its support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct DistributionSpec {
    family: Family,
    support: (f64, f64),
}

/// Outcome of a regularity check on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub is_regular: bool,
    pub min_psi: f64,
    pub argmin_v: f64,
    pub grid_size: usize,
    /// Smallest jump `λ(k⁺) − λ(k⁻)` over density discontinuities `k`;
    /// zero when the density is continuous.
    pub min_lambda_jump: f64,
    pub jump_at: Option<f64>,
}

impl TryFrom<Family> for DistributionSpec {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        Self::new(family)
    }
}

impl From<DistributionSpec> for Family {
    fn from(spec: DistributionSpec) -> Self {
        spec.family
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

impl DistributionSpec {
    pub fn new(family: Family) -> Result<Self> {
        let support = match family {
            Family::Uniform { lo, hi } => {
                if !finite(&[lo, hi]) || lo >= hi {
                    return Err(invalid(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
                }
                (lo, hi)
            }
            Family::TruncExp { rate, lo, hi } => {
                if !finite(&[rate, lo, hi]) || lo >= hi || rate <= 0.0 {
                    return Err(invalid(format!(
                        "trunc_exp needs rate > 0 and lo < hi, got rate={rate}, [{lo}, {hi}]"
                    )));
                }
                (lo, hi)
            }
            Family::PerturbedUniform { delta } => {
                if !(delta > 0.0 && delta < 1.0 / 3.0) {
                    return Err(invalid(format!(
                        "perturbed_uniform needs 0 < delta < 1/3, got {delta}"
                    )));
                }
                (0.0, perturbed::upper_support(delta))
            }
            Family::GapMixture { w, lo1, hi1, lo2, hi2 } => {
                if !finite(&[w, lo1, hi1, lo2, hi2])
                    || !(w > 0.0 && w < 1.0)
                    || !(lo1 < hi1 && hi1 <= lo2 && lo2 < hi2)
                {
                    return Err(invalid(
                        "gap_mixture needs 0 < w < 1 and lo1 < hi1 <= lo2 < hi2",
                    ));
                }
                (lo1, hi2)
            }
        };
        Ok(Self { family, support })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Family::Uniform { lo, hi })
    }

    pub fn trunc_exp(rate: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(Family::TruncExp { rate, lo, hi })
    }

    pub fn perturbed_uniform(delta: f64) -> Result<Self> {
        Self::new(Family::PerturbedUniform { delta })
    }

    pub fn gap_mixture(w: f64, lo1: f64, hi1: f64, lo2: f64, hi2: f64) -> Result<Self> {
        Self::new(Family::GapMixture { w, lo1, hi1, lo2, hi2 })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    fn check_domain(&self, v: f64) -> Result<()> {
        let (lo, hi) = self.support;
        if v.is_nan() || v < lo || v > hi {
            return Err(Error::Domain { value: v, lo, hi });
        }
        Ok(())
    }

    /// Points inside the support where the density or its derivative is
    /// discontinuous.
    pub fn kinks(&self) -> Vec<f64> {
        let (lo, hi) = self.support;
        let raw = match self.family {
            Family::Uniform { .. } | Family::TruncExp { .. } => Vec::new(),
            Family::PerturbedUniform { delta } => perturbed::kinks(delta).to_vec(),
            Family::GapMixture { hi1, lo2, .. } => vec![hi1, lo2],
        };
        let mut ks: Vec<f64> = raw.into_iter().filter(|&k| k > lo && k < hi).collect();
        ks.dedup();
        ks
    }

    pub fn pdf(&self, v: f64) -> Result<f64> {
        self.check_domain(v)?;
        Ok(self.pdf_unchecked(v))
    }

    fn pdf_unchecked(&self, v: f64) -> f64 {
        match self.family {
            Family::Uniform { lo, hi } => 1.0 / (hi - lo),
            Family::TruncExp { rate, lo, hi } => {
                rate * (-rate * (v - lo)).exp() / -(-rate * (hi - lo)).exp_m1()
            }
            Family::PerturbedUniform { delta } => perturbed::pdf(delta, v),
            Family::GapMixture { w, lo1, hi1, lo2, hi2 } => {
                if v >= lo1 && v <= hi1 {
                    w / (hi1 - lo1)
                } else if v >= lo2 && v <= hi2 {
                    (1.0 - w) / (hi2 - lo2)
                } else {
                    0.0
                }
            }
        }
    }

    /// One-sided density limits `(f(v⁻), f(v⁺))`.
    fn pdf_limits(&self, v: f64) -> (f64, f64) {
        match self.family {
            Family::GapMixture { w, lo1, hi1, lo2, hi2 } => {
                let h1 = w / (hi1 - lo1);
                let h2 = (1.0 - w) / (hi2 - lo2);
                let left = if v > lo1 && v <= hi1 {
                    h1
                } else if v > lo2 && v <= hi2 {
                    h2
                } else {
                    0.0
                };
                let right = if v >= lo1 && v < hi1 {
                    h1
                } else if v >= lo2 && v < hi2 {
                    h2
                } else {
                    0.0
                };
                (left, right)
            }
            _ => {
                let f = self.pdf_unchecked(v);
                (f, f)
            }
        }
    }

    pub fn cdf(&self, v: f64) -> Result<f64> {
        self.check_domain(v)?;
        Ok(self.cdf_unchecked(v))
    }

    fn cdf_unchecked(&self, v: f64) -> f64 {
        let p = match self.family {
            Family::Uniform { lo, hi } => (v - lo) / (hi - lo),
            Family::TruncExp { rate, lo, hi } => {
                (-rate * (v - lo)).exp_m1() / (-rate * (hi - lo)).exp_m1()
            }
            Family::PerturbedUniform { delta } => {
                if v >= self.support.1 {
                    1.0
                } else {
                    perturbed::cdf(delta, v)
                }
            }
            Family::GapMixture { w, lo1, hi1, lo2, hi2 } => {
                if v <= hi1 {
                    w * (v - lo1) / (hi1 - lo1)
                } else if v < lo2 {
                    w
                } else {
                    w + (1.0 - w) * (v - lo2) / (hi2 - lo2)
                }
            }
        };
        p.clamp(0.0, 1.0)
    }

    /// Derivative of the density. At a kink the left derivative is returned;
    /// at the lower end of the support, where no left derivative exists, the
    /// right derivative.
    pub fn pdf_deriv(&self, v: f64) -> Result<f64> {
        self.check_domain(v)?;
        Ok(match self.family {
            Family::Uniform { .. } | Family::GapMixture { .. } => 0.0,
            Family::TruncExp { rate, .. } => -rate * self.pdf_unchecked(v),
            Family::PerturbedUniform { delta } => perturbed::pdf_deriv_left(delta, v),
        })
    }

    /// `v − (1 − F(v))/f(v)`.
    pub fn virtual_value(&self, v: f64) -> Result<f64> {
        let f = self.pdf(v)?;
        if f <= 0.0 {
            return Err(Error::ZeroDensity(v));
        }
        Ok(v - (1.0 - self.cdf_unchecked(v)) / f)
    }

    /// `ψ(v) = 2f(v)² + (1 − F(v))f′(v)`. For the perturbed family the
    /// closed-form branches are used, with branches closed on the left.
    pub fn psi(&self, v: f64) -> Result<f64> {
        self.check_domain(v)?;
        Ok(match self.family {
            Family::PerturbedUniform { delta } => perturbed::psi(delta, v),
            _ => {
                let f = self.pdf_unchecked(v);
                let fp = self.pdf_deriv(v)?;
                2.0 * f * f + (1.0 - self.cdf_unchecked(v)) * fp
            }
        })
    }

    /// `λ(v) = f(v)/(1 − F(v))²`, the derivative of `(1 − F)⁻¹`.
    pub fn lambda(&self, v: f64) -> Result<f64> {
        let f = self.pdf(v)?;
        let s = 1.0 - self.cdf_unchecked(v);
        Ok(f / (s * s))
    }

    /// Checks Myerson regularity on `grid_size` equispaced interior points.
    pub fn check_regularity(&self, grid_size: usize, tol: f64) -> Result<RegularityReport> {
        if grid_size < 3 {
            return Err(invalid(format!("grid_size must be at least 3, got {grid_size}")));
        }
        let (lo, hi) = self.support;
        let step = (hi - lo) / (grid_size + 1) as f64;
        let mut min_psi = f64::INFINITY;
        let mut argmin_v = lo;
        for i in 1..=grid_size {
            let v = lo + step * i as f64;
            let p = self.psi(v)?;
            if p < min_psi {
                min_psi = p;
                argmin_v = v;
            }
        }

        let mut min_lambda_jump = 0.0;
        let mut jump_at = None;
        for k in self.kinks() {
            let (left, right) = self.pdf_limits(k);
            let s = 1.0 - self.cdf_unchecked(k);
            let jump = (right - left) / (s * s);
            if jump < min_lambda_jump {
                min_lambda_jump = jump;
                jump_at = Some(k);
            }
        }

        Ok(RegularityReport {
            is_regular: min_psi >= -tol && min_lambda_jump >= -tol,
            min_psi,
            argmin_v,
            grid_size,
            min_lambda_jump,
            jump_at,
        })
    }

    /// Draws `n` values from a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<ValueSample> {
        if n == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        ValueSample::new(self.draw_seeded(n, seed))
    }

    /// The values behind [`sample`](Self::sample), in generation order.
    pub fn draw_seeded(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.draw(&mut rng, n)
    }

    /// Draws `n` values in generation order (unsorted).
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.draw_one(rng)).collect()
    }

    fn draw_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        match self.family {
            Family::Uniform { lo, hi } => lo + u * (hi - lo),
            Family::TruncExp { rate, lo, hi } => {
                // inverse CDF; ln_1p keeps precision for small u
                lo - (u * (-rate * (hi - lo)).exp_m1()).ln_1p() / rate
            }
            Family::PerturbedUniform { delta } => {
                let upper = self.support.1;
                let mut x = u * upper;
                loop {
                    let accept: f64 = rng.sample(Open01);
                    if accept * (1.0 + delta) <= perturbed::pdf(delta, x) {
                        return x;
                    }
                    x = rng.sample::<f64, _>(Open01) * upper;
                }
            }
            Family::GapMixture { w, lo1, hi1, lo2, hi2 } => {
                let x: f64 = rng.sample(Open01);
                if u < w {
                    lo1 + x * (hi1 - lo1)
                } else {
                    lo2 + x * (hi2 - lo2)
                }
            }
        }
    }
}

/// Closed forms for `f₂(v) = 1 + δφ((v − 1/2)/δ)` on `[0, 1]`.
pub(crate) mod perturbed {
    /// Window boundaries `1/2 − δ, 1/2, 1/2 + 2δ, 1/2 + 3δ`.
    pub fn kinks(delta: f64) -> [f64; 4] {
        [0.5 - delta, 0.5, 0.5 + 2.0 * delta, 0.5 + 3.0 * delta]
    }

    pub fn pdf(delta: f64, v: f64) -> f64 {
        let [k0, k1, k2, k3] = kinks(delta);
        if v >= k0 && v < k1 {
            v + 0.5 + delta
        } else if v >= k1 && v < k2 {
            -v + 1.5 + delta
        } else if v >= k2 && v < k3 {
            v + 0.5 - 3.0 * delta
        } else {
            1.0
        }
    }

    pub fn pdf_deriv_left(delta: f64, v: f64) -> f64 {
        let [k0, k1, k2, k3] = kinks(delta);
        if v > k0 && v <= k1 {
            1.0
        } else if v > k1 && v <= k2 {
            -1.0
        } else if v > k2 && v <= k3 {
            1.0
        } else {
            0.0
        }
    }

    /// `∫₀ᵛ f₂`, without truncation to the support.
    pub fn cdf(delta: f64, v: f64) -> f64 {
        let [k0, k1, k2, k3] = kinks(delta);
        if v >= k0 && v < k1 {
            v * v / 2.0 + (0.5 + delta) * v + (delta - 0.5).powi(2) / 2.0
        } else if v >= k1 && v < k2 {
            -v * v / 2.0 + (1.5 + delta) * v + (delta * delta - delta - 0.25) / 2.0
        } else if v >= k2 && v < k3 {
            v * v / 2.0 + (0.5 - 3.0 * delta) * v + (0.5 + 3.0 * delta).powi(2) / 2.0
        } else {
            v
        }
    }

    pub fn psi(delta: f64, v: f64) -> f64 {
        let [k0, k1, k2, k3] = kinks(delta);
        if v >= k0 && v < k1 {
            1.5 * (v + 0.5 + delta).powi(2) + 1.0 + delta
        } else if v >= k1 && v < k2 {
            1.5 * (-v + 1.5 + delta).powi(2) + delta * (1.0 + delta)
        } else if v >= k2 && v < k3 {
            1.5 * (v + 0.5 - 3.0 * delta).powi(2) + 1.0 - 3.0 * delta
        } else {
            2.0
        }
    }

    /// Right end of the support: 1 when the window fits inside `[0, 1]`,
    /// otherwise the point where `∫₀ˣ f₂` reaches 1.
    pub fn upper_support(delta: f64) -> f64 {
        if 0.5 + 3.0 * delta <= 1.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.5, 1.0);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return hi;
            }
            if cdf(delta, mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
}
