//! Two-point construction behind the `n^{-1/3}` minimax lower bound.
//!
//! `f₁ ≡ 1` on `[0, 1]` and `f₂ = 1 + δφ((v − 1/2)/δ)` differ by `δ` at
//! `v = 1/2` while `H²(f₁, f₂) ≤ (2√2/3)δ³`. Choosing
//! `δ = (3/(8√2 n))^{1/3}` keeps `H² ≤ 1/(4n)`, so no estimator can beat
//! `(1/8)·(3/(8√2))^{1/3}·n^{-1/3}` in worst-case absolute risk.

use serde::{Deserialize, Serialize};

use crate::distributions::{perturbed, DistributionSpec};
use crate::error::{Error, Result};
use crate::quadrature::integrate;

pub const MIN_QUAD_POINTS: usize = 128;
pub const CERTIFICATE_QUAD_POINTS: usize = 1024;
pub const PSI_GRID: usize = 10_000;
/// Slack on the Hellinger bound comparison.
pub const BOUND_SLACK: f64 = 1e-10;
const QUAD_TOL: f64 = 1e-13;

/// Tent-shaped perturbation with zero mean over its support `[-1, 3]`.
pub fn perturbation_phi(t: f64) -> f64 {
    if (-1.0..=0.0).contains(&t) {
        t + 1.0
    } else if t > 0.0 && t <= 2.0 {
        -t + 1.0
    } else if t > 2.0 && t <= 3.0 {
        t - 3.0
    } else {
        0.0
    }
}

/// `∫φ²`, summed branch by branch: `1/3 + 2/3 + 1/3`.
pub fn phi_sq_integral() -> f64 {
    // ∫_{-1}^{0}(t+1)² + ∫_{0}^{2}(1−t)² + ∫_{2}^{3}(t−3)²
    1.0 / 3.0 + 2.0 / 3.0 + 1.0 / 3.0
}

/// `δ(n) = (3/(8√2 n))^{1/3}`.
pub fn delta_schedule(n: u64) -> f64 {
    (3.0 / (8.0 * std::f64::consts::SQRT_2 * n as f64)).cbrt()
}

/// `f₂` stays Myerson-regular only for `δ < 1/3`.
pub fn regularity_premise_holds(delta: f64) -> bool {
    delta < 1.0 / 3.0
}

/// `(2√2/3)·δ³`.
pub fn hellinger_bound(delta: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 / 3.0 * delta.powi(3)
}

/// `(1/8)·(3/(8√2))^{1/3}`, the constant in front of `n^{-1/3}`.
pub fn lower_bound_constant() -> f64 {
    delta_schedule(1) / 8.0
}

/// A density on a compact support that [`hellinger_sq`] can integrate.
pub trait Density {
    fn support(&self) -> (f64, f64);
    /// Density value; zero outside the support.
    fn density(&self, v: f64) -> f64;
    /// Points where the density is not smooth.
    fn breakpoints(&self) -> Vec<f64>;
}

impl Density for DistributionSpec {
    fn support(&self) -> (f64, f64) {
        DistributionSpec::support(self)
    }

    fn density(&self, v: f64) -> f64 {
        self.pdf(v).unwrap_or(0.0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.kinks()
    }
}

/// The literal perturbed function `1 + δφ((v − 1/2)/δ)` on `[0, 1]`.
///
/// For `δ > 1/6` the perturbation window leaves `[0, 1]` and the function
/// no longer has unit mass there; [`DistributionSpec::perturbed_uniform`]
/// is the normalized counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedDensity {
    delta: f64,
}

impl PerturbedDensity {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `δφ((v − 1/2)/δ)`.
    pub fn perturbation(&self, v: f64) -> f64 {
        self.delta * perturbation_phi((v - 0.5) / self.delta)
    }

    /// Whether the window fits in `[0, 1]`, i.e. the function is a density.
    pub fn is_proper(&self) -> bool {
        0.5 + 3.0 * self.delta <= 1.0
    }
}

impl Density for PerturbedDensity {
    fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn density(&self, v: f64) -> f64 {
        if (0.0..=1.0).contains(&v) {
            1.0 + self.perturbation(v)
        } else {
            0.0
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        perturbed::kinks(self.delta).to_vec()
    }
}

/// `∫(√f₁ − √f₂)²` by Gauss–Kronrod quadrature split at every kink of
/// either density, starting from `quad_points` panels.
pub fn hellinger_sq<A: Density + ?Sized, B: Density + ?Sized>(
    first: &A,
    second: &B,
    quad_points: usize,
) -> Result<f64> {
    if quad_points < MIN_QUAD_POINTS {
        return Err(Error::InvalidParameter(format!(
            "quad_points must be at least {MIN_QUAD_POINTS}, got {quad_points}"
        )));
    }
    let (lo, hi) = first.support();
    if second.support() != (lo, hi) {
        let (lo2, hi2) = second.support();
        return Err(Error::InvalidParameter(format!(
            "mismatched supports [{lo}, {hi}] and [{lo2}, {hi2}]"
        )));
    }
    let mut breaks = first.breakpoints();
    breaks.extend(second.breakpoints());
    let r = integrate(
        |v| {
            let d = first.density(v).sqrt() - second.density(v).sqrt();
            d * d
        },
        lo,
        hi,
        &breaks,
        quad_points,
        QUAD_TOL,
    );
    Ok(r.value)
}

/// Numerical verification of the two-point construction for sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimaxCertificate {
    pub n: u64,
    pub delta: f64,
    pub hellinger_sq: f64,
    /// `(2√2/3)·δ³`.
    pub bound: f64,
    /// `1/(4n)`.
    pub hellinger_cap: f64,
    /// `|f₁(1/2) − f₂(1/2)|`.
    pub separation: f64,
    pub psi_min: f64,
    /// `(1/8)·δ`, the implied lower bound on worst-case absolute risk.
    pub risk_lower_bound: f64,
    /// The perturbation window fits inside `[0, 1]` (`δ ≤ 1/6`).
    pub proper_density: bool,
}

/// Minimum of the closed-form `ψ` for `f₂` over an interior grid of `[0, 1]`.
pub fn psi_min(delta: f64, grid: usize) -> f64 {
    (1..=grid)
        .map(|i| perturbed::psi(delta, i as f64 / (grid + 1) as f64))
        .fold(f64::INFINITY, f64::min)
}

pub fn build_certificate(n: u64) -> Result<MinimaxCertificate> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let delta = delta_schedule(n);
    let f2 = PerturbedDensity::new(delta)?;
    let f1 = DistributionSpec::uniform(0.0, 1.0)?;
    let h2 = hellinger_sq(&f1, &f2, CERTIFICATE_QUAD_POINTS)?;
    let cert = MinimaxCertificate {
        n,
        delta,
        hellinger_sq: h2,
        bound: hellinger_bound(delta),
        hellinger_cap: 1.0 / (4.0 * n as f64),
        // f₂ − f₁ is exactly the perturbation term
        separation: f2.perturbation(0.5).abs(),
        psi_min: psi_min(delta, PSI_GRID),
        risk_lower_bound: delta / 8.0,
        proper_density: f2.is_proper(),
    };

    if !regularity_premise_holds(delta) {
        return Err(Error::Certificate(format!("delta = {delta} < 1/3 does not hold")));
    }
    if !(cert.psi_min >= 0.0) {
        return Err(Error::Certificate(format!("psi_min = {} >= 0 does not hold", cert.psi_min)));
    }
    if !(h2 <= cert.bound + BOUND_SLACK) {
        return Err(Error::Certificate(format!(
            "H^2 = {h2} <= (2*sqrt(2)/3)*delta^3 = {} does not hold",
            cert.bound
        )));
    }
    if !(h2 <= cert.hellinger_cap) {
        return Err(Error::Certificate(format!(
            "H^2 = {h2} <= 1/(4n) = {} does not hold",
            cert.hellinger_cap
        )));
    }
    if cert.separation != delta {
        return Err(Error::Certificate(format!(
            "separation {} == delta {delta} does not hold",
            cert.separation
        )));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trapezoid rule on a uniform grid, independent of the adaptive path.
    fn trapezoid<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> f64 {
        let h = (hi - lo) / (points - 1) as f64;
        let inner: f64 = (1..points - 1).map(|i| f(lo + h * i as f64)).sum();
        h * (0.5 * (f(lo) + f(hi)) + inner)
    }

    fn trapezoid_hellinger(delta: f64) -> f64 {
        trapezoid(
            |v| {
                let d = 1.0 - (1.0 + delta * perturbation_phi((v - 0.5) / delta)).sqrt();
                d * d
            },
            0.0,
            1.0,
            1_000_001,
        )
    }

    #[test]
    fn phi_examples() {
        assert_eq!(perturbation_phi(0.0), 1.0);
        assert_eq!(perturbation_phi(2.5), -0.5);
        assert_eq!(perturbation_phi(-2.0), 0.0);
        assert_eq!(perturbation_phi(-1.0), 0.0);
        assert_eq!(perturbation_phi(2.0), -1.0);
        assert_eq!(perturbation_phi(3.0), 0.0);
        assert_eq!(perturbation_phi(4.0), 0.0);
    }

    #[test]
    fn phi_integrals() {
        let sq = integrate(|t| perturbation_phi(t).powi(2), -1.0, 3.0, &[0.0, 2.0], 8, 1e-14);
        assert!((sq.value - phi_sq_integral()).abs() < 1e-12);
        assert!((phi_sq_integral() - 4.0 / 3.0).abs() < 1e-15);
        for delta in [0.01, 0.05, 0.1, 0.12] {
            let k = perturbed::kinks(delta);
            let m = integrate(|v| perturbation_phi((v - 0.5) / delta), 0.0, 1.0, &k, 16, 1e-14);
            assert!(m.value.abs() < 1e-10, "delta={delta}: {}", m.value);
        }
    }

    #[test]
    fn matches_distribution_pdf_where_proper() {
        for delta in [0.05, 0.1, 1.0 / 6.0] {
            let lit = PerturbedDensity::new(delta).unwrap();
            let spec = DistributionSpec::perturbed_uniform(delta).unwrap();
            for i in 0..=500 {
                let v = i as f64 / 500.0;
                assert!((lit.density(v) - spec.pdf(v).unwrap()).abs() < 1e-14, "{delta} {v}");
            }
        }
    }

    #[test]
    fn hellinger_identity_is_zero() {
        let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
        assert_eq!(hellinger_sq(&u, &u, 128).unwrap(), 0.0);
        let p = DistributionSpec::perturbed_uniform(0.1).unwrap();
        assert_eq!(hellinger_sq(&p, &p, 128).unwrap(), 0.0);
    }

    #[test]
    fn hellinger_against_trapezoid_oracle() {
        let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
        // δ = 0.1 as a proper distribution
        let p = DistributionSpec::perturbed_uniform(0.1).unwrap();
        let h = hellinger_sq(&u, &p, 256).unwrap();
        let oracle = trapezoid_hellinger(0.1);
        assert!((h - oracle).abs() < 1e-10, "{h} vs {oracle}");
        assert!(h <= hellinger_bound(0.1));
        assert!((hellinger_bound(0.1) - 9.428e-4).abs() < 1e-7);

        // δ = 0.25 on the literal function over [0, 1]
        let lit = PerturbedDensity::new(0.25).unwrap();
        let h = hellinger_sq(&u, &lit, 256).unwrap();
        let oracle = trapezoid_hellinger(0.25);
        assert!((h - oracle).abs() < 1e-10, "{h} vs {oracle}");
        assert!(h > 0.0 && h < hellinger_bound(0.25));
    }

    #[test]
    fn hellinger_errors() {
        let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let p = DistributionSpec::perturbed_uniform(0.25).unwrap();
        assert!(hellinger_sq(&u, &p, 256).is_err());
        assert!(hellinger_sq(&u, &u, 64).is_err());
    }

    #[test]
    fn delta_schedule_examples() {
        let oracle = (3.0 / (8.0 * 2f64.sqrt())).powf(1.0 / 3.0);
        assert!((delta_schedule(1) - oracle).abs() < 1e-15);
        assert!((delta_schedule(1) - 0.642_449_146_712_662_6).abs() < 1e-12);
        for n in [1u64, 7, 125, 1000] {
            assert!((delta_schedule(8 * n) - delta_schedule(n) / 2.0).abs() < 1e-15);
        }
        assert!(!regularity_premise_holds(delta_schedule(1)));
        assert!(regularity_premise_holds(delta_schedule(10)));
        assert!((lower_bound_constant() - 0.080_306_143_339_082_83).abs() < 1e-12);
    }

    #[test]
    fn certificates() {
        let c = build_certificate(1000).unwrap();
        assert!(c.hellinger_sq <= 1.0 / 4000.0);
        assert!(c.psi_min >= 0.0);
        assert!(c.proper_density);
        assert_eq!(c.separation, c.delta);
        let c = build_certificate(10).unwrap();
        assert_eq!(c.separation, c.delta);
        assert!(!c.proper_density);
        assert!(matches!(build_certificate(1), Err(Error::Certificate(_))));
        assert!(build_certificate(0).is_err());
    }

    #[test]
    fn psi_positive_below_one_third() {
        for delta in [0.05, 0.1, 0.2, 0.3] {
            assert!(psi_min(delta, PSI_GRID) > 0.0, "delta={delta}");
        }
    }
}
