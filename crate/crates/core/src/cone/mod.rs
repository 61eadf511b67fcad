//! Cone geometry over a cross-section: growth exponents of homogeneous harmonics,
//! harmonic-dimension counts `h_d`, eigenvalue counting, and asymptotic targets.

mod report;

pub use report::{counting_report, CountingReport, CountingRow, ReportMetadata};

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::spectra::{Spectrum, Threshold};

/// Relative tie tolerance applied to `α_i ≤ d` when eigenvalues are floats.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Volume of the unit ball in `k`-dimensional Euclidean space.
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => unit_ball_volume(k - 2) * TAU / k as f64,
    }
}

/// The `(0, n-1)`-cone over a cross-section.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeGeometry {
    n: usize,
    cross_section: Spectrum,
    avr: f64,
}

impl ConeGeometry {
    pub fn new(cross_section: Spectrum) -> Result<Self> {
        let n = cross_section.dim() + 1;
        let avr = cross_section.total_measure() / n as f64;
        let omega = unit_ball_volume(n);
        if !(avr > 0.0 && avr <= omega * (1.0 + 1e-12)) {
            return Err(Error::domain(format!(
                "asymptotic volume ratio {avr} must lie in (0, ω_{n} = {omega}]"
            )));
        }
        Ok(ConeGeometry {
            n,
            cross_section,
            avr,
        })
    }

    /// Ambient dimension of the cone.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cross_section(&self) -> &Spectrum {
        &self.cross_section
    }

    /// Asymptotic volume ratio `α = ℋ^{n-1}(X) / n`.
    pub fn avr(&self) -> f64 {
        self.avr
    }

    pub fn omega(&self, k: usize) -> f64 {
        unit_ball_volume(k)
    }

    /// Growth exponent of the flat slot `i` (slot 0 has exponent 0).
    pub fn exponent_of_slot(&self, i: u64) -> Option<(f64, f64)> {
        let lambda = self.cross_section.slot(i)?.to_f64();
        exponent_of_eigenvalue(lambda, self.n)
            .ok()
            .map(|alpha| (lambda, alpha))
    }

    fn require_coverage(&self, lambda: f64) -> Result<()> {
        if lambda > self.cross_section.lambda_max() {
            Err(Error::Coverage {
                needed: lambda,
                available: self.cross_section.lambda_max(),
            })
        } else {
            Ok(())
        }
    }
}

/// Nonnegative root of `α(α + n - 2) = λ`.
pub fn exponent_of_eigenvalue(lambda: f64, n: usize) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!(
            "eigenvalue must be finite and >= 0, got {lambda}"
        )));
    }
    if n < 2 {
        return Err(Error::domain(format!("cone dimension must be >= 2, got {n}")));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let b = n as f64 - 2.0;
    // rationalised root, free of cancellation for small λ
    Ok(2.0 * lambda / (b + (b * b + 4.0 * lambda).sqrt()))
}

fn tie_width(d: f64) -> f64 {
    TIE_TOLERANCE * d.max(1.0)
}

/// λ-space width of the α tie band around exponent `d`.
fn lambda_slack(d: f64, n: usize) -> f64 {
    let tau = tie_width(d);
    tau * (2.0 * d + tau + n as f64 - 2.0)
}

/// Eigenvalue bound `λ_max` that keeps counting complete for every `d ≤ d_max`,
/// including the float tie band.
pub fn coverage_for_growth(d_max: f64, n: usize) -> f64 {
    let d = d_max + 2.0 * tie_width(d_max);
    d * (d + n as f64 - 2.0)
}

/// `N(λ) = #{i ≥ 1 : λ_i ≤ λ}` with multiplicity.
pub fn counting_function(cone: &ConeGeometry, lambda: f64) -> Result<u64> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::domain(format!(
            "counting threshold must be finite and >= 0, got {lambda}"
        )));
    }
    cone.require_coverage(lambda)?;
    let alpha = exponent_of_eigenvalue(lambda, cone.n)?;
    let t = Threshold::new(lambda, lambda_slack(alpha, cone.n))?;
    Ok(cone.cross_section.count_at_most(&t))
}

/// `h_d` of the cone: number of homogeneous harmonics `r^{α_i} φ_i`, `i ≥ 1`, with
/// `α_i ≤ d`. Ties count; float spectra use a `1e-9·max(1, d)` band.
pub fn h_d(cone: &ConeGeometry, d: f64) -> Result<u64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain(format!("growth order must be finite and > 0, got {d}")));
    }
    let shift = cone.n as f64 - 2.0;
    let value = d * (d + shift);
    cone.require_coverage(value)?;
    let dq = BigRational::from_float(d).expect("finite");
    let exact = dq.clone() * (dq + BigRational::from_integer(BigInt::from(cone.n as i64 - 2)));
    let t = Threshold {
        exact,
        value,
        slack: lambda_slack(d, cone.n),
    };
    Ok(cone.cross_section.count_at_most(&t))
}

/// Lower bound `N(d(d+n-2) - ε) - 1` on `h_d` (signed, may be -1).
pub fn harmonic_lower_bound(cone: &ConeGeometry, d: f64, eps: f64) -> Result<i64> {
    let shift = cone.n as f64 - 2.0;
    let lambda = (d * (d + shift) - eps).max(0.0);
    Ok(counting_function(cone, lambda)? as i64 - 1)
}

/// Weyl constant `lim N(λ)/λ^{(n-1)/2} = n ω_{n-1} α / (2π)^{n-1}`.
pub fn weyl_target(cone: &ConeGeometry) -> f64 {
    let k = cone.n - 1;
    cone.n as f64 * unit_ball_volume(k) * cone.avr / TAU.powi(k as i32)
}

/// Per-index Weyl constant `lim λ_i / i^{2/(n-1)} = (2π)² / (n ω_{n-1} α)^{2/(n-1)}`.
pub fn eigenvalue_growth_target(cone: &ConeGeometry) -> f64 {
    let k = (cone.n - 1) as f64;
    TAU * TAU / (cone.n as f64 * unit_ball_volume(cone.n - 1) * cone.avr).powf(2.0 / k)
}

/// Measure of the ball of radius `radius` about the vertex, `α R^n`.
pub fn ball_measure(cone: &ConeGeometry, radius: f64) -> Result<f64> {
    if !(radius >= 0.0) {
        return Err(Error::domain(format!("radius must be >= 0, got {radius}")));
    }
    Ok(cone.avr * radius.powi(cone.n as i32))
}
