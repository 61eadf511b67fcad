use std::f64::consts::{PI, TAU};
use std::fmt;

use num_rational::Ratio;

use super::{Eigenvalue, Spectrum, SpectrumEntry};
use crate::cone::unit_ball_volume;
use crate::error::{Error, Result};

/// A member of the cross-section catalog.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CrossSection {
    /// Circle of the given circumference; the cone over it is a 2D cone of angle `L`.
    Circle { circumference: f64 },
    /// Round `m`-sphere of the given radius (radius 1 gives Euclidean space).
    Sphere { m: usize, radius: f64 },
    /// Round 2-sphere modulo the rotation of order `q` about a fixed axis.
    Football { q: u64 },
}

impl CrossSection {
    pub fn dim(&self) -> usize {
        match self {
            CrossSection::Circle { .. } => 1,
            CrossSection::Sphere { m, .. } => *m,
            CrossSection::Football { .. } => 2,
        }
    }

    pub fn spectrum(&self, lambda_max: f64) -> Result<Spectrum> {
        match *self {
            CrossSection::Circle { circumference } => circle_spectrum(circumference, lambda_max),
            CrossSection::Sphere { m, radius } => sphere_spectrum(m, radius, lambda_max),
            CrossSection::Football { q } => football_spectrum(q, lambda_max),
        }
    }
}

impl fmt::Display for CrossSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossSection::Circle { circumference } => write!(f, "circle:L={circumference}"),
            CrossSection::Sphere { m, radius } => write!(f, "sphere:m={m},r={radius}"),
            CrossSection::Football { q } => write!(f, "football:q={q}"),
        }
    }
}

fn check_lambda_max(lambda_max: f64) -> Result<()> {
    if lambda_max.is_finite() && lambda_max >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "lambda_max must be finite and >= 0, got {lambda_max}"
        )))
    }
}

fn exact_integer(v: u128) -> Result<Eigenvalue> {
    i64::try_from(v)
        .map(Eigenvalue::integer)
        .map_err(|_| Error::domain("eigenvalue exceeds the exact integer range"))
}

/// Neumann spectrum of a circle of circumference `circumference`:
/// `(2πk/L)²` with multiplicity 2 for `k ≥ 1`.
pub fn circle_spectrum(circumference: f64, lambda_max: f64) -> Result<Spectrum> {
    if !(circumference > 0.0 && circumference <= TAU) {
        return Err(Error::domain(format!(
            "circle circumference must lie in (0, 2π], got {circumference}"
        )));
    }
    check_lambda_max(lambda_max)?;
    let freq = TAU / circumference;
    let integral = freq.fract() == 0.0;
    let mut entries = vec![SpectrumEntry::new(Eigenvalue::integer(0), 1)];
    for k in 1u64.. {
        let mode = k as f64 * freq;
        let value = mode * mode;
        if value > lambda_max {
            break;
        }
        let ev = if integral {
            let f = freq as u128;
            exact_integer((k as u128 * f).pow(2))?
        } else {
            Eigenvalue::Approx(value)
        };
        entries.push(SpectrumEntry::new(ev, 2));
    }
    Spectrum::new(entries, lambda_max, 1, circumference)
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Dimension of degree-`k` spherical harmonics on the `m`-sphere,
/// `C(m+k, m) - C(m+k-2, m)`.
pub fn sphere_multiplicity(k: u64, m: usize) -> Option<u64> {
    let (k, m) = (k as u128, m as u128);
    let hi = binomial(m + k, m)?;
    let lo = if k >= 2 { binomial(m + k - 2, m)? } else { 0 };
    u64::try_from(hi - lo).ok()
}

/// Neumann spectrum of the round `m`-sphere of radius `radius`:
/// `k(k+m-1)/radius²` with the spherical-harmonic multiplicities.
pub fn sphere_spectrum(m: usize, radius: f64, lambda_max: f64) -> Result<Spectrum> {
    if m < 2 {
        return Err(Error::domain(format!("sphere dimension must be >= 2, got {m}")));
    }
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::domain(format!(
            "sphere radius must lie in (0, 1], got {radius}"
        )));
    }
    check_lambda_max(lambda_max)?;
    let unit = radius == 1.0;
    let scale = 1.0 / (radius * radius);
    let mut entries = vec![SpectrumEntry::new(Eigenvalue::integer(0), 1)];
    for k in 1u64.. {
        let base = k as u128 * (k as u128 + m as u128 - 1);
        let value = base as f64 * scale;
        if value > lambda_max {
            break;
        }
        let ev = if unit {
            exact_integer(base)?
        } else {
            Eigenvalue::Approx(value)
        };
        let mult = sphere_multiplicity(k, m)
            .ok_or_else(|| Error::domain(format!("multiplicity overflow at degree {k}")))?;
        entries.push(SpectrumEntry::new(ev, mult));
    }
    let area = (m as f64 + 1.0) * unit_ball_volume(m + 1);
    Spectrum::new(entries, lambda_max, m, radius.powi(m as i32) * area)
}

/// Neumann spectrum of the football `S²/Z_q`: eigenvalue `k(k+1)` keeps the rotation
/// invariant harmonics, multiplicity `2⌊k/q⌋ + 1`.
pub fn football_spectrum(q: u64, lambda_max: f64) -> Result<Spectrum> {
    if q < 1 {
        return Err(Error::domain("football order q must be >= 1"));
    }
    check_lambda_max(lambda_max)?;
    let mut entries = vec![SpectrumEntry::new(Eigenvalue::integer(0), 1)];
    for k in 1u64.. {
        let base = k as u128 * (k as u128 + 1);
        if base as f64 > lambda_max {
            break;
        }
        let ev = Eigenvalue::Exact(Ratio::from_integer(
            i64::try_from(base).map_err(|_| Error::domain("eigenvalue overflow"))?,
        ));
        entries.push(SpectrumEntry::new(ev, 2 * (k / q) + 1));
    }
    Spectrum::new(entries, lambda_max, 2, 4.0 * PI / q as f64)
}
