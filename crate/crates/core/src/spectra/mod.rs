//! Analytic Neumann spectra of the cross-sections used as test cones.
//!
//! A [`Spectrum`] stores distinct eigenvalues with aggregated multiplicities.
//! Eigenfunctions are never materialised: every quantity downstream depends only
//! on the eigenvalues and on the L²-orthonormality of the eigenfunctions, so an
//! eigenfunction is addressed purely by its flat slot index. Slot 0 is the
//! constant function; slot `i ≥ 1` is the `i`-th `(eigenvalue, copy)` pair in
//! lexicographic order.

mod catalog;
mod io;

pub use catalog::{
    circle_spectrum, football_spectrum, sphere_multiplicity, sphere_spectrum, CrossSection,
};
pub use io::{read_csv, read_sidecar, write_csv, write_sidecar, SpectrumSidecar};

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A Neumann eigenvalue, exact when the catalog can provide it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Eigenvalue {
    Exact(Ratio<i64>),
    Approx(f64),
}

impl Eigenvalue {
    pub fn integer(v: i64) -> Self {
        Eigenvalue::Exact(Ratio::from_integer(v))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Eigenvalue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Eigenvalue::Approx(v) => *v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Eigenvalue::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Eigenvalue::Exact(r) => r.is_zero(),
            Eigenvalue::Approx(v) => *v == 0.0,
        }
    }

    fn is_valid(&self) -> bool {
        match self {
            Eigenvalue::Exact(r) => *r.denom() > 0 && *r.numer() >= 0,
            Eigenvalue::Approx(v) => v.is_finite() && *v >= 0.0,
        }
    }

    /// Exact comparison when both sides are rational, float comparison otherwise.
    pub fn compare(&self, other: &Eigenvalue) -> Ordering {
        match (self, other) {
            (Eigenvalue::Exact(a), Eigenvalue::Exact(b)) => a.cmp(b),
            _ => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(Ordering::Equal),
        }
    }

    fn le_threshold(&self, t: &Threshold) -> bool {
        match self {
            Eigenvalue::Exact(r) => {
                let r = BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()));
                r <= t.exact
            }
            Eigenvalue::Approx(v) => *v <= t.value + t.slack,
        }
    }
}

impl fmt::Display for Eigenvalue {
    /// Exact values print as `p/q` (or `p`), floats always carry a decimal point or
    /// exponent so that the two kinds stay distinguishable on re-read.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eigenvalue::Exact(r) => write!(f, "{r}"),
            Eigenvalue::Approx(v) => write!(f, "{v:?}"),
        }
    }
}

impl std::str::FromStr for Eigenvalue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let looks_float = s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN");
        if looks_float {
            s.parse::<f64>()
                .map(Eigenvalue::Approx)
                .map_err(|e| Error::Format(format!("bad eigenvalue {s:?}: {e}")))
        } else {
            s.parse::<Ratio<i64>>()
                .map(Eigenvalue::Exact)
                .map_err(|e| Error::Format(format!("bad eigenvalue {s:?}: {e}")))
        }
    }
}

/// Upper bound for counting eigenvalues. Exact eigenvalues compare against `exact`;
/// floating eigenvalues compare against `value + slack`.
#[derive(Clone, Debug)]
pub struct Threshold {
    pub exact: BigRational,
    pub value: f64,
    pub slack: f64,
}

impl Threshold {
    pub fn new(value: f64, slack: f64) -> Result<Self> {
        let exact = BigRational::from_float(value)
            .ok_or_else(|| Error::domain(format!("threshold {value} is not finite")))?;
        Ok(Threshold { exact, value, slack })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub eigenvalue: Eigenvalue,
    pub multiplicity: u64,
}

impl SpectrumEntry {
    pub fn new(eigenvalue: Eigenvalue, multiplicity: u64) -> Self {
        SpectrumEntry {
            eigenvalue,
            multiplicity,
        }
    }
}

/// Ordered multiset of Neumann eigenvalues of a compact cross-section.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    entries: Vec<SpectrumEntry>,
    lambda_max: f64,
    dim: usize,
    total_measure: f64,
    // cumulative[j] = number of slots in entries[..=j]
    cumulative: Vec<u64>,
}

impl Spectrum {
    /// Builds a spectrum and rejects it unless every invariant holds.
    pub fn new(
        entries: Vec<SpectrumEntry>,
        lambda_max: f64,
        dim: usize,
        total_measure: f64,
    ) -> Result<Self> {
        let s = Self::new_unchecked(entries, lambda_max, dim, total_measure);
        match s.violation() {
            None => Ok(s),
            Some(why) => Err(Error::Format(format!("invalid spectrum: {why}"))),
        }
    }

    /// Builds a spectrum without validation; see [`merge_check`].
    pub fn new_unchecked(
        entries: Vec<SpectrumEntry>,
        lambda_max: f64,
        dim: usize,
        total_measure: f64,
    ) -> Self {
        let mut acc = 0u64;
        let cumulative = entries
            .iter()
            .map(|e| {
                acc = acc.saturating_add(e.multiplicity);
                acc
            })
            .collect();
        Spectrum {
            entries,
            lambda_max,
            dim,
            total_measure,
            cumulative,
        }
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Dimension `m` of the cross-section.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total `m`-dimensional measure of the cross-section.
    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    /// True when every stored eigenvalue is exact.
    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(|e| e.eigenvalue.is_exact())
    }

    /// Number of eigenfunction slots stored, including the constant.
    pub fn slot_count(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    /// Eigenvalue of flat slot `i` (slot 0 is the constant mode).
    pub fn slot(&self, i: u64) -> Option<Eigenvalue> {
        let j = self.cumulative.partition_point(|&c| c <= i);
        self.entries.get(j).map(|e| e.eigenvalue)
    }

    /// Number of positive-eigenvalue slots with eigenvalue at most `t`.
    pub fn count_at_most(&self, t: &Threshold) -> u64 {
        let j = self.entries.partition_point(|e| e.eigenvalue.le_threshold(t));
        if j == 0 {
            return 0;
        }
        let zero_slots = match self.entries.first() {
            Some(e) if e.eigenvalue.is_zero() => e.multiplicity,
            _ => 0,
        };
        self.cumulative[j - 1] - zero_slots
    }

    fn violation(&self) -> Option<String> {
        if !(self.lambda_max.is_finite() && self.lambda_max >= 0.0) {
            return Some(format!("lambda_max {} must be finite and >= 0", self.lambda_max));
        }
        if self.dim < 1 {
            return Some("cross-section dimension must be >= 1".into());
        }
        if !(self.total_measure.is_finite() && self.total_measure > 0.0) {
            return Some(format!("total measure {} must be positive", self.total_measure));
        }
        let first = match self.entries.first() {
            Some(e) => e,
            None => return Some("spectrum has no entries".into()),
        };
        if !first.eigenvalue.is_zero() || first.multiplicity != 1 {
            return Some("first entry must be (0, 1)".into());
        }
        for (i, e) in self.entries.iter().enumerate() {
            if !e.eigenvalue.is_valid() {
                return Some(format!("entry {i} has an invalid eigenvalue {}", e.eigenvalue));
            }
            if e.multiplicity == 0 {
                return Some(format!("entry {i} has zero multiplicity"));
            }
            if e.eigenvalue.to_f64() > self.lambda_max {
                return Some(format!(
                    "entry {i} eigenvalue {} exceeds lambda_max {}",
                    e.eigenvalue, self.lambda_max
                ));
            }
        }
        for (i, w) in self.entries.windows(2).enumerate() {
            if w[0].eigenvalue.compare(&w[1].eigenvalue) != Ordering::Less {
                return Some(format!("entries {i} and {} are not strictly increasing", i + 1));
            }
        }
        None
    }
}

/// Returns true iff all spectrum invariants hold: sorted strictly increasing,
/// positive multiplicities, leading `(0, 1)`, nothing above `lambda_max`,
/// positive total measure.
pub fn merge_check(spectrum: &Spectrum) -> bool {
    spectrum.violation().is_none()
}
