//! Energy forms of finite harmonic expansions on a cone, Gram log-determinants,
//! constrained orthonormalization and the eigenvalue-sum inequality.
//!
//! An expansion `u = Σ c_i r^{α_i} φ_i` is stored by its coefficients on flat
//! slots of the cross-section spectrum. Every form below is diagonal in that
//! basis, so all quantities reduce to weighted coefficient sums.

mod eigensum;
mod fuzz;
mod gram;
mod lemma;

pub use eigensum::{eigensum_inequality_check, EigensumCheck, PipelineStep};
pub use fuzz::{eigensum_campaign, random_subspace, write_json_lines, FuzzConfig, FuzzRecord};
pub use gram::{
    gram, gram_derivative, log_det_derivative, log_det_ratio, orthonormal_basis, GramForm,
    MAX_CONDITION,
};
pub use lemma::{constrained_coefficients, constrained_orthonormalize};

use std::collections::BTreeMap;

use crate::cone::ConeGeometry;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub slot: u64,
    pub coeff: f64,
    pub lambda: f64,
    pub alpha: f64,
}

/// Finite expansion `Σ c_i r^{α_i} φ_i` over slots `i ≥ 1`, sorted by slot.
#[derive(Clone, Debug)]
pub struct HarmonicExpansion<'a> {
    cone: &'a ConeGeometry,
    terms: Vec<Term>,
}

impl<'a> HarmonicExpansion<'a> {
    /// Builds an expansion from `(slot, coefficient)` pairs with distinct slots `≥ 1`.
    pub fn new(cone: &'a ConeGeometry, coeffs: &[(u64, f64)]) -> Result<Self> {
        let mut terms = Vec::with_capacity(coeffs.len());
        for &(slot, coeff) in coeffs {
            if slot == 0 {
                return Err(Error::domain("slot 0 is the constant mode and is excluded"));
            }
            if !coeff.is_finite() {
                return Err(Error::domain(format!("coefficient of slot {slot} is not finite")));
            }
            let (lambda, alpha) = cone.exponent_of_slot(slot).ok_or_else(|| {
                Error::domain(format!(
                    "slot {slot} lies beyond the stored spectrum ({} slots)",
                    cone.cross_section().slot_count()
                ))
            })?;
            terms.push(Term {
                slot,
                coeff,
                lambda,
                alpha,
            });
        }
        terms.sort_by_key(|t| t.slot);
        if let Some(w) = terms.windows(2).find(|w| w[0].slot == w[1].slot) {
            return Err(Error::domain(format!("slot {} appears twice", w[0].slot)));
        }
        Ok(HarmonicExpansion { cone, terms })
    }

    pub fn zero(cone: &'a ConeGeometry) -> Self {
        HarmonicExpansion {
            cone,
            terms: Vec::new(),
        }
    }

    pub fn cone(&self) -> &'a ConeGeometry {
        self.cone
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn coefficient(&self, slot: u64) -> f64 {
        self.terms
            .binary_search_by_key(&slot, |t| t.slot)
            .map_or(0.0, |j| self.terms[j].coeff)
    }

    /// `Σ_j w_j u_j` over expansions of one cone.
    pub fn linear_combination(
        cone: &'a ConeGeometry,
        parts: &[(&HarmonicExpansion<'a>, f64)],
    ) -> Result<Self> {
        let mut acc: BTreeMap<u64, Term> = BTreeMap::new();
        for (u, w) in parts {
            same_cone_as(cone, u)?;
            for t in &u.terms {
                acc.entry(t.slot)
                    .and_modify(|e| e.coeff += w * t.coeff)
                    .or_insert(Term {
                        coeff: w * t.coeff,
                        ..*t
                    });
            }
        }
        Ok(HarmonicExpansion {
            cone,
            terms: acc.into_values().collect(),
        })
    }

    /// The expansion of `x ↦ u(c·x)`: coefficients `c_i · c^{α_i}`.
    pub fn dilate(&self, c: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * c.powf(t.alpha),
                ..*t
            })
            .collect();
        HarmonicExpansion {
            cone: self.cone,
            terms,
        }
    }
}

fn same_cone_as(cone: &ConeGeometry, u: &HarmonicExpansion<'_>) -> Result<()> {
    if std::ptr::eq(cone, u.cone) || cone == u.cone {
        Ok(())
    } else {
        Err(Error::MismatchedCone)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("radius must be finite and > 0, got {r}")))
    }
}

/// Sums `f(term, c_u r^α, c_v r^α)` over slots shared by `u` and `v`.
fn diagonal_pairing(
    u: &HarmonicExpansion<'_>,
    v: &HarmonicExpansion<'_>,
    r: f64,
    f: impl Fn(&Term, f64, f64) -> f64,
) -> Result<f64> {
    same_cone_as(u.cone, v)?;
    check_radius(r)?;
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < u.terms.len() && j < v.terms.len() {
        let (a, b) = (&u.terms[i], &v.terms[j]);
        match a.slot.cmp(&b.slot) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let s = r.powf(a.alpha);
                acc += f(a, a.coeff * s, b.coeff * s);
                i += 1;
                j += 1;
            }
        }
    }
    Ok(acc)
}

/// Dirichlet energy over the ball of radius `r`: `Σ c_i c̄_i α_i r^{2α_i+n-2}`.
pub fn energy(u: &HarmonicExpansion<'_>, v: &HarmonicExpansion<'_>, r: f64) -> Result<f64> {
    let k = r.powi(u.cone.n() as i32 - 2);
    diagonal_pairing(u, v, r, |t, a, b| a * b * t.alpha * k)
}

/// Radial derivative of [`energy`]: `Σ c_i c̄_i (α_i² + λ_i) r^{2α_i+n-3}`.
pub fn energy_derivative(
    u: &HarmonicExpansion<'_>,
    v: &HarmonicExpansion<'_>,
    r: f64,
) -> Result<f64> {
    let k = r.powi(u.cone.n() as i32 - 3);
    diagonal_pairing(u, v, r, |t, a, b| a * b * (t.alpha * t.alpha + t.lambda) * k)
}

/// L² pairing of the restrictions of `u` and `v` to the sphere of radius `r`,
/// measured on the cross-section.
pub fn section_pairing(u: &HarmonicExpansion<'_>, v: &HarmonicExpansion<'_>, r: f64) -> Result<f64> {
    diagonal_pairing(u, v, r, |_, a, b| a * b)
}

/// `Σ c_i² r^{2α_i}`.
pub fn section_l2(u: &HarmonicExpansion<'_>, r: f64) -> Result<f64> {
    section_pairing(u, u, r)
}

/// `Σ c_i² r^{2α_i} λ_i`.
pub fn section_dirichlet(u: &HarmonicExpansion<'_>, r: f64) -> Result<f64> {
    diagonal_pairing(u, u, r, |t, a, b| a * b * t.lambda)
}
