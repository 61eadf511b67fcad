use nalgebra::DMatrix;
use serde::Serialize;

use super::gram::{gram, log_det_derivative};
use super::lemma::constrained_coefficients;
use super::{energy_derivative, section_dirichlet, section_l2, HarmonicExpansion};
use crate::cone::ConeGeometry;
use crate::error::{Error, Result};

/// One vector of the min-max pairing: `v_i` is `Ẽ_r`-normalized and its section
/// at radius `r` is orthogonal to `φ_1, ..., φ_{i-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PipelineStep {
    /// `λ_i` of the cross-section.
    pub lambda: f64,
    /// Rayleigh quotient of the section of `v_i`; at least `λ_i`.
    pub rayleigh: f64,
    /// `(r/2) Ẽ'_r(v_i, v_i)`; at least `√λ_i`.
    pub half_r_derivative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigensumCheck {
    /// `Σ_{i≤k} √λ_i` over the first `k` positive cross-section eigenvalues.
    pub lhs: f64,
    /// `(r/2) d/ds ln det Ẽ_s` at `s = r`.
    pub rhs: f64,
    pub holds: bool,
    pub steps: Vec<PipelineStep>,
    /// True when every step bound holds and the steps sum to `rhs`.
    pub pipeline_holds: bool,
}

const REL_SLACK: f64 = 1e-9;

/// Compares `Σ_{i≤k} √λ_i` with `(r/2) d/ds ln det Ẽ_s |_{s=r}` on a
/// `k`-dimensional subspace of harmonics, and replays the pairing argument
/// vector by vector.
pub fn eigensum_inequality_check(
    cone: &ConeGeometry,
    subspace: &[HarmonicExpansion<'_>],
    r: f64,
) -> Result<EigensumCheck> {
    let k = subspace.len();
    if k == 0 {
        return Err(Error::Dimension("subspace must be nonempty".into()));
    }
    let spectrum = cone.cross_section();
    if spectrum.slot_count() <= k as u64 {
        return Err(Error::Coverage {
            needed: f64::INFINITY,
            available: spectrum.lambda_max(),
        });
    }
    let lambdas: Vec<f64> = (1..=k as u64)
        .map(|i| spectrum.slot(i).expect("covered").to_f64())
        .collect();
    let lhs: f64 = lambdas.iter().map(|l| l.sqrt()).sum();
    let rhs = 0.5 * r * log_det_derivative(subspace, r)?;
    let holds = lhs <= rhs + REL_SLACK * rhs.abs();

    let g = gram(subspace, r)?;
    let pairings = DMatrix::from_fn(k, k - 1, |a, j| {
        let slot = j as u64 + 1;
        match subspace[a].terms().binary_search_by_key(&slot, |t| t.slot) {
            Ok(idx) => {
                let t = &subspace[a].terms()[idx];
                t.coeff * r.powf(t.alpha) * r.powf(t.alpha)
            }
            Err(_) => 0.0,
        }
    });
    let a = constrained_coefficients(&g.matrix, &pairings)?;
    let mut steps = Vec::with_capacity(k);
    let mut pipeline_holds = true;
    let mut total = 0.0;
    for (i, &lambda) in lambdas.iter().enumerate() {
        let parts: Vec<_> = subspace.iter().enumerate().map(|(b, u)| (u, a[(b, i)])).collect();
        let v = HarmonicExpansion::linear_combination(cone, &parts)?;
        let rayleigh = section_dirichlet(&v, r)? / section_l2(&v, r)?;
        let half_r_derivative = 0.5 * r * energy_derivative(&v, &v, r)?;
        pipeline_holds &= rayleigh >= lambda * (1.0 - REL_SLACK);
        pipeline_holds &= half_r_derivative >= lambda.sqrt() * (1.0 - REL_SLACK);
        total += half_r_derivative;
        steps.push(PipelineStep {
            lambda,
            rayleigh,
            half_r_derivative,
        });
    }
    pipeline_holds &= (total - rhs).abs() <= 1e-8 * rhs.abs();
    Ok(EigensumCheck {
        lhs,
        rhs,
        holds,
        steps,
        pipeline_holds,
    })
}
