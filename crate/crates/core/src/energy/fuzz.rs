use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eigensum_inequality_check, HarmonicExpansion};
use crate::cone::ConeGeometry;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct FuzzConfig {
    pub trials: usize,
    pub seed: u64,
    /// Fixed subspace dimension; random in `1..=max_k` when absent.
    pub dim: Option<usize>,
    pub max_k: usize,
    /// Radii are drawn log-uniformly from this range.
    pub r_range: (f64, f64),
    /// Support slots are limited to exponents `α ≤ max_alpha`.
    pub max_alpha: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            trials: 200,
            seed: 0x5eed,
            dim: None,
            max_k: 6,
            r_range: (1e-3, 1e3),
            max_alpha: 40.0,
        }
    }
}

/// One JSON line of a fuzzing campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzRecord {
    pub seed: u64,
    pub k: usize,
    pub n: usize,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

/// A random `k`-dimensional subspace whose energy Gram matrix at radius `r` is
/// `GᵀG` for a Gaussian `G`: coefficients are rescaled by `1/√(α r^{2α+n-2})`.
pub fn random_subspace<'a, R: Rng>(
    cone: &'a ConeGeometry,
    k: usize,
    r: f64,
    max_slot: u64,
    rng: &mut R,
) -> Result<Vec<HarmonicExpansion<'a>>> {
    let max_slot = max_slot as usize;
    if k == 0 || max_slot < k {
        return Err(Error::Dimension(format!(
            "cannot draw a {k}-dimensional subspace from {max_slot} slots"
        )));
    }
    // half the draws concentrate on the lowest modes, where the inequality is tight
    let pool = if rng.random_bool(0.5) {
        max_slot.min(2 * k + 2)
    } else {
        max_slot
    };
    let width = rng.random_range(k..=pool.min(k + 4));
    let slots: Vec<u64> = sample(rng, pool, width)
        .into_iter()
        .map(|s| s as u64 + 1)
        .collect();
    let n = cone.n() as f64;
    let scales: Vec<f64> = slots
        .iter()
        .map(|&s| {
            let (_, alpha) = cone.exponent_of_slot(s).expect("slot within spectrum");
            1.0 / (alpha.sqrt() * r.powf(alpha + n / 2.0 - 1.0))
        })
        .collect();
    (0..k)
        .map(|_| {
            let pairs: Vec<_> = slots
                .iter()
                .zip(&scales)
                .map(|(&s, &w)| {
                    let g: f64 = rng.sample(StandardNormal);
                    (s, g * w)
                })
                .collect();
            HarmonicExpansion::new(cone, &pairs)
        })
        .collect()
}

fn slots_below(cone: &ConeGeometry, max_alpha: f64) -> u64 {
    let s = cone.cross_section();
    let n = cone.n() as f64;
    let bound = max_alpha * (max_alpha + n - 2.0);
    let mut count = 0;
    for i in 1..s.slot_count() {
        if s.slot(i).expect("in range").to_f64() > bound {
            break;
        }
        count = i;
    }
    count
}

/// Runs independent seeded trials of the eigenvalue-sum check; trial `t` uses
/// seed `config.seed + t` so results do not depend on scheduling.
pub fn eigensum_campaign(cone: &ConeGeometry, config: &FuzzConfig) -> Result<Vec<FuzzRecord>> {
    let (lo, hi) = config.r_range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::domain(format!("invalid radius range [{lo}, {hi}]")));
    }
    let max_slot = slots_below(cone, config.max_alpha);
    let max_k = config.dim.unwrap_or(config.max_k);
    if max_k == 0 || max_slot < max_k as u64 + 1 {
        return Err(Error::Coverage {
            needed: config.max_alpha * (config.max_alpha + cone.n() as f64 - 2.0),
            available: cone.cross_section().lambda_max(),
        });
    }
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = config.seed.wrapping_add(t as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = config.dim.unwrap_or_else(|| rng.random_range(1..=config.max_k));
            let r = (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp();
            let basis = random_subspace(cone, k, r, max_slot, &mut rng)?;
            let chk = eigensum_inequality_check(cone, &basis, r)?;
            Ok(FuzzRecord {
                seed,
                k,
                n: cone.n(),
                r,
                lhs: chk.lhs,
                rhs: chk.rhs,
                margin: chk.rhs - chk.lhs,
                holds: chk.holds && chk.pipeline_holds,
            })
        })
        .collect()
}

pub fn write_json_lines<W: Write>(records: &[FuzzRecord], mut out: W) -> Result<()> {
    for rec in records {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
