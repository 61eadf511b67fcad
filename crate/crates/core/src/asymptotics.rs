//! Exact power sums through Bernoulli numbers, and convergence read-outs for
//! ratio sequences.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum series length accepted by the estimators.
pub const MIN_SERIES_LEN: usize = 8;

/// Bernoulli numbers `B_0..=B_m` with `B_1 = -1/2`.
pub fn bernoulli_numbers(m: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(m + 1);
    for k in 0..=m {
        if k == 0 {
            b.push(BigRational::one());
            continue;
        }
        // Σ_{j=0}^{k} C(k+1, j) B_j = 0
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * bj;
            binom = binom * BigInt::from(k + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(k + 1)));
    }
    b
}

/// Closed-form evaluator of `Σ_{i=1}^{p} i^{n-1}` as the polynomial
/// `(1/n) Σ_{j=0}^{n-1} (-1)^j C(n, j) B_j p^{n-j}`.
#[derive(Clone, Debug)]
pub struct FaulhaberEval {
    n: usize,
    bernoulli: Vec<BigRational>,
    // numerators over `denom` of the coefficients of p^n, p^{n-1}, ..., p^1
    coeffs: Vec<BigInt>,
    denom: BigInt,
}

impl FaulhaberEval {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("power sum exponent n - 1 needs n >= 1"));
        }
        let bernoulli = bernoulli_numbers(n - 1);
        let nq = BigRational::from_integer(BigInt::from(n));
        let mut binom = BigInt::one();
        let mut rat = Vec::with_capacity(n);
        for (j, bj) in bernoulli.iter().enumerate() {
            let sign = if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            rat.push(BigRational::from_integer(sign * &binom) * bj / &nq);
            binom = binom * BigInt::from(n - j) / BigInt::from(j + 1);
        }
        let denom = rat
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let coeffs = rat
            .iter()
            .map(|c| c.numer() * (&denom / c.denom()))
            .collect();
        Ok(FaulhaberEval {
            n,
            bernoulli,
            coeffs,
            denom,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bernoulli(&self) -> &[BigRational] {
        &self.bernoulli
    }

    pub fn eval(&self, p: u64) -> BigRational {
        let p = BigInt::from(p);
        let mut acc = BigInt::zero();
        for c in &self.coeffs {
            acc = acc * &p + c;
        }
        acc *= &p;
        BigRational::new(acc, self.denom.clone())
    }
}

/// `Σ_{i=1}^{p} i^{n-1}` in exact arithmetic.
pub fn power_sum(p: u64, n: usize) -> Result<BigRational> {
    Ok(FaulhaberEval::new(n)?.eval(p))
}

/// Convergence read-out of a ratio series against its target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub target: f64,
    pub last: f64,
    pub window_min: f64,
    pub window_mean: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// `|value - target|` is nonincreasing over the last half of the series.
    pub monotone: bool,
}

fn validate(series: &[(f64, f64)]) -> Result<()> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::InsufficientData {
            len: series.len(),
            required: MIN_SERIES_LEN,
        });
    }
    if series.iter().any(|(d, v)| !d.is_finite() || !v.is_finite()) {
        return Err(Error::domain("series contains non-finite values"));
    }
    if series.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::domain("series must be strictly increasing in d"));
    }
    Ok(())
}

/// Points with `d ∈ [d_lo, d_max]`.
fn window(series: &[(f64, f64)], d_lo: f64) -> &[(f64, f64)] {
    let start = series.partition_point(|&(d, _)| d < d_lo);
    &series[start..]
}

/// Minimum of the series over `d ∈ [d_lo, d_max]`; `+∞` if no point qualifies.
pub fn window_min(series: &[(f64, f64)], d_lo: f64) -> f64 {
    window(series, d_lo)
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min)
}

fn trailing_lo(series: &[(f64, f64)]) -> f64 {
    series.last().map_or(0.0, |&(d, _)| d / 2.0)
}

pub fn limit_estimate(series: &[(f64, f64)], target: f64) -> Result<Verdict> {
    validate(series)?;
    let lo = trailing_lo(series);
    let win = window(series, lo);
    let last = series[series.len() - 1].1;
    let window_mean = win.iter().map(|&(_, v)| v).sum::<f64>() / win.len() as f64;
    let half = &series[series.len() / 2..];
    let monotone = half
        .windows(2)
        .all(|w| (w[1].1 - target).abs() <= (w[0].1 - target).abs());
    let abs_err = (last - target).abs();
    Ok(Verdict {
        target,
        last,
        window_min: window_min(series, lo),
        window_mean,
        abs_err,
        rel_err: if target == 0.0 { abs_err } else { abs_err / target.abs() },
        monotone,
    })
}

/// Trailing-window minimum over `d ∈ [d_max/2, d_max]`.
pub fn liminf_estimate(series: &[(f64, f64)]) -> Result<f64> {
    validate(series)?;
    Ok(window_min(series, trailing_lo(series)))
}
