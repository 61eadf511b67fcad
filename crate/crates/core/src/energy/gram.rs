use nalgebra::{DMatrix, DVector};

use super::{energy, energy_derivative, HarmonicExpansion};
use crate::error::{Error, Result};

/// Largest accepted condition number of an equilibrated Gram matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// Energy Gram matrix `Ẽ_r(u_a, u_b)` of a basis.
#[derive(Clone, Debug)]
pub struct GramForm<'a> {
    pub basis: Vec<HarmonicExpansion<'a>>,
    pub radius: f64,
    pub matrix: DMatrix<f64>,
}

impl GramForm<'_> {
    pub fn log_det(&self) -> Result<f64> {
        Ok(Equilibrated::factor(&self.matrix)?.log_det)
    }

    /// Condition number of the diagonally equilibrated matrix.
    pub fn condition(&self) -> f64 {
        match Equilibrated::factor(&self.matrix) {
            Ok(f) => f.condition,
            Err(Error::SingularGram { condition }) => condition,
            Err(_) => f64::INFINITY,
        }
    }
}

/// Cholesky factor of `D G D` with `D = diag(G_aa)^{-1/2}`.
pub(crate) struct Equilibrated {
    pub inv_sqrt_diag: DVector<f64>,
    pub lower: DMatrix<f64>,
    pub log_det: f64,
    pub condition: f64,
}

impl Equilibrated {
    pub(crate) fn factor(g: &DMatrix<f64>) -> Result<Self> {
        let k = g.nrows();
        if k == 0 || g.ncols() != k {
            return Err(Error::Dimension(format!(
                "gram matrix must be square and nonempty, got {}x{}",
                g.nrows(),
                g.ncols()
            )));
        }
        let singular = |condition| Error::SingularGram { condition };
        let diag = g.diagonal();
        if diag.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(singular(f64::INFINITY));
        }
        let inv_sqrt_diag = diag.map(|x| 1.0 / x.sqrt());
        let mut s = DMatrix::from_fn(k, k, |a, b| g[(a, b)] * inv_sqrt_diag[a] * inv_sqrt_diag[b]);
        s = (&s + s.transpose()) * 0.5;
        let eig = s.clone().symmetric_eigenvalues();
        let lo = eig.min();
        let hi = eig.max();
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(singular(condition));
        }
        let chol = s.cholesky().ok_or_else(|| singular(condition))?;
        let lower = chol.l();
        let log_det = diag.iter().map(|x| x.ln()).sum::<f64>()
            + 2.0 * lower.diagonal().iter().map(|x| x.ln()).sum::<f64>();
        Ok(Equilibrated {
            inv_sqrt_diag,
            lower,
            log_det,
            condition,
        })
    }

    /// `M` with `Mᵀ G M = I`, namely `D L^{-T}`.
    pub(crate) fn whitening(&self) -> DMatrix<f64> {
        let k = self.lower.nrows();
        let lt_inv = self
            .lower
            .transpose()
            .solve_upper_triangular(&DMatrix::identity(k, k))
            .expect("cholesky factor has a positive diagonal");
        DMatrix::from_fn(k, k, |a, b| self.inv_sqrt_diag[a] * lt_inv[(a, b)])
    }
}

fn pairwise(
    basis: &[HarmonicExpansion<'_>],
    r: f64,
    f: impl Fn(&HarmonicExpansion<'_>, &HarmonicExpansion<'_>, f64) -> Result<f64>,
) -> Result<DMatrix<f64>> {
    if basis.is_empty() {
        return Err(Error::Dimension("basis must be nonempty".into()));
    }
    let k = basis.len();
    let mut m = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let x = f(&basis[a], &basis[b], r)?;
            m[(a, b)] = x;
            m[(b, a)] = x;
        }
    }
    Ok(m)
}

pub fn gram<'a>(basis: &[HarmonicExpansion<'a>], r: f64) -> Result<GramForm<'a>> {
    let matrix = pairwise(basis, r, energy)?;
    Ok(GramForm {
        basis: basis.to_vec(),
        radius: r,
        matrix,
    })
}

/// Entrywise radial derivative of the Gram matrix.
pub fn gram_derivative(basis: &[HarmonicExpansion<'_>], r: f64) -> Result<DMatrix<f64>> {
    pairwise(basis, r, energy_derivative)
}

/// `ln det G(t) - ln det G(s)`.
pub fn log_det_ratio(basis: &[HarmonicExpansion<'_>], s: f64, t: f64) -> Result<f64> {
    let ls = gram(basis, s)?.log_det()?;
    let lt = gram(basis, t)?.log_det()?;
    Ok(lt - ls)
}

/// An `Ẽ_r`-orthonormal basis of the span of `basis`.
pub fn orthonormal_basis<'a>(
    basis: &[HarmonicExpansion<'a>],
    r: f64,
) -> Result<Vec<HarmonicExpansion<'a>>> {
    let g = gram(basis, r)?;
    let m = Equilibrated::factor(&g.matrix)?.whitening();
    let cone = basis[0].cone();
    (0..basis.len())
        .map(|i| {
            let parts: Vec<_> = basis.iter().enumerate().map(|(a, u)| (u, m[(a, i)])).collect();
            HarmonicExpansion::linear_combination(cone, &parts)
        })
        .collect()
}

/// `d/ds ln det G(s)` at `s = r`, as `Σ_i Ẽ'_r(v_i, v_i)` over an `Ẽ_r`-orthonormal basis.
pub fn log_det_derivative(basis: &[HarmonicExpansion<'_>], r: f64) -> Result<f64> {
    let v = orthonormal_basis(basis, r)?;
    v.iter().map(|u| energy_derivative(u, u, r)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ConeGeometry;
    use crate::spectra::{circle_spectrum, sphere_spectrum};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn plane() -> ConeGeometry {
        ConeGeometry::new(circle_spectrum(TAU, 400.0).unwrap()).unwrap()
    }

    fn random_basis<'a>(c: &'a ConeGeometry, k: usize, support: u64, rng: &mut ChaCha8Rng) -> Vec<HarmonicExpansion<'a>> {
        (0..k)
            .map(|_| {
                let pairs: Vec<_> = (1..=support).map(|s| (s, rng.random_range(-1.0..1.0))).collect();
                HarmonicExpansion::new(c, &pairs).unwrap()
            })
            .collect()
    }

    #[test]
    fn orthonormal_basis_gives_identity() {
        let c = plane();
        let basis: Vec<_> = (1..=3)
            .map(|s| HarmonicExpansion::new(&c, &[(s, 1.0 / (c.exponent_of_slot(s).unwrap().1).sqrt())]).unwrap())
            .collect();
        let g = gram(&basis, 1.0).unwrap();
        assert!((g.matrix.clone() - DMatrix::identity(3, 3)).norm() < 1e-14);
        assert!(g.log_det().unwrap().abs() < 1e-14);
    }

    #[test]
    fn two_by_two_shared_slot() {
        let c = plane();
        // slot 1: α = 1; slot 3: α = 2; n = 2 so Ẽ_r = Σ c c̄ α r^{2α}
        let u = HarmonicExpansion::new(&c, &[(1, 1.0), (3, 1.0)]).unwrap();
        let v = HarmonicExpansion::new(&c, &[(3, 2.0)]).unwrap();
        let g = gram(&[u, v], 2.0).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[4.0 + 32.0, 64.0, 64.0, 128.0]);
        assert!((g.matrix - want).norm() < 1e-12);
    }

    #[test]
    fn one_dimensional_log_det() {
        let c = ConeGeometry::new(sphere_spectrum(3, 1.0, 100.0).unwrap()).unwrap();
        let u = HarmonicExpansion::new(&c, &[(7, 0.3)]).unwrap();
        let (_, alpha) = c.exponent_of_slot(7).unwrap();
        let (s, t) = (0.7, 2.3);
        let got = log_det_ratio(std::slice::from_ref(&u), s, t).unwrap();
        let want = (2.0 * alpha + 2.0) * (t / s).ln();
        assert!((got - want).abs() < 1e-12);
        assert_eq!(log_det_ratio(std::slice::from_ref(&u), s, s).unwrap(), 0.0);
        // plane, α = 1: d/ds ln s² = 2/s
        let p = plane();
        let w = HarmonicExpansion::new(&p, &[(1, 1.0)]).unwrap();
        assert!((log_det_derivative(&[w], 1.5).unwrap() - 2.0 / 1.5).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_input_sums_diagonal() {
        let c = plane();
        let basis: Vec<_> = [1u64, 3, 6]
            .iter()
            .map(|&s| HarmonicExpansion::new(&c, &[(s, 1.0 / (c.exponent_of_slot(s).unwrap().1).sqrt())]).unwrap())
            .collect();
        let direct: f64 = basis.iter().map(|u| energy_derivative(u, u, 1.0).unwrap()).sum();
        assert!((log_det_derivative(&basis, 1.0).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn additivity_and_basis_invariance() {
        let c = ConeGeometry::new(sphere_spectrum(2, 1.0, 200.0).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let basis = random_basis(&c, 3, 8, &mut rng);
            let (s, t, w) = (0.6, 1.1, 1.9);
            let a = log_det_ratio(&basis, s, t).unwrap() + log_det_ratio(&basis, t, w).unwrap();
            assert!((a - log_det_ratio(&basis, s, w).unwrap()).abs() < 1e-10);

            let mix = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let other: Vec<_> = (0..3)
                .map(|j| {
                    let parts: Vec<_> = basis.iter().enumerate().map(|(i, u)| (u, mix[(i, j)])).collect();
                    HarmonicExpansion::linear_combination(&c, &parts).unwrap()
                })
                .collect();
            let x = log_det_derivative(&basis, 1.3).unwrap();
            let y = log_det_derivative(&other, 1.3).unwrap();
            assert!((x - y).abs() <= 1e-8 * x.abs());
        }
    }

    #[test]
    fn derivative_matches_trace_and_finite_difference() {
        let c = ConeGeometry::new(sphere_spectrum(2, 1.0, 200.0).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let basis = random_basis(&c, 4, 9, &mut rng);
            let r = 1.2;
            let g = gram(&basis, r).unwrap().matrix;
            let dg = gram_derivative(&basis, r).unwrap();
            let trace = (g.clone().cholesky().unwrap().solve(&dg)).trace();
            let d = log_det_derivative(&basis, r).unwrap();
            assert!((d - trace).abs() <= 1e-10 * d.abs());
            let h = 1e-5;
            let fd = log_det_ratio(&basis, r - h, r + h).unwrap() / (2.0 * h);
            assert!((d - fd).abs() <= 1e-6 * d.abs());
        }
    }

    #[test]
    fn dependent_basis_is_singular() {
        let c = plane();
        let u = HarmonicExpansion::new(&c, &[(1, 1.0), (2, 2.0)]).unwrap();
        let v = HarmonicExpansion::linear_combination(&c, &[(&u, 3.0)]).unwrap();
        assert!(matches!(gram(&[u.clone(), v.clone()], 1.0).unwrap().log_det(), Err(Error::SingularGram { .. })));
        assert!(matches!(log_det_derivative(&[u, v], 1.0), Err(Error::SingularGram { .. })));
        let z = HarmonicExpansion::zero(&c);
        assert!(log_det_derivative(&[z], 1.0).is_err());
        assert!(matches!(gram(&[], 1.0), Err(Error::Dimension(_))));
    }
}
