use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::DiscreteLaplacian;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Relative residual tolerance of the shift-inverted problem.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Smallest spectral shift `σ` making `K + σM` definite.
    pub shift: f64,
    /// The shift is raised to this fraction of a Gershgorin bound on `λ_max`,
    /// which keeps the rounding floor of the shifted solves below the tolerance.
    pub relative_shift: f64,
    pub seed: u64,
    /// Problems up to this size are solved densely.
    pub dense_cutoff: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tolerance: 1e-10,
            max_iterations: 2000,
            shift: 0.1,
            relative_shift: 1e-4,
            seed: 0x0ac1e,
            dense_cutoff: 200,
        }
    }
}

/// Smallest `count` eigenvalues of `K x = λ M x`, ascending.
pub fn lowest_eigenvalues(lap: &DiscreteLaplacian, count: usize) -> Result<Vec<f64>> {
    lowest_eigenvalues_with(lap, count, &EigenOptions::default())
}

/// [`lowest_eigenvalues`] with explicit solver settings. Small problems are
/// solved densely; larger ones by shift-inverted block subspace iteration with
/// Rayleigh-Ritz projection.
pub fn lowest_eigenvalues_with(
    lap: &DiscreteLaplacian,
    count: usize,
    opts: &EigenOptions,
) -> Result<Vec<f64>> {
    let n = lap.size();
    if count == 0 || count > n {
        return Err(Error::domain(format!("count must lie in 1..={n}, got {count}")));
    }
    if n <= opts.dense_cutoff {
        return Ok(dense(lap)[..count].to_vec());
    }
    subspace_iteration(lap, count, opts)
}

fn dense(lap: &DiscreteLaplacian) -> Vec<f64> {
    let n = lap.size();
    let inv = lap.mass().iter().map(|m| 1.0 / m.sqrt()).collect::<Vec<_>>();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(i, j, w) in lap.edges() {
        a[(i, i)] += w;
        a[(j, j)] += w;
        a[(i, j)] -= w;
        a[(j, i)] -= w;
    }
    let a = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * inv[i] * inv[j]);
    let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn m_dot(mass: &[f64], x: &[f64], y: &[f64]) -> f64 {
    mass.iter().zip(x).zip(y).map(|((m, a), b)| m * a * b).sum()
}

/// Modified Gram-Schmidt on the columns in the mass inner product, applied twice.
fn m_orthonormalize(mass: &[f64], block: &mut DMatrix<f64>) -> bool {
    let p = block.ncols();
    for _ in 0..2 {
        for i in 0..p {
            for k in 0..i {
                let c = m_dot(mass, block.column(k).as_slice(), block.column(i).as_slice());
                let u = block.column(k).clone_owned();
                block.column_mut(i).axpy(-c, &u, 1.0);
            }
            let v = block.column(i);
            let nrm = m_dot(mass, v.as_slice(), v.as_slice()).sqrt();
            if !(nrm > 0.0 && nrm.is_finite()) {
                return false;
            }
            block.column_mut(i).unscale_mut(nrm);
        }
    }
    true
}

fn subspace_iteration(lap: &DiscreteLaplacian, count: usize, opts: &EigenOptions) -> Result<Vec<f64>> {
    let n = lap.size();
    let p = (2 * count).max(count + 8).min(n);
    let mass = lap.mass();

    let mut diag = vec![0.0; n];
    let mut triplets = Vec::with_capacity(lap.edges().len() + n);
    for &(i, j, w) in lap.edges() {
        diag[i] += w;
        diag[j] += w;
        triplets.push(Triplet::new(j, i, -w));
    }
    let gershgorin = diag
        .iter()
        .zip(mass)
        .map(|(d, m)| 2.0 * d / m)
        .fold(0.0, f64::max);
    let s = opts.shift.max(opts.relative_shift * gershgorin);
    diag.iter_mut().zip(mass).for_each(|(d, m)| *d += s * m);
    triplets.extend(diag.iter().enumerate().map(|(i, &d)| Triplet::new(i, i, d)));
    let shifted = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::domain(format!("sparse assembly failed: {e:?}")))?;
    let llt = shifted
        .sp_cholesky(faer::Side::Lower)
        .map_err(|e| Error::domain(format!("shifted stiffness is not definite: {e:?}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
    if !m_orthonormalize(mass, &mut x) {
        return Err(Error::NonConvergence {
            iterations: 0,
            residual: f64::NAN,
        });
    }

    let mut theta: Option<Vec<f64>> = None;
    let mut worst = f64::INFINITY;
    for it in 0..opts.max_iterations {
        // y = (K + sM)^{-1} M x
        let mut rhs = Mat::<f64>::from_fn(n, p, |i, c| mass[i] * x[(i, c)]);
        llt.solve_in_place(rhs.as_mut());
        let mut y = DMatrix::from_fn(n, p, |i, c| rhs[(i, c)]);

        if let Some(th) = &theta {
            // residual of the shift-inverted problem for Ritz pairs from the last step
            worst = (0..count)
                .map(|c| {
                    let r = y.column(c) * (th[c] + s) - x.column(c);
                    m_dot(mass, r.as_slice(), r.as_slice()).sqrt()
                })
                .fold(0.0, f64::max);
            if worst <= opts.tolerance {
                return Ok(th[..count].to_vec());
            }
        }

        if !m_orthonormalize(mass, &mut y) {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: worst,
            });
        }
        // projected stiffness from edge differences
        let d = DMatrix::from_fn(lap.edges().len(), p, |k, c| {
            let (i, j, w) = lap.edges()[k];
            w.sqrt() * (y[(i, c)] - y[(j, c)])
        });
        let a = d.transpose() * &d;
        let eig = SymmetricEigen::new((&a + a.transpose()) * 0.5);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        theta = Some(order.iter().map(|&i| eig.eigenvalues[i]).collect());
        let z = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
        x = &y * z;
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual: worst,
    })
}
