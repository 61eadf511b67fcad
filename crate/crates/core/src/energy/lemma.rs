use nalgebra::{DMatrix, DVector};

use super::gram::Equilibrated;
use crate::error::{Error, Result};

/// Coefficients `A` (k×k) of vectors `v_i = Σ_a A_{ai} b_a` that are orthonormal
/// for the inner product with Gram matrix `gram` and satisfy
/// `Φ(v_i, w_j) = 0` for `j < i`, where `pairings[(a, j)] = Φ(b_a, w_j)`.
///
/// Vectors are extracted in descending order: `v_k` is annihilated by every
/// constraint, then `v_{k-1}` by `w_1..w_{k-2}` inside the complement of `v_k`,
/// and so on.
pub fn constrained_coefficients(gram: &DMatrix<f64>, pairings: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = gram.nrows();
    if k == 0 {
        return Err(Error::Dimension("basis must be nonempty".into()));
    }
    if pairings.nrows() != k || pairings.ncols() + 1 != k {
        return Err(Error::Dimension(format!(
            "pairings must be {k}x{}, got {}x{}",
            k - 1,
            pairings.nrows(),
            pairings.ncols()
        )));
    }
    let factor = Equilibrated::factor(gram).map_err(|e| match e {
        Error::SingularGram { condition } => Error::Dimension(format!(
            "basis is numerically rank-deficient (condition {condition:e})"
        )),
        other => other,
    })?;
    // coordinates in an orthonormal basis q = b M
    let m = factor.whitening();
    let p = m.transpose() * pairings;

    let mut chosen: Vec<DVector<f64>> = vec![DVector::zeros(k); k];
    for i in (0..k).rev() {
        let mut c = DMatrix::zeros(k, k);
        let mut row = 0;
        for j in 0..i {
            c.set_row(row, &p.column(j).transpose());
            row += 1;
        }
        for a in chosen.iter().skip(i + 1) {
            c.set_row(row, &a.transpose());
            row += 1;
        }
        for mut r in c.row_iter_mut() {
            let norm = r.norm();
            if norm > 0.0 {
                r /= norm;
            }
        }
        let svd = c.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        // k-1 constraints padded with a zero row: the smallest singular vector
        // spans (part of) the annihilator
        let (idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let a = v_t.row(idx).transpose();
        chosen[i] = a.normalize();
    }
    let mut out = DMatrix::zeros(k, k);
    for (i, a) in chosen.iter().enumerate() {
        out.set_column(i, &(&m * a));
    }
    Ok(out)
}

/// Orthonormal basis `{v_i}` of `span(basis)` for the inner product `l` with
/// `phi(v_i, w_j) = 0` for all `1 ≤ j < i ≤ k`.
pub fn constrained_orthonormalize(
    basis: &[DVector<f64>],
    l: &DMatrix<f64>,
    phi: &DMatrix<f64>,
    w: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>> {
    let k = basis.len();
    if k == 0 {
        return Err(Error::Dimension("basis must be nonempty".into()));
    }
    let dim = basis[0].len();
    if w.len() + 1 != k {
        return Err(Error::Dimension(format!("expected {} constraint vectors, got {}", k - 1, w.len())));
    }
    let square = |m: &DMatrix<f64>| m.nrows() == dim && m.ncols() == dim;
    if basis.iter().chain(w).any(|v| v.len() != dim) || !square(l) || !square(phi) {
        return Err(Error::Dimension(format!("all vectors and forms must have dimension {dim}")));
    }
    let b = DMatrix::from_columns(basis);
    let gram = b.transpose() * l * &b;
    let gram = (&gram + gram.transpose()) * 0.5;
    let pairings = if k > 1 {
        b.transpose() * phi * DMatrix::from_columns(w)
    } else {
        DMatrix::zeros(1, 0)
    };
    let a = constrained_coefficients(&gram, &pairings)?;
    let mut v: Vec<DVector<f64>> = (0..k).map(|i| &b * a.column(i)).collect();
    // one reverse Gram-Schmidt sweep against `l` itself removes the rounding
    // inherited from the basis Gram matrix; v_i only mixes in v_j with j > i,
    // which keeps the annihilation constraints
    for i in (0..k).rev() {
        for j in i + 1..k {
            let c = v[j].dot(&(l * &v[i]));
            let vj = v[j].clone();
            v[i].axpy(-c, &vj, 1.0);
        }
        let nrm = v[i].dot(&(l * &v[i])).sqrt();
        v[i] /= nrm;
    }
    Ok(v)
}
