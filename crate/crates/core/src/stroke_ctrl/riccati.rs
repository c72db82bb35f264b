//! Continuous algebraic Riccati equation
//! `AᵀP + PA − P B R⁻¹ Bᵀ P + Q = 0`, solved with the eigenvector method on
//! the Hamiltonian matrix.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RiccatiError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("R is not invertible")]
    SingularR,
    #[error("Hamiltonian has {stable} stable eigenvalues, expected {expected} (pair not stabilizable/detectable)")]
    NoStableSplit { stable: usize, expected: usize },
    #[error("stable invariant subspace basis is singular")]
    SingularBasis,
    #[error("solution has a non-negligible imaginary part ({0:e})")]
    ComplexSolution(f64),
}

/// Stabilising solution `P` of the CARE.
pub fn solve_care(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>, RiccatiError> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || q.shape() != (n, n) || r.shape() != (b.ncols(), b.ncols()) {
        return Err(RiccatiError::Dimension(format!(
            "A {:?}, B {:?}, Q {:?}, R {:?}",
            a.shape(),
            b.shape(),
            q.shape(),
            r.shape()
        )));
    }
    let r_inv = r.clone().try_inverse().ok_or(RiccatiError::SingularR)?;
    let g = b * r_inv * b.transpose();

    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-&g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let eigs = h.complex_eigenvalues();
    let stable: Vec<Complex64> = eigs.iter().copied().filter(|l| l.re < 0.0).collect();
    if stable.len() != n {
        return Err(RiccatiError::NoStableSplit { stable: stable.len(), expected: n });
    }

    let hc: DMatrix<Complex64> = h.map(|v| Complex64::new(v, 0.0));
    let mut basis = DMatrix::<Complex64>::zeros(2 * n, n);
    let mut col = 0;
    let mut done = vec![false; stable.len()];
    for i in 0..stable.len() {
        if done[i] {
            continue;
        }
        // Numerically repeated eigenvalues share one kernel computation.
        let tol = 1e-9 * stable[i].norm().max(1.0);
        let group: Vec<usize> = (i..stable.len())
            .filter(|&j| !done[j] && (stable[j] - stable[i]).norm() <= tol)
            .collect();
        for (v, &j) in kernel_vectors(&hc, stable[i], group.len()).into_iter().zip(&group) {
            basis.set_column(col, &v);
            col += 1;
            done[j] = true;
        }
    }
    let u1 = basis.view((0, 0), (n, n)).into_owned();
    let u2 = basis.view((n, 0), (n, n)).into_owned();
    let u1_inv = u1.try_inverse().ok_or(RiccatiError::SingularBasis)?;
    let pc = u2 * u1_inv;
    let scale = pc.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let imag = pc.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > 1e-8 * scale {
        return Err(RiccatiError::ComplexSolution(imag));
    }
    let p = pc.map(|z| z.re);
    Ok((&p + p.transpose()) * 0.5)
}

/// The `count` right singular vectors of `H − λI` with the smallest
/// singular values (an orthonormal basis of its numerical kernel).
fn kernel_vectors(h: &DMatrix<Complex64>, lambda: Complex64, count: usize) -> Vec<DVector<Complex64>> {
    let n = h.nrows();
    let shifted = h - DMatrix::<Complex64>::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    // Row `k` of Vᴴ is the conjugate of the k-th right singular vector.
    order
        .into_iter()
        .take(count)
        .map(|k| v_t.row(k).transpose().map(|z| z.conj()))
        .collect()
}

/// Frobenius norm of the CARE residual.
pub fn care_residual(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> f64 {
    let r_inv = r.clone().try_inverse().expect("R invertible");
    let res = a.transpose() * p + p * a - p * b * r_inv * b.transpose() * p + q;
    res.norm()
}

/// LQR gain `K = R⁻¹ Bᵀ P` together with `P`.
pub fn lqr(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>), RiccatiError> {
    let p = solve_care(a, b, q, r)?;
    let r_inv = r.clone().try_inverse().ok_or(RiccatiError::SingularR)?;
    Ok((r_inv * b.transpose() * &p, p))
}
