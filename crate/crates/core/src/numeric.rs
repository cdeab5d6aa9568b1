//! Small dense linear-algebra helpers: Hermitian eigenvalues, sum-zero
//! projections and pseudo-inverse projection norms.
//!
//! Inner products are linear in the first argument and conjugate-linear in
//! the second throughout the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C = Complex64;

/// `sum x_i * conj(y_i)`, sequential left-to-right so results are reproducible.
pub fn dot(x: &[C], y: &[C]) -> C {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = C::new(0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        acc += a * b.conj();
    }
    acc
}

/// Largest absolute entry of a matrix.
pub fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Maximum deviation of `m` from its own conjugate transpose.
pub fn hermitian_asymmetry(m: &DMatrix<C>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending.  The matrix is symmetrized
/// as (M + M*)/2 first so that float-level asymmetry cannot leak complex
/// eigenvalues; callers that care about the asymmetry check it beforehand.
pub fn hermitian_eigenvalues(m: &DMatrix<C>) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let mut sym = DMatrix::<C>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            sym[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    let eig = sym.symmetric_eigenvalues();
    let mut vals: Vec<f64> = eig.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &DMatrix<C>) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Validates Hermitian symmetry of a Gram matrix within `tol`, then returns
/// its smallest eigenvalue.
pub fn checked_min_eigenvalue(m: &DMatrix<C>, tol: f64) -> Result<f64> {
    let asym = hermitian_asymmetry(m);
    if asym > tol {
        return Err(Error::NonHermitianGram { asym, tol });
    }
    Ok(min_eigenvalue(m))
}

/// Orthonormal basis of the sum-zero subspace `{lambda : sum lambda_i = 0}`
/// of C^n, as the columns of an n x (n-1) matrix (Helmert construction).
pub fn sum_zero_basis(n: usize) -> DMatrix<C> {
    assert!(n >= 1);
    let mut q = DMatrix::<C>::zeros(n, n.saturating_sub(1));
    for j in 1..n {
        let norm = 1.0 / ((j * (j + 1)) as f64).sqrt();
        for i in 0..j {
            q[(i, j - 1)] = C::new(norm, 0.0);
        }
        q[(j, j - 1)] = C::new(-(j as f64) * norm, 0.0);
    }
    q
}

/// Smallest eigenvalue of the compression of a Hermitian `gram` to the
/// sum-zero subspace.  This is the conditional positivity certificate: a
/// nonnegative value certifies CPD of the kernel on the sample.
pub fn projected_min_eigenvalue(gram: &DMatrix<C>) -> f64 {
    let n = gram.nrows();
    if n < 2 {
        return 0.0;
    }
    let q = sum_zero_basis(n);
    let compressed = q.adjoint() * gram * &q;
    min_eigenvalue(&compressed)
}

/// Squared norm of the orthogonal projection of a vector onto the span of a
/// family, given the family Gram `a_ij = <v_i, v_j>` and the coefficient
/// vector `b_i = <w, v_i>`.  Uses a spectral pseudo-inverse with relative
/// cutoff `cutoff * lambda_max`.
pub fn projection_norm_sq(a: &DMatrix<C>, b: &DVector<C>, cutoff: f64) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut sym = DMatrix::<C>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            sym[(i, j)] = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
        }
    }
    let eig = sym.symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(*v));
    if lam_max <= 0.0 {
        return 0.0;
    }
    let thresh = cutoff * lam_max;
    // ||P w||^2 = b^* A^+ b for the Gram pseudo-inverse A^+.
    let mut total = 0.0;
    for (k, lam) in eig.eigenvalues.iter().enumerate() {
        if *lam > thresh {
            let col = eig.eigenvectors.column(k);
            let mut coeff = C::new(0.0, 0.0);
            for i in 0..n {
                coeff += col[i].conj() * b[i];
            }
            total += coeff.norm_sqr() / lam;
        }
    }
    total
}

/// Rank of a Hermitian PSD matrix at relative threshold `cutoff * lambda_max`.
pub fn psd_rank(m: &DMatrix<C>, cutoff: f64) -> usize {
    let vals = hermitian_eigenvalues(m);
    let lam_max = vals.iter().fold(0.0_f64, |a, &v| a.max(v));
    if lam_max <= 0.0 {
        return 0;
    }
    vals.iter().filter(|&&v| v > cutoff * lam_max).count()
}
