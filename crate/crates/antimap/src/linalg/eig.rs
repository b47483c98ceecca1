//! Hermitian eigendecomposition via cyclic complex Jacobi rotations.
//!
//! Every matrix this crate diagonalizes is small (Choi operators up to
//! 36x36, truncated Fock operators up to the cutoff), where Jacobi is
//! fully deterministic and accurate to a few ulps.


use super::{cr, Matrix};
use crate::{Error, Result, DEFAULT_TOL};

/// Eigenvalues (descending) and orthonormal eigenvector columns of a
/// Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl HermitianSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary matrix whose k-th column is the k-th eigenvector.
    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    /// The k-th eigenvector as a column.
    pub fn eigenvector(&self, k: usize) -> Matrix {
        Matrix::from_fn(self.eigenvectors.rows(), 1, |i, _| self.eigenvectors.get(i, k))
    }

    /// `V diag(lambda) V^dag`.
    pub fn reconstruct(&self) -> Matrix {
        let lambda = Matrix::diag_real(&self.eigenvalues);
        let v = &self.eigenvectors;
        v.mul(&lambda).mul(&v.adjoint())
    }
}

/// Hermitian eigendecomposition with the default Hermiticity tolerance.
pub fn herm_eig(m: &Matrix) -> Result<HermitianSpectrum> {
    herm_eig_with_tol(m, DEFAULT_TOL)
}

/// Hermitian eigendecomposition; rejects inputs whose Hermiticity residual
/// exceeds `tol * max(1, ||m||_F)`.
pub fn herm_eig_with_tol(m: &Matrix, tol: f64) -> Result<HermitianSpectrum> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition expects a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let residual = m.hermiticity_residual();
    if residual > tol * m.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(HermitianSpectrum { eigenvalues: vec![], eigenvectors: Matrix::zeros(0, 0) });
    }

    // Work on the Hermitian average to wash out representation noise.
    let mut a = m.add(&m.adjoint()).scale_real(0.5);
    let mut v = Matrix::identity(n);
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Ok(HermitianSpectrum { eigenvalues: vec![0.0; n], eigenvectors: v });
    }
    let off_tol = 1e-15 * norm;

    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a.get(p, q).norm_sqr();
                }
            }
        }
        if off.sqrt() <= off_tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r; // e^{i phi}
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] embedded at (p, q):
                // A <- G^dag A G, V <- V G. The phase factor maps the pivot to a
                // real number; (c, s) is a standard real Jacobi rotation on it.
                let g00 = cr(c);
                let g01 = cr(s);
                let g10 = -phase.conj() * s;
                let g11 = phase.conj() * c;
                // column update on A and V
                for x in 0..n {
                    let axp = a.get(x, p);
                    let axq = a.get(x, q);
                    a.set(x, p, axp * g00 + axq * g10);
                    a.set(x, q, axp * g01 + axq * g11);
                    let vxp = v.get(x, p);
                    let vxq = v.get(x, q);
                    v.set(x, p, vxp * g00 + vxq * g10);
                    v.set(x, q, vxp * g01 + vxq * g11);
                }
                // row update on A with G^dag
                for y in 0..n {
                    let apy = a.get(p, y);
                    let aqy = a.get(q, y);
                    a.set(p, y, g00.conj() * apy + g10.conj() * aqy);
                    a.set(q, y, g01.conj() * apy + g11.conj() * aqy);
                }
            }
        }
    }

    // Sort descending, keeping a deterministic order for ties.
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap().then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = Matrix::from_fn(n, n, |i, k| v.get(i, order[k]));
    Ok(HermitianSpectrum { eigenvalues, eigenvectors })
}
