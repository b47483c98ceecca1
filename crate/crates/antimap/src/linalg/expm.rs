//! Matrix exponential by scaling-and-squaring with a Taylor core.
//!
//! The scaled argument satisfies `||T|| <= 1/4`, where the truncated series
//! converges far below f64 precision; the result is then squared back up.

use num_complex::Complex64;

use super::Matrix;

const THETA: f64 = 0.25;
const MAX_TERMS: usize = 40;

/// `exp(m)` for a square matrix.
pub fn matrix_exp(m: &Matrix) -> Matrix {
    assert!(m.is_square(), "matrix_exp: non-square input");
    let n = m.rows();
    let norm = m.frobenius_norm();
    let squarings = if norm <= THETA {
        0
    } else {
        (norm / THETA).log2().ceil() as u32
    };
    let t = m.scale_real(0.5f64.powi(squarings as i32));

    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=MAX_TERMS {
        term = term.mul(&t).scale(Complex64::new(1.0 / k as f64, 0.0));
        sum.add_assign(&term);
        if term.frobenius_norm() <= 1e-20 * sum.frobenius_norm().max(1.0) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cr, seeded_rng};

    /// Independent oracle: raw Taylor series at high order, no scaling.
    fn taylor_oracle(m: &Matrix, terms: usize) -> Matrix {
        let n = m.rows();
        let mut sum = Matrix::identity(n);
        let mut term = Matrix::identity(n);
        for k in 1..=terms {
            term = term.mul(m).scale_real(1.0 / k as f64);
            sum.add_assign(&term);
        }
        sum
    }

    fn random_anti_hermitian(n: usize, seed: u64) -> Matrix {
        let mut rng = seeded_rng(seed);
        let g = crate::linalg::random::ginibre(n, n, &mut rng);
        g.sub(&g.adjoint()).scale_real(0.5)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(matrix_exp(&Matrix::zeros(3, 3)), Matrix::identity(3));
    }

    #[test]
    fn exp_of_diagonal_phase() {
        let theta = 0.7;
        let m = Matrix::diag(&[c(0.0, theta), c(0.0, -theta)]);
        let e = matrix_exp(&m);
        assert!((e.get(0, 0) - c(theta.cos(), theta.sin())).norm() < 1e-14);
        assert!((e.get(1, 1) - c(theta.cos(), -theta.sin())).norm() < 1e-14);
        assert!(e.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn matches_high_order_taylor_oracle() {
        let m = random_anti_hermitian(4, 17);
        let expected = taylor_oracle(&m, 60);
        assert!(matrix_exp(&m).max_abs_diff(&expected) <= 1e-10);
    }

    #[test]
    fn anti_hermitian_exponential_is_unitary() {
        for seed in 0..4u64 {
            let raw = random_anti_hermitian(6, 70 + seed);
            // rescale to push the Frobenius norm up to 10
            let m = raw.scale_real(10.0 / raw.frobenius_norm());
            let e = matrix_exp(&m);
            let gram = e.mul(&e.adjoint());
            assert!(gram.diff_norm(&Matrix::identity(6)) <= 1e-9);
        }
    }

    #[test]
    fn scalar_case_matches_exp() {
        let m = Matrix::new(1, 1, vec![cr(1.25)]).unwrap();
        assert!((matrix_exp(&m).get(0, 0).re - 1.25f64.exp()).abs() < 1e-12);
    }
}
