//! Seeded sampling of Haar-random states and unitaries.
//!
//! All randomness flows through `ChaCha8Rng` so that results are identical
//! across platforms and thread counts. Monte Carlo loops derive one stream
//! per sample index via [`stream_rng`], which keeps parallel evaluation
//! order-independent.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{cr, outer, Matrix};

/// Deterministic RNG for a seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic RNG for `(seed, sample_index)`; distinct indices give
/// independent streams of the same seeded generator.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Matrix of iid standard complex Gaussians.
pub(crate) fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary: QR of a complex Gaussian matrix by modified
/// Gram-Schmidt. Normalizing each column against a positive-real diagonal of
/// R is exactly the phase correction that makes the factor Haar distributed.
pub fn haar_random_unitary(d: usize, rng: &mut impl Rng) -> Matrix {
    let g = ginibre(d, d, rng);
    let mut cols: Vec<Vec<Complex64>> = (0..d)
        .map(|j| (0..d).map(|i| g.get(i, j)).collect())
        .collect();
    for j in 0..d {
        let (settled, rest) = cols.split_at_mut(j);
        let current = &mut rest[0];
        // two orthogonalization passes keep the loss of orthogonality at ulp level
        for _ in 0..2 {
            for previous in settled.iter() {
                let proj: Complex64 =
                    previous.iter().zip(current.iter()).map(|(p, c)| p.conj() * c).sum();
                for (c, p) in current.iter_mut().zip(previous) {
                    *c -= proj * p;
                }
            }
        }
        let norm: f64 = current.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in current.iter_mut() {
            *z /= norm;
        }
    }
    Matrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Haar-random pure state as a normalized column vector.
pub fn haar_random_ket(d: usize, rng: &mut impl Rng) -> Matrix {
    if d == 1 {
        // the only normalized state up to global phase
        return Matrix::identity(1);
    }
    let g = ginibre(d, 1, rng);
    let norm = g.frobenius_norm();
    g.scale(cr(1.0 / norm))
}

/// Haar-random rank-1 density matrix from an explicit seed.
pub fn haar_random_state(d: usize, rng_seed: u64) -> Matrix {
    let mut rng = seeded_rng(rng_seed);
    haar_random_state_with(d, &mut rng)
}

/// Haar-random rank-1 density matrix drawing from a caller-owned RNG.
pub fn haar_random_state_with(d: usize, rng: &mut impl Rng) -> Matrix {
    let ket = haar_random_ket(d, rng);
    outer(&ket, &ket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::trace_product;

    #[test]
    fn one_dimensional_state_is_the_scalar_one() {
        let rho = haar_random_state(1, 3);
        assert!((rho.get(0, 0) - cr(1.0)).norm() < 1e-15);
    }

    #[test]
    fn states_are_pure_and_normalized() {
        for seed in 0..20u64 {
            let rho = haar_random_state(4, seed);
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
            assert!(rho.hermiticity_residual() < 1e-13);
            let purity = trace_product(&rho, &rho).re;
            assert!((purity - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn first_moment_is_maximally_mixed() {
        let d = 2;
        let samples = 4000;
        let mut mean = Matrix::zeros(d, d);
        for i in 0..samples {
            mean.add_assign(&haar_random_state_with(d, &mut stream_rng(99, i)));
        }
        mean = mean.scale_real(1.0 / samples as f64);
        let target = Matrix::identity(d).scale_real(1.0 / d as f64);
        assert!(mean.max_abs_diff(&target) < 0.05);
    }

    #[test]
    fn distribution_invariant_under_fixed_unitary() {
        // statistical check: conjugating every sample by a fixed unitary
        // leaves the first moment unchanged within sampling error
        let d = 3;
        let samples = 3000;
        let mut rng = seeded_rng(5);
        let u = haar_random_unitary(d, &mut rng);
        let mut mean = Matrix::zeros(d, d);
        let mut mean_conj = Matrix::zeros(d, d);
        for i in 0..samples {
            let rho = haar_random_state_with(d, &mut stream_rng(7, i));
            mean.add_assign(&rho);
            mean_conj.add_assign(&rho.conjugate_by(&u));
        }
        mean = mean.scale_real(1.0 / samples as f64);
        mean_conj = mean_conj.scale_real(1.0 / samples as f64);
        assert!(mean.max_abs_diff(&mean_conj) < 0.08);
    }

    #[test]
    fn unitaries_are_unitary() {
        let mut rng = seeded_rng(11);
        for d in [2usize, 3, 5, 8] {
            let u = haar_random_unitary(d, &mut rng);
            let gram = u.adjoint().mul(&u);
            assert!(gram.max_abs_diff(&Matrix::identity(d)) < 1e-13);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = haar_random_state_with(3, &mut stream_rng(42, 0));
        let b = haar_random_state_with(3, &mut stream_rng(42, 0));
        let c = haar_random_state_with(3, &mut stream_rng(42, 1));
        assert_eq!(a, b);
        assert!(a.max_abs_diff(&c) > 1e-3);
    }
}
