//! Property-based invariants over randomized shapes and entries.

use antimap::channels::{apply_choi, choi_from_kraus, kraus_from_choi, KrausSet};
use antimap::linalg::{
    dket, herm_eig, kron, matrix_exp, partial_trace, Matrix, TraceSide,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_entry() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}


fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=5, 1usize..=5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dket_round_trips((d1, d2) in dims(), raw in prop::collection::vec(complex_entry(), 25)) {
        let a = Matrix::new(d1, d2, raw[..d1 * d2].to_vec()).expect("sized to fit");
        let vector = dket(&a);
        prop_assert_eq!(vector.to_operator(), a);
    }

    #[test]
    fn dket_intertwines((da, db) in dims(), seed in any::<u64>()) {
        let mut rng = antimap::linalg::seeded_rng(seed);
        let a = antimap::linalg::haar_random_unitary(da, &mut rng);
        let b = Matrix::from_fn(da, db, |i, j| Complex64::new((i + 1) as f64, j as f64));
        let c = antimap::linalg::haar_random_unitary(db, &mut rng);
        let lhs = kron(&a, &c).matvec(&dket(&b).to_column());
        let rhs = dket(&a.mul(&b).mul(&c.transpose())).to_column();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-11);
    }

    #[test]
    fn partial_trace_preserves_trace((d1, d2) in dims(), raw in prop::collection::vec(complex_entry(), 625)) {
        let dim = d1 * d2;
        let m = Matrix::new(dim, dim, raw[..dim * dim].to_vec()).expect("sized to fit");
        for side in [TraceSide::First, TraceSide::Second] {
            let reduced = partial_trace(&m, d1, d2, side).expect("consistent dims");
            prop_assert!((reduced.trace() - m.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn kron_entry_formula((d1, d2) in dims(), sa in any::<u64>(), sb in any::<u64>()) {
        let mut ra = antimap::linalg::seeded_rng(sa);
        let mut rb = antimap::linalg::seeded_rng(sb);
        let a = antimap::linalg::haar_random_unitary(d1, &mut ra);
        let b = antimap::linalg::haar_random_unitary(d2, &mut rb);
        let k = kron(&a, &b);
        prop_assert_eq!(k.rows(), d1 * d2);
        for i in 0..d1 {
            for j in 0..d1 {
                for p in 0..d2 {
                    for q in 0..d2 {
                        let expected = a.get(i, j) * b.get(p, q);
                        prop_assert!((k.get(i * d2 + p, j * d2 + q) - expected).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn herm_eig_reconstructs(n in 2usize..=8, raw in prop::collection::vec(complex_entry(), 64)) {
        let g = Matrix::new(n, n, raw[..n * n].to_vec()).expect("sized to fit");
        let h = g.add(&g.adjoint()).scale_real(0.5);
        let spectrum = herm_eig(&h).expect("hermitian by construction");
        prop_assert!(spectrum.reconstruct().diff_norm(&h) <= 1e-10 * h.frobenius_norm().max(1.0));
        let mut previous = f64::INFINITY;
        for &lambda in spectrum.eigenvalues() {
            prop_assert!(lambda <= previous + 1e-12);
            previous = lambda;
        }
    }

    #[test]
    fn matrix_exp_inverts(n in 2usize..=6, raw in prop::collection::vec(complex_entry(), 36)) {
        let g = Matrix::new(n, n, raw[..n * n].to_vec()).expect("sized to fit");
        let anti = g.sub(&g.adjoint()).scale_real(0.5);
        let forward = matrix_exp(&anti);
        let backward = matrix_exp(&anti.scale_real(-1.0));
        prop_assert!(forward.mul(&backward).diff_norm(&Matrix::identity(n)) < 1e-11);
    }

    #[test]
    fn choi_kraus_round_trip(d in 2usize..=4, seed in any::<u64>()) {
        // random CP map from a handful of Gaussian Kraus operators
        let mut rng = antimap::linalg::seeded_rng(seed);
        let ops: Vec<Matrix> = (0..3)
            .map(|_| antimap::linalg::haar_random_unitary(d, &mut rng).scale_real(0.5))
            .collect();
        let kraus = KrausSet::new(ops).expect("nonempty");
        let choi = choi_from_kraus(&kraus);
        let recovered = kraus_from_choi(&choi).expect("CP by construction");
        let rebuilt = choi_from_kraus(&recovered);
        prop_assert!(rebuilt.matrix().diff_norm(choi.matrix()) < 1e-10);
        // actions agree on a random state
        let rho = antimap::linalg::haar_random_state_with(d, &mut rng);
        let a = apply_choi(&choi, &rho).expect("valid state");
        let b = recovered.apply(&rho).expect("valid state");
        prop_assert!(a.max_abs_diff(&b) < 1e-11);
    }
}
