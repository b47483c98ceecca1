//! The `verify` check suite: every machine-precision identity the library
//! promises, evaluated at dimensions 1..=6 and Fock cutoff 15.
//!
//! Each check reduces to a single residual compared against the configured
//! tolerance. Statistical estimates (Monte Carlo means) and cutoff-limited
//! quantities (covariance decay, truncated trace preservation) carry their
//! own scales and are reported by the subcommands and exercised in the test
//! suite instead of here.

use rayon::prelude::*;

use crate::channels::{
    average_transpose_fidelity, choi_from_kraus, kraus_from_choi, random_tp_choi,
    transpose_covariance_residual,
};
use crate::cv::{
    beam_splitter, cv_fidelity, displacement, ladder, optimal_chi, reduced_seed_operator,
    squeezing, CvOptimalMap, CvSeed,
};
use crate::dilation::{
    all_family_members, ancilla_state, build_unitary, golden_ancilla_d2, golden_unitary_d2,
};
use crate::linalg::{
    c, cr, dket, haar_random_ket, haar_random_state_with, herm_eig, kron, matrix_exp, outer,
    partial_trace, stream_rng, swap_operator, sym_antisym_projectors, trace_product, Matrix,
    TraceSide,
};
use crate::transpose::{
    cloning_map, kraus_set, optimal_fidelity, optimal_map, optimize_covariant, pointwise_fidelity,
    stinespring,
};

use super::{CheckResult, RunConfig};

const VERIFY_DIMS: std::ops::RangeInclusive<usize> = 1..=6;
const VERIFY_CUTOFF: usize = 15;

type Check = (String, Box<dyn Fn() -> f64 + Send + Sync>);

fn check(name: String, f: impl Fn() -> f64 + Send + Sync + 'static) -> Check {
    (name, Box::new(f))
}

fn seeded_state(d: usize, seed: u64, index: u64) -> Matrix {
    haar_random_state_with(d, &mut stream_rng(seed, index))
}

fn linalg_checks(cfg: &RunConfig, checks: &mut Vec<Check>) {
    let seed = cfg.rng_seed;
    for d in VERIFY_DIMS {
        checks.push(check(format!("linalg/projector_algebra/d{d}"), move || {
            let e = swap_operator(d);
            let (ps, pa) = sym_antisym_projectors(d);
            let id = Matrix::identity(d * d);
            let zero = Matrix::zeros(d * d, d * d);
            [
                e.mul(&e).max_abs_diff(&id),
                ps.mul(&ps).max_abs_diff(&ps),
                pa.mul(&pa).max_abs_diff(&pa),
                ps.mul(&pa).max_abs_diff(&zero),
                ps.add(&pa).max_abs_diff(&id),
            ]
            .into_iter()
            .fold(0.0, f64::max)
        }));
        checks.push(check(format!("linalg/swap_transposes_dkets/d{d}"), move || {
            let e = swap_operator(d);
            let a = haar_random_state_with(d, &mut stream_rng(seed, 900 + d as u64));
            e.matvec(&dket(&a).to_column())
                .max_abs_diff(&dket(&a.transpose()).to_column())
        }));
        checks.push(check(format!("linalg/dket_round_trip/d{d}"), move || {
            let a = seeded_state(d, seed, 910 + d as u64);
            dket(&a).to_operator().max_abs_diff(&a)
        }));
        checks.push(check(format!("linalg/partial_trace_identities/d{d}"), move || {
            let a = seeded_state(d, seed, 920 + d as u64);
            let b = seeded_state(d, seed, 930 + d as u64);
            let rho = outer(&dket(&a).to_column(), &dket(&b).to_column());
            let tr2 = partial_trace(&rho, d, d, TraceSide::Second).expect("square");
            let tr1 = partial_trace(&rho, d, d, TraceSide::First).expect("square");
            tr2.max_abs_diff(&a.mul(&b.adjoint()))
                .max(tr1.max_abs_diff(&a.transpose().mul(&b.conj())))
        }));
        checks.push(check(format!("linalg/herm_eig_reconstruction/d{d}"), move || {
            let n = d * d;
            let g = crate::linalg::haar_random_unitary(n, &mut stream_rng(seed, 940 + d as u64));
            let h = g.add(&g.adjoint()).scale_real(0.5);
            let spectrum = herm_eig(&h).expect("hermitian by construction");
            spectrum.reconstruct().diff_norm(&h) / h.frobenius_norm().max(1.0)
        }));
        checks.push(check(format!("linalg/matrix_exp_unitarity/d{d}"), move || {
            let n = d + 2;
            let g = crate::linalg::haar_random_unitary(n, &mut stream_rng(seed, 950 + d as u64));
            let anti = g.sub(&g.adjoint()).scale_real(2.0);
            let e = matrix_exp(&anti);
            e.mul(&e.adjoint()).diff_norm(&Matrix::identity(n))
        }));
    }
}

fn channels_checks(cfg: &RunConfig, checks: &mut Vec<Check>) {
    let seed = cfg.rng_seed;
    let samples = cfg.samples;
    for d in 2..=5usize {
        checks.push(check(format!("channels/kraus_choi_round_trip/d{d}"), move || {
            let r = random_tp_choi(d, &mut stream_rng(seed, 10 + d as u64));
            let kraus = kraus_from_choi(&r).expect("CP by construction");
            choi_from_kraus(&kraus).matrix().diff_norm(r.matrix())
        }));
        checks.push(check(format!("channels/apply_matches_kraus/d{d}"), move || {
            let r = random_tp_choi(d, &mut stream_rng(seed, 20 + d as u64));
            let kraus = kraus_from_choi(&r).expect("CP by construction");
            let mut worst = 0.0f64;
            for s in 0..10u64 {
                let rho = seeded_state(d, seed, 30 + s);
                let via_choi = crate::channels::apply_choi(&r, &rho).expect("dims match");
                let via_kraus = kraus.apply(&rho).expect("dims match");
                worst = worst.max(via_choi.max_abs_diff(&via_kraus));
            }
            worst
        }));
        checks.push(check(format!("channels/optimal_choi_physical/d{d}"), move || {
            let r = optimize_covariant(d).choi();
            let min = r.min_eigenvalue().expect("hermitian");
            (-min).max(0.0).max(r.tp_residual())
        }));
        checks.push(check(format!("channels/fidelity_bound/d{d}"), move || {
            let bound = 2.0 / (d as f64 + 1.0);
            let mut worst = 0.0f64;
            for i in 0..samples {
                let r = random_tp_choi(d, &mut stream_rng(seed, 40_000 + i as u64));
                let f = average_transpose_fidelity(&r).expect("TP by construction");
                worst = worst.max(f - bound);
            }
            worst.max(0.0)
        }));
        checks.push(check(format!("channels/covariance_of_optimal/d{d}"), move || {
            transpose_covariance_residual(&optimize_covariant(d).choi(), 8, seed)
                .expect("square channel")
        }));
    }
}

fn transpose_checks(cfg: &RunConfig, checks: &mut Vec<Check>) {
    let seed = cfg.rng_seed;
    for d in VERIFY_DIMS {
        checks.push(check(format!("transpose/fidelity_closed_form/d{d}"), move || {
            (optimize_covariant(d).fidelity() - optimal_fidelity(d)).abs()
        }));
        checks.push(check(format!("transpose/optimality_grid/d{d}"), move || {
            // scan the feasible segment; nothing may beat the closed form
            if d == 1 {
                return 0.0;
            }
            let df = d as f64;
            let mut worst = 0.0f64;
            for k in 0..=10_000usize {
                let c_a = 2.0 / (df - 1.0) * k as f64 / 10_000.0;
                let c_s = (2.0 - c_a * (df - 1.0)) / (df + 1.0);
                worst = worst.max(c_s - optimal_fidelity(d));
            }
            worst.max(0.0)
        }));
        checks.push(check(format!("transpose/kraus_completeness/d{d}"), move || {
            kraus_set(d).completeness_residual()
        }));
        checks.push(check(format!("transpose/kraus_choi_projector/d{d}"), move || {
            let choi = choi_from_kraus(&kraus_set(d));
            choi.matrix().max_abs_diff(optimize_covariant(d).choi().matrix())
        }));
        checks.push(check(format!("transpose/stinespring_isometry/d{d}"), move || {
            stinespring(d).isometry_residual()
        }));
        checks.push(check(format!("transpose/realizations_agree/d{d}"), move || {
            let machine = crate::transpose::OptimalTransposeMachine::new(d);
            let mut worst = 0.0f64;
            for s in 0..5u64 {
                let rho = seeded_state(d, seed, 100 + s);
                let closed = optimal_map(d, &rho).expect("valid state");
                for other in [
                    machine.apply(&rho).expect("valid state"),
                    machine.kraus().apply(&rho).expect("valid state"),
                    machine.isometry().apply(&rho).expect("valid state"),
                ] {
                    worst = worst.max(closed.max_abs_diff(&other));
                }
            }
            worst
        }));
        checks.push(check(format!("transpose/fidelity_universality/d{d}"), move || {
            let mut worst = 0.0f64;
            for s in 0..10u64 {
                let rho = seeded_state(d, seed, 200 + s);
                let out = optimal_map(d, &rho).expect("valid state");
                worst = worst.max((pointwise_fidelity(&rho, &out) - optimal_fidelity(d)).abs());
            }
            worst
        }));
        checks.push(check(format!("transpose/clone_fidelity/d{d}"), move || {
            let frozen = (d as f64 + 3.0) / (2.0 * (d as f64 + 1.0));
            let mut worst = 0.0f64;
            for s in 0..5u64 {
                let rho = seeded_state(d, seed, 300 + s);
                let clones = cloning_map(d, &rho).expect("valid state");
                let m1 = partial_trace(&clones, d, d, TraceSide::First).expect("square");
                let m2 = partial_trace(&clones, d, d, TraceSide::Second).expect("square");
                worst = worst.max((trace_product(&rho, &m1).re - frozen).abs());
                worst = worst.max(m1.max_abs_diff(&m2));
            }
            worst
        }));
        checks.push(check(format!("transpose/anticlone_equivalence/d{d}"), move || {
            crate::transpose::anticlone_equivalence_check(d, 10, seed).expect("valid states")
        }));
    }
}

fn dilation_checks(cfg: &RunConfig, checks: &mut Vec<Check>) {
    let seed = cfg.rng_seed;
    checks.push(check("dilation/golden_matrix_d2".into(), || {
        build_unitary(2)
            .expect("d >= 2")
            .unitary()
            .max_abs_diff(&golden_unitary_d2())
    }));
    checks.push(check("dilation/golden_ancilla_d2".into(), || {
        ancilla_state(2).expect("d >= 2").max_abs_diff(&golden_ancilla_d2())
    }));
    for d in 2..=6usize {
        checks.push(check(format!("dilation/unitarity/d{d}"), move || {
            build_unitary(d).expect("d >= 2").unitarity_residual()
        }));
        checks.push(check(format!("dilation/ancilla_state/d{d}"), move || {
            let phi = ancilla_state(d).expect("d >= 2");
            let (_, pa) = sym_antisym_projectors(d);
            (phi.vector_norm() - 1.0).abs().max(pa.matvec(&phi).vector_norm())
        }));
    }
    for d in 2..=4usize {
        checks.push(check(format!("dilation/family_orthogonality/d{d}"), move || {
            let members = all_family_members(d);
            let mut worst = 0.0f64;
            for a in &members {
                for b in &members {
                    let product = a.matrix.adjoint().mul(&b.matrix);
                    let same = a.kind == b.kind && a.p == b.p && a.q == b.q;
                    let expected =
                        if same { Matrix::identity(d) } else { Matrix::zeros(d, d) };
                    worst = worst.max(product.max_abs_diff(&expected));
                }
            }
            worst
        }));
        checks.push(check(format!("dilation/extends_isometry/d{d}"), move || {
            let dilation = build_unitary(d).expect("d >= 2");
            let isometry = stinespring(d);
            let mut worst = 0.0f64;
            for s in 0..3u64 {
                let rho = seeded_state(d, seed, 400 + s);
                let evolved = dilation.evolve(&rho).expect("valid state");
                let direct = isometry.matrix().mul(&rho).mul(&isometry.matrix().adjoint());
                worst = worst.max(evolved.max_abs_diff(&direct));
            }
            worst
        }));
        checks.push(check(format!("dilation/channel_extractions/d{d}"), move || {
            let dilation = build_unitary(d).expect("d >= 2");
            let mut worst = 0.0f64;
            for s in 0..3u64 {
                let rho = seeded_state(d, seed, 500 + s);
                let t = dilation.transpose_state(&rho).expect("valid state");
                worst = worst.max(t.max_abs_diff(&optimal_map(d, &rho).expect("valid state")));
                let clones = dilation.clone_state(&rho).expect("valid state");
                worst =
                    worst.max(clones.max_abs_diff(&cloning_map(d, &rho).expect("valid state")));
            }
            worst
        }));
    }
}

fn cv_checks(cfg: &RunConfig, checks: &mut Vec<Check>) {
    let seed = cfg.rng_seed;
    let n = VERIFY_CUTOFF;
    checks.push(check("cv/ladder_commutator".into(), move || {
        let (a, a_dag) = ladder(n);
        let comm = a.mul(&a_dag).sub(&a_dag.mul(&a));
        let mut expected = Matrix::identity(n);
        expected.set(n - 1, n - 1, cr(1.0 - n as f64));
        comm.max_abs_diff(&expected)
    }));
    checks.push(check("cv/beam_splitter_unitary".into(), move || {
        let v = beam_splitter(n);
        v.adjoint().mul(&v).diff_norm(&Matrix::identity(n * n))
    }));
    checks.push(check("cv/beam_splitter_blockwise_vs_dense".into(), || {
        let small = 6;
        let (a, a_dag) = ladder(small);
        let generator = kron(&a_dag, &a)
            .sub(&kron(&a, &a_dag))
            .scale_real(std::f64::consts::FRAC_PI_4);
        beam_splitter(small).max_abs_diff(&matrix_exp(&generator))
    }));
    checks.push(check("cv/photon_number_preserved".into(), move || {
        let v = beam_splitter(n);
        let (a, a_dag) = ladder(n);
        let number = a_dag.mul(&a);
        let id = Matrix::identity(n);
        let total = kron(&number, &id).add(&kron(&id, &number));
        v.mul(&total).sub(&total.mul(&v)).frobenius_norm()
    }));
    checks.push(check("cv/displacement_inverse".into(), move || {
        let alpha = c(0.3, 0.1);
        displacement(alpha, n)
            .mul(&displacement(-alpha, n))
            .diff_norm(&Matrix::identity(n))
    }));
    checks.push(check("cv/squeezed_parity".into(), move || {
        let ket = squeezing(0.2, n).matvec(&Matrix::basis_column(n, 0));
        (1..n).step_by(2).map(|l| ket.get(l, 0).norm()).fold(0.0, f64::max)
    }));
    checks.push(check("cv/vacuum_reduced_operator".into(), move || {
        let t = reduced_seed_operator(&CvSeed::vacuum(n), n).expect("matching cutoff");
        let mut expected = Matrix::zeros(n, n);
        expected.set(0, 0, cr(1.0));
        t.max_abs_diff(&expected)
    }));
    checks.push(check("cv/vacuum_fidelity".into(), move || {
        let map = optimal_chi(&CvSeed::vacuum(n), n).expect("matching cutoff");
        (map.fidelity() - 0.5).abs()
    }));
    checks.push(check("cv/rayleigh_identity".into(), move || {
        let mut worst = 0.0f64;
        for seed_state in [
            CvSeed::vacuum(n),
            CvSeed::coherent(c(0.3, 0.0), n),
            CvSeed::squeezed(0.2, n),
        ] {
            let map = optimal_chi(&seed_state, n).expect("matching cutoff");
            let f = cv_fidelity(&seed_state, &map).expect("matching cutoff");
            worst = worst.max((f - map.lambda_max() / 2.0).abs());
        }
        worst
    }));
    checks.push(check("cv/chi_optimality".into(), move || {
        let seed_state = CvSeed::squeezed(0.15, n);
        let best = optimal_chi(&seed_state, n).expect("matching cutoff");
        let mut worst = 0.0f64;
        for s in 0..8u64 {
            let chi = haar_random_ket(n, &mut stream_rng(seed, 600 + s));
            let candidate =
                CvOptimalMap::with_chi(&seed_state, &chi).expect("normalized candidate");
            let f = cv_fidelity(&seed_state, &candidate).expect("matching cutoff");
            worst = worst.max(f - best.fidelity());
        }
        worst.max(0.0)
    }));
}

/// Run every check against `cfg.tolerance`, sorted by name.
pub fn run_all_checks(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut checks: Vec<Check> = Vec::new();
    linalg_checks(cfg, &mut checks);
    channels_checks(cfg, &mut checks);
    transpose_checks(cfg, &mut checks);
    dilation_checks(cfg, &mut checks);
    cv_checks(cfg, &mut checks);
    let tolerance = cfg.tolerance;
    let mut results: Vec<CheckResult> = checks
        .into_par_iter()
        .map(|(name, f)| {
            let residual = f();
            CheckResult { name, residual, pass: residual <= tolerance }
        })
        .collect();
    results.sort_by(|a, b| a.name.cmp(&b.name));
    results
}
