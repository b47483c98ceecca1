//! Quantum channel representations and physicality checks.
//!
//! A channel is held as a Choi operator on the `out ⊗ in` space, a Kraus
//! set, or a Stinespring isometry. The Choi convention is fixed once and
//! for all: `R = (M ⊗ I)|I>><<I|` and the action is
//! `M(rho) = Tr_2[(I ⊗ rho^T) R]`, with the map acting on the first factor
//! and the transposed input on the second. Swapping factors silently
//! transposes every output, so all code in this crate goes through here.

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{
    dket, haar_random_state_with, haar_random_unitary, kron, outer, pair_index,
    partial_trace, stream_rng, sym_antisym_projectors, trace_product, Matrix, TraceSide,
};
use crate::{Error, Result, DEFAULT_TOL};

/// Choi operator of a channel from a `dim_in`- to a `dim_out`-dimensional
/// system, stored on the `out ⊗ in` space.
#[derive(Debug, Clone)]
pub struct ChoiOperator {
    dim_in: usize,
    dim_out: usize,
    matrix: Matrix,
}

impl ChoiOperator {
    pub fn new(dim_in: usize, dim_out: usize, matrix: Matrix) -> Result<Self> {
        let dim = dim_in * dim_out;
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::Dimension(format!(
                "Choi operator for {dim_in}->{dim_out} must be {dim}x{dim}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { dim_in, dim_out, matrix })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Smallest eigenvalue of the Choi matrix.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let spectrum = herm_eig_lenient(&self.matrix)?;
        Ok(*spectrum.eigenvalues().last().expect("nonempty spectrum"))
    }

    /// `||Tr_1[R] - I_in||_F`.
    pub fn tp_residual(&self) -> f64 {
        let reduced = partial_trace(&self.matrix, self.dim_out, self.dim_in, TraceSide::First)
            .expect("consistent dimensions by construction");
        reduced.diff_norm(&Matrix::identity(self.dim_in))
    }
}

// Choi matrices of CP maps are Hermitian up to rounding; accept a slightly
// looser residual than the strict default before diagonalizing.
fn herm_eig_lenient(m: &Matrix) -> Result<crate::linalg::HermitianSpectrum> {
    crate::linalg::herm_eig_with_tol(m, 1e-8)
}

/// A set of Kraus operators, all `dim_out x dim_in`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    operators: Vec<Matrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<Matrix>) -> Result<Self> {
        let first = operators.first().ok_or(Error::EmptyKrausSet)?;
        let (r, c) = (first.rows(), first.cols());
        if operators.iter().any(|k| k.rows() != r || k.cols() != c) {
            return Err(Error::Dimension(
                "Kraus operators must share a common shape".into(),
            ));
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[Matrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn dim_in(&self) -> usize {
        self.operators[0].cols()
    }

    pub fn dim_out(&self) -> usize {
        self.operators[0].rows()
    }

    /// `||sum_k K_k^dag K_k - I||_F`; zero for a trace-preserving set.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim_in();
        let mut sum = Matrix::zeros(d, d);
        for k in &self.operators {
            sum.add_assign(&k.adjoint().mul(k));
        }
        sum.diff_norm(&Matrix::identity(d))
    }

    pub fn is_complete(&self, tol: f64) -> bool {
        self.completeness_residual() <= tol
    }

    /// `sum_k K_k rho K_k^dag`.
    pub fn apply(&self, rho: &Matrix) -> Result<Matrix> {
        let d = self.dim_in();
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::Dimension(format!(
                "Kraus action expects a {d}x{d} input, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        let mut out = Matrix::zeros(self.dim_out(), self.dim_out());
        for k in &self.operators {
            out.add_assign(&k.mul(rho).mul(&k.adjoint()));
        }
        Ok(out)
    }
}

/// Isometry `V: H_in -> H_out ⊗ H_anc` with the ancilla factor dimensions
/// recorded so partial traces know how to split the output.
#[derive(Debug, Clone)]
pub struct StinespringIsometry {
    v: Matrix,
    dim_in: usize,
    dim_out: usize,
    anc_dims: Vec<usize>,
}

impl StinespringIsometry {
    pub fn new(v: Matrix, dim_out: usize, anc_dims: Vec<usize>) -> Result<Self> {
        let anc: usize = anc_dims.iter().product();
        if v.rows() != dim_out * anc {
            return Err(Error::Dimension(format!(
                "isometry rows {} do not factor as out {dim_out} x anc {anc}",
                v.rows()
            )));
        }
        Ok(Self { dim_in: v.cols(), v, dim_out, anc_dims })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.v
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn anc_dims(&self) -> &[usize] {
        &self.anc_dims
    }

    pub fn anc_dim(&self) -> usize {
        self.anc_dims.iter().product()
    }

    /// `||V^dag V - I||_F`.
    pub fn isometry_residual(&self) -> f64 {
        self.v
            .adjoint()
            .mul(&self.v)
            .diff_norm(&Matrix::identity(self.dim_in))
    }

    /// Channel action `Tr_anc[V rho V^dag]`.
    pub fn apply(&self, rho: &Matrix) -> Result<Matrix> {
        if rho.rows() != self.dim_in || rho.cols() != self.dim_in {
            return Err(Error::Dimension(format!(
                "isometry action expects a {0}x{0} input, got {1}x{2}",
                self.dim_in,
                rho.rows(),
                rho.cols()
            )));
        }
        let big = self.v.mul(rho).mul(&self.v.adjoint());
        partial_trace(&big, self.dim_out, self.anc_dim(), TraceSide::Second)
    }
}

/// Choi operator of the channel with the given Kraus set,
/// `R = sum_k |K_k>><<K_k|`.
pub fn choi_from_kraus(kraus: &KrausSet) -> ChoiOperator {
    let dim = kraus.dim_out() * kraus.dim_in();
    let mut matrix = Matrix::zeros(dim, dim);
    for k in kraus.operators() {
        let col = dket(k).to_column();
        matrix.add_assign(&outer(&col, &col));
    }
    ChoiOperator { dim_in: kraus.dim_in(), dim_out: kraus.dim_out(), matrix }
}

/// Kraus operators of a CP Choi operator: each eigenvector with eigenvalue
/// `lambda > 0` un-flattens to an operator scaled by `sqrt(lambda)`.
pub fn kraus_from_choi(r: &ChoiOperator) -> Result<KrausSet> {
    let spectrum = herm_eig_lenient(&r.matrix)?;
    let dim = (r.dim_out * r.dim_in) as f64;
    let scale = spectrum.eigenvalue(0).abs().max(1.0);
    let min = *spectrum.eigenvalues().last().expect("nonempty spectrum");
    if min < -DEFAULT_TOL * dim * scale {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: min });
    }
    let cutoff = 1e-12 * scale;
    let mut operators = Vec::new();
    for (k, &lambda) in spectrum.eigenvalues().iter().enumerate() {
        if lambda <= cutoff {
            continue;
        }
        let col = spectrum.eigenvector(k).scale_real(lambda.sqrt());
        let op = Matrix::from_fn(r.dim_out, r.dim_in, |i, j| {
            col.get(pair_index(i, j, r.dim_in), 0)
        });
        operators.push(op);
    }
    if operators.is_empty() {
        // zero channel: represent it by a single zero operator
        operators.push(Matrix::zeros(r.dim_out, r.dim_in));
    }
    KrausSet::new(operators)
}

/// Channel action through the Choi operator,
/// `M(rho) = Tr_2[(I ⊗ rho^T) R]`, contracted index-wise.
pub fn apply_choi(r: &ChoiOperator, rho: &Matrix) -> Result<Matrix> {
    let (din, dout) = (r.dim_in, r.dim_out);
    if rho.rows() != din || rho.cols() != din {
        return Err(Error::Dimension(format!(
            "channel input must be {din}x{din}, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let mut out = Matrix::zeros(dout, dout);
    for i in 0..dout {
        for k in 0..dout {
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..din {
                for l in 0..din {
                    // (I ⊗ rho^T) contributes rho^T[j, l] = rho[l, j] on the
                    // in-factor, contracted against R[(i,l),(k,j)]
                    sum += rho.get(l, j)
                        * r.matrix.get(pair_index(i, l, din), pair_index(k, j, din));
                }
            }
            out.set(i, k, sum);
        }
    }
    Ok(out)
}

/// Complete positivity: smallest Choi eigenvalue above `-tol * dim`.
pub fn is_cp(r: &ChoiOperator, tol: f64) -> Result<bool> {
    let dim = (r.dim_out * r.dim_in) as f64;
    Ok(r.min_eigenvalue()? >= -tol * dim)
}

/// Trace preservation: `Tr_1[R] = I` within `tol` in Frobenius norm.
pub fn is_tp(r: &ChoiOperator, tol: f64) -> bool {
    r.tp_residual() <= tol
}

/// Largest deviation from transpose covariance over Haar-sampled unitaries:
/// `max_U ||(U* ⊗ U*) R (U^T ⊗ U^T) - R||_F`.
pub fn transpose_covariance_residual(r: &ChoiOperator, samples: usize, rng_seed: u64) -> Result<f64> {
    if r.dim_in != r.dim_out {
        return Err(Error::Dimension(
            "covariance residual needs dim_in == dim_out".into(),
        ));
    }
    let d = r.dim_in;
    let mut worst = 0.0f64;
    for index in 0..samples {
        let mut rng = stream_rng(rng_seed, index as u64);
        let u = haar_random_unitary(d, &mut rng);
        let w = kron(&u.conj(), &u.conj());
        let rotated = r.matrix.conjugate_by(&w);
        worst = worst.max(rotated.diff_norm(&r.matrix));
    }
    Ok(worst)
}

/// Haar-averaged fidelity between the channel output and the transposed
/// pure input, `(2 / (d(d+1))) Tr[R P_S]`; the first-moment identity
/// `∫ psi psi ⊗ psi psi = 2 P_S / (d(d+1))` turns the average into a trace.
pub fn average_transpose_fidelity(r: &ChoiOperator) -> Result<f64> {
    if r.dim_in != r.dim_out {
        return Err(Error::Dimension(
            "transpose fidelity needs dim_in == dim_out".into(),
        ));
    }
    let residual = r.tp_residual();
    if residual > 1e-8 * r.dim_in as f64 {
        return Err(Error::NotTracePreserving { residual });
    }
    let d = r.dim_in;
    let (ps, _) = sym_antisym_projectors(d);
    let value = trace_product(&r.matrix, &ps).re;
    Ok(2.0 / (d as f64 * (d as f64 + 1.0)) * value)
}

/// Random trace-preserving channel on dimension `d`, generated by a Haar
/// isometry into `H ⊗ H_anc` with a full-rank `d^2` ancilla followed by a
/// partial trace over the ancilla.
pub fn random_tp_choi(d: usize, rng: &mut impl Rng) -> ChoiOperator {
    let anc = d * d;
    let big = haar_random_unitary(d * anc, rng);
    // first d columns form the isometry; Kraus operators are its ancilla slices
    let mut operators = Vec::with_capacity(anc);
    for a in 0..anc {
        operators.push(Matrix::from_fn(d, d, |i, j| big.get(pair_index(i, a, anc), j)));
    }
    choi_from_kraus(&KrausSet::new(operators).expect("nonempty by construction"))
}

/// Monte Carlo mean of `Tr[rho^T M(rho)]` over Haar pure states; slow
/// reference route used to validate [`average_transpose_fidelity`].
pub fn monte_carlo_transpose_fidelity(
    r: &ChoiOperator,
    samples: usize,
    rng_seed: u64,
) -> Result<f64> {
    let d = r.dim_in;
    let mut sum = 0.0;
    for index in 0..samples {
        let mut rng = stream_rng(rng_seed, index as u64);
        let rho = haar_random_state_with(d, &mut rng);
        let out = apply_choi(r, &rho)?;
        sum += trace_product(&rho.transpose(), &out).re;
    }
    Ok(sum / samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cr, herm_eig, seeded_rng};

    fn identity_choi(d: usize) -> ChoiOperator {
        choi_from_kraus(&KrausSet::new(vec![Matrix::identity(d)]).unwrap())
    }

    fn optimal_choi(d: usize) -> ChoiOperator {
        let (ps, _) = sym_antisym_projectors(d);
        ChoiOperator::new(d, d, ps.scale_real(2.0 / (d as f64 + 1.0))).unwrap()
    }

    #[test]
    fn choi_of_identity_channel() {
        let r = identity_choi(2);
        let ket = dket(&Matrix::identity(2)).to_column();
        assert!(r.matrix().max_abs_diff(&outer(&ket, &ket)) < 1e-15);
    }

    #[test]
    fn choi_of_single_unitary_is_rank_one_with_eigenvalue_d() {
        let mut rng = seeded_rng(2);
        for d in [2usize, 3] {
            let u = haar_random_unitary(d, &mut rng);
            let r = choi_from_kraus(&KrausSet::new(vec![u]).unwrap());
            let spectrum = herm_eig(r.matrix()).unwrap();
            assert!((spectrum.eigenvalue(0) - d as f64).abs() < 1e-10);
            for k in 1..d * d {
                assert!(spectrum.eigenvalue(k).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn kraus_of_identity_choi_is_identity_up_to_phase() {
        let kraus = kraus_from_choi(&identity_choi(3)).unwrap();
        assert_eq!(kraus.len(), 1);
        let k = &kraus.operators()[0];
        let phase = k.get(0, 0);
        assert!((phase.norm() - 1.0).abs() < 1e-10);
        assert!(k.scale(phase.conj()).max_abs_diff(&Matrix::identity(3)) < 1e-10);
    }

    #[test]
    fn kraus_of_optimal_choi_spans_symmetric_operators() {
        // eigenvectors of (2/(d+1)) P_S un-flatten to symmetric matrices
        for d in [2usize, 3] {
            let kraus = kraus_from_choi(&optimal_choi(d)).unwrap();
            assert_eq!(kraus.len(), d * (d + 1) / 2);
            for k in kraus.operators() {
                assert!(k.max_abs_diff(&k.transpose()) < 1e-10);
            }
            let rebuilt = choi_from_kraus(&kraus);
            assert!(rebuilt.matrix().max_abs_diff(optimal_choi(d).matrix()) < 1e-10);
        }
    }

    #[test]
    fn non_tp_choi_flagged_by_completeness_residual() {
        // CP but not TP: pad the identity-channel Choi with a zero block row
        let r = ChoiOperator::new(2, 2, identity_choi(2).matrix().scale_real(0.5)).unwrap();
        let kraus = kraus_from_choi(&r).unwrap();
        assert!(kraus.completeness_residual() > 0.1);
        assert!(!kraus.is_complete(1e-6));
    }

    #[test]
    fn apply_identity_choi_is_identity_map() {
        let r = identity_choi(3);
        let rho = haar_random_state(3, 5);
        assert!(apply_choi(&r, &rho).unwrap().max_abs_diff(&rho) < 1e-12);
    }

    use crate::linalg::haar_random_state;

    #[test]
    fn apply_optimal_choi_matches_closed_form() {
        for d in [2usize, 3, 4] {
            let r = optimal_choi(d);
            let rho = haar_random_state(d, 17 + d as u64);
            let out = apply_choi(&r, &rho).unwrap();
            let expected = Matrix::identity(d)
                .add(&rho.transpose())
                .scale_real(1.0 / (d as f64 + 1.0));
            assert!(out.max_abs_diff(&expected) < 1e-12);
        }
    }

    #[test]
    fn swap_choi_reproduces_plain_transposition() {
        // E as a Choi matrix acts as the (unphysical) transposition; brute
        // force the action on matrix units first
        let e = swap_choi();
        for i in 0..2 {
            for j in 0..2 {
                let mut unit = Matrix::zeros(2, 2);
                unit.set(i, j, cr(1.0));
                let out = apply_choi(&e, &unit).unwrap();
                assert!(out.max_abs_diff(&unit.transpose()) < 1e-14);
            }
        }
        let rho = haar_random_state(2, 23);
        let out = apply_choi(&e, &rho).unwrap();
        assert!(out.max_abs_diff(&rho.transpose()) < 1e-13);
    }

    fn swap_choi() -> ChoiOperator {
        ChoiOperator::new(2, 2, crate::linalg::swap_operator(2)).unwrap()
    }

    #[test]
    fn swap_choi_is_not_cp_but_optimal_is() {
        assert!(!is_cp(&swap_choi(), 1e-12).unwrap());
        let spectrum = herm_eig(swap_choi().matrix()).unwrap();
        assert!((spectrum.eigenvalues().last().unwrap() + 1.0).abs() < 1e-12);
        for d in [2usize, 3] {
            let r = optimal_choi(d);
            assert!(is_cp(&r, 1e-12).unwrap());
            assert!(is_tp(&r, 1e-12));
        }
    }

    #[test]
    fn scaled_identity_choi_is_cp_not_tp() {
        let r = ChoiOperator::new(2, 2, identity_choi(2).matrix().scale_real(2.0)).unwrap();
        assert!(is_cp(&r, 1e-12).unwrap());
        assert!(!is_tp(&r, 1e-6));
    }

    #[test]
    fn covariance_residual_of_covariant_choi_vanishes() {
        for d in [2usize, 3] {
            let r = optimal_choi(d);
            assert!(transpose_covariance_residual(&r, 8, 3).unwrap() <= 1e-10);
        }
        // full mixing commutes with everything
        let d = 3;
        let r = ChoiOperator::new(d, d, Matrix::identity(d * d).scale_real(1.0 / d as f64))
            .unwrap();
        assert!(transpose_covariance_residual(&r, 8, 4).unwrap() <= 1e-10);
    }

    #[test]
    fn covariance_residual_detects_identity_channel() {
        // oracle: one explicit non-orthogonal unitary already breaks covariance
        let r = identity_choi(2);
        let h = 1.0 / 2.0f64.sqrt();
        let u = Matrix::new(2, 2, vec![cr(h), cr(h), c(0.0, h), c(0.0, -h)]).unwrap();
        let w = kron(&u.conj(), &u.conj());
        let explicit = r.matrix().conjugate_by(&w).diff_norm(r.matrix());
        assert!(explicit > 0.1);
        assert!(transpose_covariance_residual(&r, 10, 5).unwrap() > 0.1);
    }

    #[test]
    fn fidelity_of_optimal_choi() {
        let f = average_transpose_fidelity(&optimal_choi(2)).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_of_identity_channel_matches_monte_carlo() {
        let r = identity_choi(2);
        let analytic = average_transpose_fidelity(&r).unwrap();
        let mc = monte_carlo_transpose_fidelity(&r, 100_000, 11).unwrap();
        assert!((analytic - mc).abs() < 1e-2);
    }

    #[test]
    fn fidelity_vanishes_on_antisymmetric_support() {
        // TP channel supported on P_A only: R = 2 P_A / (d-1)
        let d = 3;
        let (_, pa) = sym_antisym_projectors(d);
        let r = ChoiOperator::new(d, d, pa.scale_real(2.0 / (d as f64 - 1.0))).unwrap();
        assert!(is_tp(&r, 1e-12));
        assert!(average_transpose_fidelity(&r).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fidelity_requires_trace_preservation() {
        let r = ChoiOperator::new(2, 2, identity_choi(2).matrix().scale_real(2.0)).unwrap();
        assert!(matches!(
            average_transpose_fidelity(&r),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn random_tp_channels_respect_the_transpose_bound() {
        for d in [2usize, 3] {
            let bound = 2.0 / (d as f64 + 1.0);
            for i in 0..25 {
                let mut rng = stream_rng(1000 + d as u64, i);
                let r = random_tp_choi(d, &mut rng);
                assert!(r.tp_residual() < 1e-10);
                assert!(is_cp(&r, 1e-10).unwrap());
                let f = average_transpose_fidelity(&r).unwrap();
                assert!(f <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn kraus_choi_round_trip_on_random_cp_maps() {
        for d in 2..=6usize {
            let mut rng = stream_rng(77, d as u64);
            let r = random_tp_choi(d, &mut rng);
            let kraus = kraus_from_choi(&r).unwrap();
            let rebuilt = choi_from_kraus(&kraus);
            assert!(rebuilt.matrix().max_abs_diff(r.matrix()) < 1e-10);
            // Kraus action agrees with the Choi action
            for s in 0..50u64 {
                let rho = haar_random_state_with(d, &mut stream_rng(78, s));
                let via_choi = apply_choi(&r, &rho).unwrap();
                let via_kraus = kraus.apply(&rho).unwrap();
                assert!(via_choi.max_abs_diff(&via_kraus) < 1e-10);
                // trace preservation under the action
                assert!((via_choi.trace().re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kraus_from_non_cp_choi_fails() {
        assert!(matches!(
            kraus_from_choi(&swap_choi()),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn empty_kraus_set_is_rejected() {
        assert!(matches!(KrausSet::new(vec![]), Err(Error::EmptyKrausSet)));
    }

    #[test]
    fn mismatched_kraus_shapes_are_rejected() {
        let ops = vec![Matrix::identity(2), Matrix::zeros(3, 3)];
        assert!(matches!(KrausSet::new(ops), Err(Error::Dimension(_))));
    }
}
