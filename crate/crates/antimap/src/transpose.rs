//! The optimal physical approximation of transposition in finite dimension.
//!
//! Covariance under `SU(d)` forces the Choi operator into the two-parameter
//! form `c_A P_A + c_S P_S`; trace preservation pins the parameters to a
//! line segment and the fidelity equals `c_S`, so the optimum sits at
//! `c_S = 2/(d+1)`, `c_A = 0`. The resulting map is
//! `M(rho) = (I + rho^T)/(d+1)`, with Kraus operators
//! `(|m><n| + |n><m|)/sqrt(2(d+1))` and a Stinespring isometry whose other
//! marginal is the optimal symmetric 1-to-2 cloner in Werner form.


use crate::channels::{apply_choi, ChoiOperator, KrausSet, StinespringIsometry};
use crate::linalg::{
    cr, haar_random_state_with, kron, pair_index, partial_trace, stream_rng,
    sym_antisym_projectors, trace_product, Matrix, TraceSide,
};
use crate::{Error, Result};

/// The pair `(c_S, c_A)` parametrizing an SU(d)-covariant transposition
/// candidate `R = c_A P_A + c_S P_S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariantParams {
    pub d: usize,
    pub c_s: f64,
    pub c_a: f64,
}

impl CovariantParams {
    /// Deviation from the trace-preservation constraint
    /// `c_S (d+1)/2 + c_A (d-1)/2 = 1`.
    pub fn constraint_residual(&self) -> f64 {
        let d = self.d as f64;
        (self.c_s * (d + 1.0) / 2.0 + self.c_a * (d - 1.0) / 2.0 - 1.0).abs()
    }

    /// The state-independent fidelity of the covariant map, which equals `c_S`.
    pub fn fidelity(&self) -> f64 {
        self.c_s
    }

    /// Choi operator `c_A P_A + c_S P_S`.
    pub fn choi(&self) -> ChoiOperator {
        let (ps, pa) = sym_antisym_projectors(self.d);
        let matrix = ps.scale_real(self.c_s).add(&pa.scale_real(self.c_a));
        ChoiOperator::new(self.d, self.d, matrix).expect("square by construction")
    }
}

/// Maximize the fidelity over the feasible covariant segment.
///
/// The segment is parametrized by `c_A in [0, 2/(d-1)]` with
/// `c_S = (2 - c_A (d-1))/(d+1)`; a dense scan locates the maximum, which is
/// then asserted against the closed form `c_S = 2/(d+1)`, `c_A = 0` before
/// the exact values are returned.
pub fn optimize_covariant(d: usize) -> CovariantParams {
    assert!(d >= 1, "dimension must be positive");
    if d == 1 {
        // P_A is empty; the constraint degenerates to c_S = 1
        return CovariantParams { d, c_s: 1.0, c_a: 0.0 };
    }
    let df = d as f64;
    let c_a_max = 2.0 / (df - 1.0);
    let steps = 20_000usize;
    let mut best_c_a = 0.0;
    let mut best_c_s = f64::NEG_INFINITY;
    for k in 0..=steps {
        let c_a = c_a_max * k as f64 / steps as f64;
        let c_s = (2.0 - c_a * (df - 1.0)) / (df + 1.0);
        if c_s > best_c_s {
            best_c_s = c_s;
            best_c_a = c_a;
        }
    }
    let closed_form = 2.0 / (df + 1.0);
    assert!(
        (best_c_s - closed_form).abs() <= 1e-12 && best_c_a <= c_a_max / steps as f64,
        "scan disagrees with the closed-form optimum"
    );
    CovariantParams { d, c_s: closed_form, c_a: 0.0 }
}

/// Optimal-fidelity approximation of the transposed state,
/// `M(rho) = (I + rho^T)/(d+1)`.
pub fn optimal_map(d: usize, rho: &Matrix) -> Result<Matrix> {
    validate_state(d, rho)?;
    Ok(Matrix::identity(d)
        .add(&rho.transpose())
        .scale_real(1.0 / (d as f64 + 1.0)))
}

fn validate_state(d: usize, rho: &Matrix) -> Result<()> {
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::Dimension(format!(
            "expected a {d}x{d} density matrix, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let trace = rho.trace();
    if (trace - cr(1.0)).norm() > 1e-8 {
        return Err(Error::InvalidState(format!(
            "density matrix must have unit trace, got {trace}"
        )));
    }
    Ok(())
}

/// The optimal transposition fidelity `2/(d+1)`.
pub fn optimal_fidelity(d: usize) -> f64 {
    assert!(d >= 1, "dimension must be positive");
    2.0 / (d as f64 + 1.0)
}

/// Kraus set `{ M_{mn} = (|m><n| + |n><m|) / sqrt(2(d+1)) }` over all
/// ordered pairs `(m, n)`.
///
/// The sum deliberately runs over ordered pairs, double counting the
/// off-diagonal symmetric operators, so that `sum |M_{mn}>><<M_{mn}|`
/// reproduces the covariant Choi operator term by term.
pub fn kraus_set(d: usize) -> KrausSet {
    assert!(d >= 1, "dimension must be positive");
    let norm = 1.0 / (2.0 * (d as f64 + 1.0)).sqrt();
    let mut operators = Vec::with_capacity(d * d);
    for m in 0..d {
        for n in 0..d {
            let mut op = Matrix::zeros(d, d);
            op.set(m, n, op.get(m, n) + cr(norm));
            op.set(n, m, op.get(n, m) + cr(norm));
            operators.push(op);
        }
    }
    KrausSet::new(operators).expect("nonempty by construction")
}

/// Stinespring isometry `V = sum_{mn} M_{mn} ⊗ |mn>_{23}` from the system
/// into system ⊗ two ancilla copies, as a `d^3 x d` matrix.
pub fn stinespring(d: usize) -> StinespringIsometry {
    let kraus = kraus_set(d);
    let mut v = Matrix::zeros(d * d * d, d);
    for (index, op) in kraus.operators().iter().enumerate() {
        let (m, n) = (index / d, index % d);
        for i in 0..d {
            for j in 0..d {
                let value = op.get(i, j);
                if value.re == 0.0 && value.im == 0.0 {
                    continue;
                }
                // row (i, m, n) in the out ⊗ anc ordering
                let row = pair_index(i, pair_index(m, n, d), d * d);
                v.set(row, j, v.get(row, j) + value);
            }
        }
    }
    StinespringIsometry::new(v, d, vec![d, d]).expect("consistent by construction")
}

/// The optimal symmetric 1-to-2 cloner realized by the same isometry:
/// `C(rho) = (2/(d+1)) P_S (I ⊗ rho) P_S` on `H ⊗ H`.
pub fn cloning_map(d: usize, rho: &Matrix) -> Result<Matrix> {
    validate_state(d, rho)?;
    let (ps, _) = sym_antisym_projectors(d);
    let embedded = kron(&Matrix::identity(d), rho);
    Ok(ps
        .mul(&embedded)
        .mul(&ps)
        .scale_real(2.0 / (d as f64 + 1.0)))
}

/// Max Frobenius distance between the closed-form map and the ancilla-traced
/// isometry output over Haar-sampled pure states.
pub fn anticlone_equivalence_check(d: usize, samples: usize, rng_seed: u64) -> Result<f64> {
    let isometry = stinespring(d);
    let mut worst = 0.0f64;
    for index in 0..samples {
        let mut rng = stream_rng(rng_seed, index as u64);
        let rho = haar_random_state_with(d, &mut rng);
        let direct = optimal_map(d, &rho)?;
        let via_isometry = isometry.apply(&rho)?;
        worst = worst.max(direct.diff_norm(&via_isometry));
    }
    Ok(worst)
}

/// All realizations of the optimal machine for one dimension.
#[derive(Debug, Clone)]
pub struct OptimalTransposeMachine {
    d: usize,
    choi: ChoiOperator,
    kraus: KrausSet,
    isometry: StinespringIsometry,
}

impl OptimalTransposeMachine {
    pub fn new(d: usize) -> Self {
        let params = optimize_covariant(d);
        Self { d, choi: params.choi(), kraus: kraus_set(d), isometry: stinespring(d) }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn choi(&self) -> &ChoiOperator {
        &self.choi
    }

    pub fn kraus(&self) -> &KrausSet {
        &self.kraus
    }

    pub fn isometry(&self) -> &StinespringIsometry {
        &self.isometry
    }

    pub fn fidelity(&self) -> f64 {
        optimal_fidelity(self.d)
    }

    /// Apply the channel through the Choi representation.
    pub fn apply(&self, rho: &Matrix) -> Result<Matrix> {
        apply_choi(&self.choi, rho)
    }

    /// Reduced state of either clone after the cloning map.
    pub fn clone_marginal(&self, rho: &Matrix) -> Result<Matrix> {
        let clones = cloning_map(self.d, rho)?;
        partial_trace(&clones, self.d, self.d, TraceSide::First)
    }
}

/// Pointwise transposition fidelity `Tr[rho^T M(rho)]`.
pub fn pointwise_fidelity(rho: &Matrix, output: &Matrix) -> f64 {
    trace_product(&rho.transpose(), output).re
}
