//! Displacement-covariant transposition for a single bosonic mode at a
//! finite Fock cutoff.
//!
//! Covariance under the Weyl-Heisenberg group reduces the Choi operator to
//! the beam-splitter form `R = (1/2) V (xi ⊗ I) V^dag` with
//! `V = exp[pi/4 (a^dag b - a b^dag)]`, and the optimum is reached at a pure
//! `xi = |chi><chi|` where `|chi>` is the top eigenvector of the seed-built
//! operator `Tr_2[V^dag (rho^T ⊗ rho^T) V]`. The fidelity is half that top
//! eigenvalue; for coherent seeds it equals 1/2 up to truncation effects.
//!
//! Everything here works on an `N`-level truncation of the mode. Truncation
//! is tracked through explicit leakage diagnostics (the ideal state's weight
//! beyond the cutoff) rather than hidden renormalization.

use num_complex::Complex64;

use crate::channels::{apply_choi, ChoiOperator};
use crate::linalg::{
    c, cr, herm_eig_with_tol, kron, matrix_exp, outer, pair_index, partial_trace, trace_product,
    HermitianSpectrum, Matrix, TraceSide,
};
use crate::{Error, Result};

/// Truncation context: cutoff dimension and acceptable leakage.
#[derive(Debug, Clone, Copy)]
pub struct FockSpace {
    pub cutoff: usize,
    pub tol_leak: f64,
}

impl FockSpace {
    pub const DEFAULT_TOL_LEAK: f64 = 1e-8;

    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::Dimension("Fock cutoff must be at least 2".into()));
        }
        Ok(Self { cutoff, tol_leak: Self::DEFAULT_TOL_LEAK })
    }

    pub fn with_tol_leak(cutoff: usize, tol_leak: f64) -> Result<Self> {
        Ok(Self { tol_leak, ..Self::new(cutoff)? })
    }

    pub fn ladder(&self) -> (Matrix, Matrix) {
        ladder(self.cutoff)
    }

    pub fn beam_splitter(&self) -> Matrix {
        beam_splitter(self.cutoff)
    }

    /// Displacement operator, rejected when the ideal coherent state keeps
    /// more than `tol_leak` of its weight above the cutoff.
    pub fn displacement(&self, alpha: Complex64) -> Result<Matrix> {
        let leakage = coherent_tail_weight(alpha, self.cutoff);
        if leakage > self.tol_leak {
            return Err(Error::Leakage { leakage, tol: self.tol_leak });
        }
        Ok(displacement(alpha, self.cutoff))
    }

    /// Squeezing operator with the analogous leakage guard.
    pub fn squeezing(&self, r: f64) -> Result<Matrix> {
        let leakage = squeezed_tail_weight(r, self.cutoff);
        if leakage > self.tol_leak {
            return Err(Error::Leakage { leakage, tol: self.tol_leak });
        }
        Ok(squeezing(r, self.cutoff))
    }

    pub fn validate_seed(&self, seed: &CvSeed) -> Result<()> {
        if seed.rho.rows() != self.cutoff {
            return Err(Error::Dimension(format!(
                "seed lives on {} levels, space has cutoff {}",
                seed.rho.rows(),
                self.cutoff
            )));
        }
        if seed.leakage > self.tol_leak {
            return Err(Error::Leakage { leakage: seed.leakage, tol: self.tol_leak });
        }
        Ok(())
    }
}

/// Truncated annihilation and creation operators `(a, a^dag)`:
/// `a|n> = sqrt(n)|n-1>`.
pub fn ladder(n: usize) -> (Matrix, Matrix) {
    assert!(n >= 2, "cutoff must be at least 2");
    let mut a = Matrix::zeros(n, n);
    for level in 1..n {
        a.set(level - 1, level, cr((level as f64).sqrt()));
    }
    let a_dag = a.adjoint();
    (a, a_dag)
}

/// Displacement `D(alpha) = exp(alpha a^dag - alpha^* a)` on the truncated
/// space. The truncated generator stays anti-Hermitian, so the result is
/// exactly unitary; truncation shows up as deviation from the ideal
/// coherent amplitudes instead.
pub fn displacement(alpha: Complex64, n: usize) -> Matrix {
    let (a, a_dag) = ladder(n);
    let generator = a_dag.scale(alpha).sub(&a.scale(alpha.conj()));
    matrix_exp(&generator)
}

/// Squeezing `S(r) = exp((r/2)(a^2 - a^dag^2))` on the truncated space.
pub fn squeezing(r: f64, n: usize) -> Matrix {
    let (a, a_dag) = ladder(n);
    let generator = a.mul(&a).sub(&a_dag.mul(&a_dag)).scale_real(r / 2.0);
    matrix_exp(&generator)
}

/// 50/50 beam splitter `V = exp[pi/4 (a^dag b - a b^dag)]` on two truncated
/// modes, `n^2 x n^2` in the `|n1>|n2>` basis.
///
/// The generator preserves total photon number, so `V` is assembled block by
/// block over total-photon sectors. Each block exponential is orthogonal,
/// which keeps the whole matrix exactly unitary at any cutoff.
pub fn beam_splitter(n: usize) -> Matrix {
    assert!(n >= 2, "cutoff must be at least 2");
    let theta = std::f64::consts::FRAC_PI_4;
    let mut v = Matrix::zeros(n * n, n * n);
    for total in 0..=(2 * n - 2) {
        let k_min = total.saturating_sub(n - 1);
        let k_max = total.min(n - 1);
        let size = k_max - k_min + 1;
        let mut block = Matrix::zeros(size, size);
        for x in 0..size.saturating_sub(1) {
            let k = k_min + x;
            // <k+1, t-k-1| a^dag b |k, t-k> = sqrt(k+1) sqrt(t-k)
            let coupling = theta * ((k + 1) as f64 * (total - k) as f64).sqrt();
            block.set(x + 1, x, cr(coupling));
            block.set(x, x + 1, cr(-coupling));
        }
        let exp_block = matrix_exp(&block);
        for x in 0..size {
            for y in 0..size {
                let value = exp_block.get(x, y);
                if value.re == 0.0 && value.im == 0.0 {
                    continue;
                }
                let kx = k_min + x;
                let ky = k_min + y;
                v.set(
                    pair_index(kx, total - kx, n),
                    pair_index(ky, total - ky, n),
                    value,
                );
            }
        }
    }
    v
}

/// Weight of the ideal coherent state `|alpha>` above the cutoff.
pub fn coherent_tail_weight(alpha: Complex64, n: usize) -> f64 {
    let x = alpha.norm_sqr();
    let mut term = (-x).exp();
    let mut kept = 0.0;
    for k in 0..n {
        if k > 0 {
            term *= x / k as f64;
        }
        kept += term;
    }
    (1.0 - kept).max(0.0)
}

/// Weight of the ideal squeezed vacuum above the cutoff.
pub fn squeezed_tail_weight(r: f64, n: usize) -> f64 {
    // photon-number distribution of squeezed vacuum:
    // P(0) = 1/cosh r, P(2m+2) = P(2m) tanh^2(r) (2m+1)/(2m+2)
    let t2 = r.tanh().powi(2);
    let mut p = 1.0 / r.cosh();
    let mut kept = 0.0;
    let mut m = 0usize;
    while 2 * m < n {
        if m > 0 {
            p *= t2 * (2.0 * m as f64 - 1.0) / (2.0 * m as f64);
        }
        kept += p;
        m += 1;
    }
    (1.0 - kept).max(0.0)
}

/// How a seed state was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedLabel {
    Vacuum,
    Coherent(Complex64),
    Squeezed(f64),
    Custom,
}

/// Reference state whose displacement orbit the covariant map serves.
#[derive(Debug, Clone)]
pub struct CvSeed {
    rho: Matrix,
    label: SeedLabel,
    leakage: f64,
}

impl CvSeed {
    pub fn vacuum(n: usize) -> Self {
        let mut rho = Matrix::zeros(n, n);
        rho.set(0, 0, cr(1.0));
        Self { rho, label: SeedLabel::Vacuum, leakage: 0.0 }
    }

    pub fn coherent(alpha: Complex64, n: usize) -> Self {
        let ket = displacement(alpha, n).matvec(&Matrix::basis_column(n, 0));
        Self {
            rho: outer(&ket, &ket),
            label: SeedLabel::Coherent(alpha),
            leakage: coherent_tail_weight(alpha, n),
        }
    }

    pub fn squeezed(r: f64, n: usize) -> Self {
        let ket = squeezing(r, n).matvec(&Matrix::basis_column(n, 0));
        Self {
            rho: outer(&ket, &ket),
            label: SeedLabel::Squeezed(r),
            leakage: squeezed_tail_weight(r, n),
        }
    }

    /// Arbitrary density matrix in the Fock basis. It must be Hermitian and
    /// positive; deviation of the trace from one is recorded as leakage.
    pub fn custom(rho: Matrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::Dimension("seed must be square".into()));
        }
        let spectrum = herm_eig_with_tol(&rho, 1e-8)?;
        let min = *spectrum.eigenvalues().last().expect("nonempty spectrum");
        if min < -1e-8 {
            return Err(Error::InvalidState(format!(
                "seed has negative eigenvalue {min:.3e}"
            )));
        }
        let leakage = (rho.trace().re - 1.0).abs();
        Ok(Self { rho, label: SeedLabel::Custom, leakage })
    }

    pub fn rho(&self) -> &Matrix {
        &self.rho
    }

    pub fn label(&self) -> SeedLabel {
        self.label
    }

    /// Ideal-state weight beyond the cutoff (trace deficit for custom seeds).
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn cutoff(&self) -> usize {
        self.rho.rows()
    }
}

/// Parse the CLI seed grammar: `vacuum`, `coherent:<re>,<im>`, `squeezed:<r>`.
pub fn parse_seed_spec(spec: &str, n: usize) -> Result<CvSeed> {
    let bad = || Error::SeedSpec(spec.to_string());
    if spec == "vacuum" {
        return Ok(CvSeed::vacuum(n));
    }
    if let Some(rest) = spec.strip_prefix("coherent:") {
        let (re, im) = rest.split_once(',').ok_or_else(bad)?;
        let re: f64 = re.trim().parse().map_err(|_| bad())?;
        let im: f64 = im.trim().parse().map_err(|_| bad())?;
        return Ok(CvSeed::coherent(c(re, im), n));
    }
    if let Some(rest) = spec.strip_prefix("squeezed:") {
        let r: f64 = rest.trim().parse().map_err(|_| bad())?;
        return Ok(CvSeed::squeezed(r, n));
    }
    Err(bad())
}

/// The seed-built operator `Tr_2[V^dag (rho^T ⊗ rho^T) V]` whose top
/// eigenvector determines the optimal map.
pub fn reduced_seed_operator(seed: &CvSeed, n: usize) -> Result<Matrix> {
    if seed.cutoff() != n {
        return Err(Error::Dimension(format!(
            "seed cutoff {} does not match requested cutoff {n}",
            seed.cutoff()
        )));
    }
    let v = beam_splitter(n);
    let rt = seed.rho.transpose();
    let x = kron(&rt, &rt);
    let b = v.adjoint().mul(&x);
    // Tr_2[B V] taken entry by entry; the full n^2 x n^2 product is never formed
    let mut t = Matrix::zeros(n, n);
    for m in 0..n {
        for mp in 0..n {
            let mut sum = Complex64::new(0.0, 0.0);
            for k in 0..n {
                let row = b.row(pair_index(m, k, n));
                let col = pair_index(mp, k, n);
                for (z, bz) in row.iter().enumerate() {
                    if bz.re == 0.0 && bz.im == 0.0 {
                        continue;
                    }
                    sum += bz * v.get(z, col);
                }
            }
            t.set(m, mp, sum);
        }
    }
    Ok(t)
}

/// The optimal covariant map for a seed: top eigenvector `chi`, its
/// eigenvalue, and the assembled Choi operator `(1/2) V (|chi><chi| ⊗ I) V^dag`.
#[derive(Debug, Clone)]
pub struct CvOptimalMap {
    chi: Matrix,
    lambda_max: f64,
    choi: ChoiOperator,
    eigenvalue_gap: f64,
}

impl CvOptimalMap {
    pub fn chi(&self) -> &Matrix {
        &self.chi
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn choi(&self) -> &ChoiOperator {
        &self.choi
    }

    /// Gap between the top two eigenvalues of the reduced seed operator;
    /// a small gap means the maximizer was selected by tie-break.
    pub fn eigenvalue_gap(&self) -> f64 {
        self.eigenvalue_gap
    }

    pub fn is_degenerate(&self, gap_tol: f64) -> bool {
        self.eigenvalue_gap < gap_tol
    }

    /// Fidelity reached on the seed orbit, `lambda_max / 2`.
    pub fn fidelity(&self) -> f64 {
        self.lambda_max / 2.0
    }

    pub fn cutoff(&self) -> usize {
        self.chi.rows()
    }

    /// Map with a caller-chosen normalized `chi`; `lambda_max` is its
    /// Rayleigh quotient on the seed's reduced operator, so `fidelity()`
    /// reports what this (generally suboptimal) choice achieves.
    pub fn with_chi(seed: &CvSeed, chi: &Matrix) -> Result<Self> {
        let n = seed.cutoff();
        if chi.rows() != n || chi.cols() != 1 {
            return Err(Error::Dimension(format!(
                "chi must be a {n}-component column, got {}x{}",
                chi.rows(),
                chi.cols()
            )));
        }
        let norm = chi.vector_norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidState(format!(
                "chi must be normalized, got norm {norm}"
            )));
        }
        let t = reduced_seed_operator(seed, n)?;
        let rayleigh = trace_product(&t, &outer(chi, chi)).re;
        Ok(Self {
            chi: chi.clone(),
            lambda_max: rayleigh,
            choi: assemble_choi(chi, n),
            eigenvalue_gap: f64::INFINITY,
        })
    }
}

/// `(1/2) V (|chi><chi| ⊗ I) V^dag` accumulated rank by rank: the middle
/// factor is `sum_k (chi ⊗ e_k)(chi ⊗ e_k)^dag`, so only `n` sparse
/// mat-vecs and outer products are needed.
fn assemble_choi(chi: &Matrix, n: usize) -> ChoiOperator {
    let v = beam_splitter(n);
    let mut matrix = Matrix::zeros(n * n, n * n);
    for k in 0..n {
        let mut column = Matrix::zeros(n * n, 1);
        for m in 0..n {
            column.set(pair_index(m, k, n), 0, chi.get(m, 0));
        }
        let w = v.matvec(&column);
        matrix.add_assign(&outer(&w, &w));
    }
    ChoiOperator::new(n, n, matrix.scale_real(0.5)).expect("square by construction")
}

// Gap below which the top eigenvalue counts as degenerate.
const GAP_TOL: f64 = 1e-10;

/// Pick the maximizing eigenvector; inside a degenerate top shell the choice
/// is made deterministic by maximal overlap with the lowest-index basis
/// vector that has any overlap at all.
fn pick_top_eigenvector(spectrum: &HermitianSpectrum, gap_tol: f64) -> (Matrix, f64) {
    let n = spectrum.eigenvalues().len();
    let top = spectrum.eigenvalue(0);
    let shell: Vec<usize> = (0..n)
        .filter(|&k| top - spectrum.eigenvalue(k) < gap_tol)
        .collect();
    let gap = if n > 1 { top - spectrum.eigenvalue(1) } else { f64::INFINITY };
    if shell.len() == 1 {
        return (spectrum.eigenvector(0), gap);
    }
    let dim = spectrum.eigenvectors().rows();
    for basis in 0..dim {
        // projection of |basis> onto the shell span
        let mut projection = Matrix::zeros(dim, 1);
        for &k in &shell {
            let vk = spectrum.eigenvector(k);
            let overlap = vk.get(basis, 0).conj();
            projection.add_assign(&vk.scale(overlap));
        }
        let norm = projection.vector_norm();
        if norm > 1e-8 {
            return (projection.scale_real(1.0 / norm), gap);
        }
    }
    (spectrum.eigenvector(0), gap)
}

/// Rotate the global phase so the largest-magnitude component is real and
/// positive (ties broken by lowest index).
fn fix_phase(chi: &Matrix) -> Matrix {
    let mut best = 0usize;
    let mut best_norm = 0.0f64;
    for i in 0..chi.rows() {
        let norm = chi.get(i, 0).norm();
        if norm > best_norm + 1e-12 {
            best_norm = norm;
            best = i;
        }
    }
    if best_norm == 0.0 {
        return chi.clone();
    }
    let z = chi.get(best, 0);
    chi.scale(z.conj() / z.norm())
}

/// Solve the seed eigenproblem and assemble the optimal map.
pub fn optimal_chi(seed: &CvSeed, n: usize) -> Result<CvOptimalMap> {
    let t = reduced_seed_operator(seed, n)?;
    let spectrum = herm_eig_with_tol(&t, 1e-8)?;
    let (chi, gap) = pick_top_eigenvector(&spectrum, GAP_TOL);
    let chi = fix_phase(&chi);
    Ok(CvOptimalMap {
        choi: assemble_choi(&chi, n),
        chi,
        lambda_max: spectrum.eigenvalue(0),
        eigenvalue_gap: gap,
    })
}

/// Fidelity of the map on the seed orbit,
/// `(1/2) Tr[(rho^T ⊗ rho^T) V (xi ⊗ I) V^dag] = Tr[(rho^T ⊗ rho^T) R]`.
pub fn cv_fidelity(seed: &CvSeed, map: &CvOptimalMap) -> Result<f64> {
    let n = map.cutoff();
    if seed.cutoff() != n {
        return Err(Error::Dimension(format!(
            "seed cutoff {} does not match map cutoff {n}",
            seed.cutoff()
        )));
    }
    let rt = seed.rho.transpose();
    Ok(trace_product(&kron(&rt, &rt), map.choi.matrix()).re)
}

/// Apply the map to a state, `M(sigma) = Tr_2[(I ⊗ sigma^T) R]`.
pub fn cv_apply(map: &CvOptimalMap, sigma: &Matrix) -> Result<Matrix> {
    apply_choi(&map.choi, sigma)
}

/// Covariance defect at displacement `alpha`, evaluated at the seed:
/// trace norm of `M(D rho D^dag) - D^* M(rho) D^T`. Zero in the untruncated
/// theory; decays with growing cutoff at fixed `alpha`.
pub fn covariance_residual_cv(map: &CvOptimalMap, seed: &CvSeed, alpha: Complex64) -> Result<f64> {
    let n = map.cutoff();
    if seed.cutoff() != n {
        return Err(Error::Dimension(format!(
            "seed cutoff {} does not match map cutoff {n}",
            seed.cutoff()
        )));
    }
    if alpha.norm() == 0.0 {
        return Ok(0.0);
    }
    let d = displacement(alpha, n);
    let displaced = seed.rho.conjugate_by(&d);
    let lhs = cv_apply(map, &displaced)?;
    let rhs = d.conj().mul(&cv_apply(map, &seed.rho)?).mul(&d.transpose());
    let diff = lhs.sub(&rhs);
    // outputs are Hermitian up to rounding; symmetrize before the trace norm
    let herm = diff.add(&diff.adjoint()).scale_real(0.5);
    crate::linalg::trace_norm_hermitian(&herm)
}

/// Residual of trace preservation restricted to the lowest `levels` photon
/// numbers. Truncation erodes `Tr_1[R] = I` from the top of the spectrum
/// down, so the residual is meaningful only on a low block; at level `j` it
/// decays like the tail of a negative binomial beyond `cutoff - j`.
pub fn choi_tp_residual_block(map: &CvOptimalMap, levels: usize) -> f64 {
    let n = map.cutoff();
    let levels = levels.min(n);
    let reduced = partial_trace(map.choi.matrix(), n, n, TraceSide::First)
        .expect("consistent dimensions by construction");
    reduced
        .block(0, levels, 0, levels)
        .diff_norm(&Matrix::identity(n).block(0, levels, 0, levels))
}
