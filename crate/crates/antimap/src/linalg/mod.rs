//! Dense complex linear algebra and the operator/vector (double-ket) calculus.
//!
//! Everything is built on [`Matrix`], a row-major dense matrix of `Complex64`
//! entries. Bipartite indices flatten lexicographically: the pair `(i, j)` on
//! a `d1 x d2` space maps to `i * d2 + j`, so the first factor varies slowest.
//! That convention is load-bearing: it is what makes `dket` satisfy
//! `(A ⊗ C)|B>> = |A B C^T>>` and it fixes the basis ordering of every
//! operator downstream.

mod eig;
mod expm;
mod random;

pub use eig::{herm_eig, herm_eig_with_tol, HermitianSpectrum};
pub use expm::matrix_exp;
pub use random::{
    haar_random_ket, haar_random_state, haar_random_state_with, haar_random_unitary, seeded_rng,
    stream_rng,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, DEFAULT_TOL};

/// Shorthand for a complex scalar.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Shorthand for a real scalar promoted to complex.
#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Flatten a bipartite index pair, first factor slowest.
#[inline]
pub fn pair_index(i: usize, j: usize, d2: usize) -> usize {
    i * d2 + j
}

/// Flatten a tripartite index, first factor slowest.
#[inline]
pub fn triple_index(i: usize, j: usize, k: usize, d: usize) -> usize {
    (i * d + j) * d + k
}

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSide {
    First,
    Second,
}

/// Dense complex matrix, row-major.
///
/// Serializes to the interchange schema
/// `{"rows": r, "cols": c, "data": [[re, im], ...]}` with `data` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl From<Matrix> for MatrixRepr {
    fn from(m: Matrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            data: m.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixRepr> for Matrix {
    type Error = String;

    fn try_from(repr: MatrixRepr) -> std::result::Result<Self, String> {
        let entries = repr.data.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        Matrix::new(repr.rows, repr.cols, entries).map_err(|e| e.to_string())
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, cr(1.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, cr(*v));
        }
        m
    }

    /// Column vector with a single 1 at `index`.
    pub fn basis_column(dim: usize, index: usize) -> Self {
        let mut m = Self::zeros(dim, 1);
        m.set(index, 0, cr(1.0));
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.entries[i * self.cols + j] = value;
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(cr(factor))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add_assign: shape mismatch");
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a += b;
        }
    }

    /// Matrix product. Skips exactly-zero left entries, which makes products
    /// with block-sparse operators (beam splitter, isometry families) cheap.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "mul: inner dimension mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows * rhs.cols];
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = &mut out[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, aik) in arow.iter().enumerate() {
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                let brow = rhs.row(k);
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += aik * b;
                }
            }
        }
        Self { rows: self.rows, cols: rhs.cols, entries: out }
    }

    /// `self * rhs` where `rhs` is a column vector.
    pub fn matvec(&self, rhs: &Self) -> Self {
        assert_eq!(rhs.cols, 1, "matvec: rhs must be a column");
        self.mul(rhs)
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace: non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "max_abs_diff: shape mismatch");
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn diff_norm(&self, rhs: &Self) -> f64 {
        self.sub(rhs).frobenius_norm()
    }

    /// `||M - M^dag||_F`.
    pub fn hermiticity_residual(&self) -> f64 {
        assert!(self.is_square(), "hermiticity_residual: non-square matrix");
        self.diff_norm(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_residual() <= tol * self.frobenius_norm().max(1.0)
    }

    /// Conjugation `U * self * U^dag`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.mul(self).mul(&u.adjoint())
    }

    /// Euclidean norm of a column vector.
    pub fn vector_norm(&self) -> f64 {
        assert_eq!(self.cols, 1, "vector_norm: not a column");
        self.frobenius_norm()
    }

    /// Rectangular block `[r0, r1) x [c0, c1)`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        assert!(r1 <= self.rows && c1 <= self.cols && r0 <= r1 && c0 <= c1);
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j))
    }
}

/// Outer product `v * w^dag` of two column vectors.
pub fn outer(v: &Matrix, w: &Matrix) -> Matrix {
    assert_eq!(v.cols(), 1);
    assert_eq!(w.cols(), 1);
    Matrix::from_fn(v.rows(), w.rows(), |i, j| v.get(i, 0) * w.get(j, 0).conj())
}

/// `Tr[a * b]` without forming the product.
pub fn trace_product(a: &Matrix, b: &Matrix) -> Complex64 {
    assert_eq!(a.cols(), b.rows());
    assert_eq!(b.cols(), a.rows());
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            sum += a.get(i, j) * b.get(j, i);
        }
    }
    sum
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(m: &Matrix) -> Result<f64> {
    let spectrum = herm_eig(m)?;
    Ok(spectrum.eigenvalues().iter().map(|l| l.abs()).sum())
}

/// Kronecker product: `(a ⊗ b)[(i*rb + k), (j*cb + l)] = a[i,j] * b[k,l]`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca) = (a.rows(), a.cols());
    let (rb, cb) = (b.rows(), b.cols());
    let mut out = Matrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a.get(i, j);
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out.set(i * rb + k, j * cb + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Partial trace of an operator on a `d1 x d2` bipartite space.
///
/// `TraceSide::First` returns the `d2 x d2` operator `Tr_1[m]`,
/// `TraceSide::Second` the `d1 x d1` operator `Tr_2[m]`.
pub fn partial_trace(m: &Matrix, d1: usize, d2: usize, which: TraceSide) -> Result<Matrix> {
    let dim = d1 * d2;
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::Dimension(format!(
            "partial_trace expects a {dim}x{dim} matrix for factors {d1}x{d2}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    match which {
        TraceSide::First => {
            let mut out = Matrix::zeros(d2, d2);
            for j in 0..d2 {
                for l in 0..d2 {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for i in 0..d1 {
                        sum += m.get(pair_index(i, j, d2), pair_index(i, l, d2));
                    }
                    out.set(j, l, sum);
                }
            }
            Ok(out)
        }
        TraceSide::Second => {
            let mut out = Matrix::zeros(d1, d1);
            for i in 0..d1 {
                for k in 0..d1 {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for j in 0..d2 {
                        sum += m.get(pair_index(i, j, d2), pair_index(k, j, d2));
                    }
                    out.set(i, k, sum);
                }
            }
            Ok(out)
        }
    }
}

/// The double-ket `|A>>`: entries of an operator read as a bipartite vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteVector {
    d1: usize,
    d2: usize,
    amplitudes: Vec<Complex64>,
}

impl BipartiteVector {
    pub fn new(d1: usize, d2: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != d1 * d2 {
            return Err(Error::Dimension(format!(
                "bipartite vector on {d1}x{d2} needs {} amplitudes, got {}",
                d1 * d2,
                amplitudes.len()
            )));
        }
        Ok(Self { d1, d2, amplitudes })
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    #[inline]
    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.amplitudes[pair_index(i, j, self.d2)]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Re-flatten into the operator whose entries are the amplitudes.
    pub fn to_operator(&self) -> Matrix {
        Matrix { rows: self.d1, cols: self.d2, entries: self.amplitudes.clone() }
    }

    /// View as a `(d1*d2) x 1` column.
    pub fn to_column(&self) -> Matrix {
        Matrix { rows: self.d1 * self.d2, cols: 1, entries: self.amplitudes.clone() }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Double-ket of an operator: `dket(A)` has amplitudes `A[i,j]` at `(i, j)`.
pub fn dket(a: &Matrix) -> BipartiteVector {
    BipartiteVector { d1: a.rows(), d2: a.cols(), amplitudes: a.entries().to_vec() }
}

/// Swap operator `E` on `H ⊗ H`: `E |phi>|psi> = |psi>|phi>`.
pub fn swap_operator(d: usize) -> Matrix {
    let mut e = Matrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            e.set(pair_index(i, j, d), pair_index(j, i, d), cr(1.0));
        }
    }
    e
}

/// Projectors `(P_S, P_A)` onto the symmetric and antisymmetric subspaces,
/// `P_S = (I + E)/2`, `P_A = (I - E)/2`.
pub fn sym_antisym_projectors(d: usize) -> (Matrix, Matrix) {
    let id = Matrix::identity(d * d);
    let e = swap_operator(d);
    let ps = id.add(&e).scale_real(0.5);
    let pa = id.sub(&e).scale_real(0.5);
    (ps, pa)
}

/// Checks `||M - M^dag||_F` against an absolute-per-norm tolerance and fails
/// with [`Error::NotHermitian`] when exceeded.
pub fn require_hermitian(m: &Matrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "hermitian check expects a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let residual = m.hermiticity_residual();
    if residual > tol * m.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

/// Convenience wrapper using [`DEFAULT_TOL`].
pub fn require_hermitian_default(m: &Matrix) -> Result<()> {
    require_hermitian(m, DEFAULT_TOL)
}
