//! Unitary realization of the optimal transposition machine.
//!
//! Three families of isometries from `H` into `H ⊗ H ⊗ H` (index arithmetic
//! mod `d`):
//!
//! ```text
//! V_{p,p}      = sum_k |k, k+p, k+p><k+p|
//! V^(S)_{p,q}  = (1/sqrt2) sum_k |k>(|k+p, k+q> + |k+q, k+p>)<k+q|,  p < q
//! V^(A)_{p,q}  = (1/sqrt2) sum_k |k>(|k+p, k+q> - |k+q, k+p>)<k+q|,  p < q
//! ```
//!
//! are mutually orthogonal, so pairing them with the matching symmetric and
//! antisymmetric ancilla bras assembles a unitary `U` on `H^{⊗3}`. Feeding
//! the fixed totally symmetric ancilla `|phi>` and tracing out systems 2,3
//! recovers the optimal transpose approximation; tracing out system 1
//! recovers the optimal 1-to-2 cloner. Basis ordering everywhere is
//! `|i>|j>|k> -> i d^2 + j d + k` with the input state on system 1.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::linalg::{
    cr, kron, pair_index, partial_trace, sym_antisym_projectors, triple_index, Matrix, TraceSide,
};
use crate::{Error, Result};

/// Which of the three isometry families a member belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Diagonal,
    Symmetric,
    Antisymmetric,
}

/// One member of an isometry family, a `d^3 x d` matrix.
#[derive(Debug, Clone)]
pub struct IsometryFamily {
    pub d: usize,
    pub kind: FamilyKind,
    pub p: usize,
    pub q: usize,
    pub matrix: Matrix,
}

impl IsometryFamily {
    /// `||V^dag V - I||_F`.
    pub fn isometry_residual(&self) -> f64 {
        self.matrix
            .adjoint()
            .mul(&self.matrix)
            .diff_norm(&Matrix::identity(self.d))
    }
}

/// Unnormalized column pattern: entries in {0, +-1}. The diagonal family is
/// already normalized; symmetric/antisymmetric members need `1/sqrt2`.
fn family_pattern(d: usize, kind: FamilyKind, p: usize, q: usize) -> Matrix {
    let mut m = Matrix::zeros(d * d * d, d);
    for k in 0..d {
        match kind {
            FamilyKind::Diagonal => {
                let kp = (k + p) % d;
                m.set(triple_index(k, kp, kp, d), kp, cr(1.0));
            }
            FamilyKind::Symmetric | FamilyKind::Antisymmetric => {
                let kp = (k + p) % d;
                let kq = (k + q) % d;
                let sign = if kind == FamilyKind::Symmetric { 1.0 } else { -1.0 };
                let col = kq;
                let row_a = triple_index(k, kp, kq, d);
                let row_b = triple_index(k, kq, kp, d);
                m.set(row_a, col, m.get(row_a, col) + cr(1.0));
                m.set(row_b, col, m.get(row_b, col) + cr(sign));
            }
        }
    }
    m
}

fn check_indices(d: usize, kind: FamilyKind, p: usize, q: usize) -> Result<()> {
    if p >= d || q >= d {
        return Err(Error::IndexOutOfRange(format!(
            "family indices ({p}, {q}) must lie below d = {d}"
        )));
    }
    match kind {
        FamilyKind::Diagonal if p != q => Err(Error::IndexOutOfRange(format!(
            "diagonal member takes equal indices, got ({p}, {q})"
        ))),
        FamilyKind::Symmetric | FamilyKind::Antisymmetric if p >= q => {
            Err(Error::IndexOutOfRange(format!(
                "off-diagonal member needs p < q, got ({p}, {q})"
            )))
        }
        _ => Ok(()),
    }
}

/// Build one family member.
pub fn build_family(d: usize, kind: FamilyKind, p: usize, q: usize) -> Result<IsometryFamily> {
    check_indices(d, kind, p, q)?;
    let pattern = family_pattern(d, kind, p, q);
    let matrix = match kind {
        FamilyKind::Diagonal => pattern,
        _ => pattern.scale_real(FRAC_1_SQRT_2),
    };
    Ok(IsometryFamily { d, kind, p, q, matrix })
}

/// The unitary dilation `U` on `H^{⊗3}` together with the fixed symmetric
/// ancilla `|phi>` on systems 2 and 3.
#[derive(Debug, Clone)]
pub struct UnitaryDilation {
    d: usize,
    u: Matrix,
    phi: Matrix,
}

impl UnitaryDilation {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn unitary(&self) -> &Matrix {
        &self.u
    }

    /// Ancilla state as a `d^2 x 1` column.
    pub fn ancilla(&self) -> &Matrix {
        &self.phi
    }

    /// `max(||U^dag U - I||_F, ||U U^dag - I||_F)`.
    pub fn unitarity_residual(&self) -> f64 {
        let id = Matrix::identity(self.d * self.d * self.d);
        let left = self.u.adjoint().mul(&self.u).diff_norm(&id);
        let right = self.u.mul(&self.u.adjoint()).diff_norm(&id);
        left.max(right)
    }

    /// `U (rho ⊗ |phi><phi|) U^dag` on the full three-system space.
    pub fn evolve(&self, rho: &Matrix) -> Result<Matrix> {
        if rho.rows() != self.d || rho.cols() != self.d {
            return Err(Error::Dimension(format!(
                "dilation input must be {0}x{0}, got {1}x{2}",
                self.d,
                rho.rows(),
                rho.cols()
            )));
        }
        let ancilla = crate::linalg::outer(&self.phi, &self.phi);
        Ok(kron(rho, &ancilla).conjugate_by(&self.u))
    }

    /// Optimal transpose approximation: trace out systems 2 and 3.
    pub fn transpose_state(&self, rho: &Matrix) -> Result<Matrix> {
        let evolved = self.evolve(rho)?;
        partial_trace(&evolved, self.d, self.d * self.d, TraceSide::Second)
    }

    /// Optimal 1-to-2 cloner: trace out system 1.
    pub fn clone_state(&self, rho: &Matrix) -> Result<Matrix> {
        let evolved = self.evolve(rho)?;
        partial_trace(&evolved, self.d, self.d * self.d, TraceSide::First)
    }
}

/// Assemble the three-system unitary
/// `U = sum_p V_{p,p} ⊗ <pp| + sum_{p<q} V^(S) ⊗ (<pq|+<qp|)/sqrt2
///    + sum_{p<q} V^(A) ⊗ (<pq|-<qp|)/sqrt2`.
///
/// The two `1/sqrt2` factors of each off-diagonal term are combined into an
/// exact scalar `1/2` on integer patterns, so interference is exact: for
/// `d = 2` the result is a 0/1 matrix with integer equality.
pub fn build_unitary(d: usize) -> Result<UnitaryDilation> {
    if d < 2 {
        return Err(Error::Dimension(
            "unitary dilation needs d >= 2 (the off-diagonal families are empty at d = 1)".into(),
        ));
    }
    let dd = d * d;
    let mut u = Matrix::zeros(d * dd, d * dd);
    let bra = |a: usize, b: usize| {
        let mut row = Matrix::zeros(1, dd);
        row.set(0, pair_index(a, b, d), cr(1.0));
        row
    };
    for p in 0..d {
        let vpp = family_pattern(d, FamilyKind::Diagonal, p, p);
        u.add_assign(&kron(&vpp, &bra(p, p)));
    }
    for p in 0..d {
        for q in (p + 1)..d {
            let vs = family_pattern(d, FamilyKind::Symmetric, p, q);
            let va = family_pattern(d, FamilyKind::Antisymmetric, p, q);
            let bra_sym = bra(p, q).add(&bra(q, p));
            let bra_anti = bra(p, q).sub(&bra(q, p));
            u.add_assign(&kron(&vs, &bra_sym).scale_real(0.5));
            u.add_assign(&kron(&va, &bra_anti).scale_real(0.5));
        }
    }
    let phi = ancilla_state(d)?;
    Ok(UnitaryDilation { d, u, phi })
}

/// The fixed totally symmetric ancilla
/// `|phi> = sqrt(2/(d+1)) P_S sum_r |0>|r>`, normalized.
pub fn ancilla_state(d: usize) -> Result<Matrix> {
    if d < 2 {
        return Err(Error::Dimension("ancilla state needs d >= 2".into()));
    }
    let (ps, _) = sym_antisym_projectors(d);
    let mut seed = Matrix::zeros(d * d, 1);
    for r in 0..d {
        seed.set(pair_index(0, r, d), 0, cr(1.0));
    }
    let phi = ps.matvec(&seed).scale_real((2.0 / (d as f64 + 1.0)).sqrt());
    Ok(phi)
}

/// Spec-level convenience: build the dilation and extract the transpose.
pub fn transpose_via_dilation(d: usize, rho: &Matrix) -> Result<Matrix> {
    build_unitary(d)?.transpose_state(rho)
}

/// Spec-level convenience: build the dilation and extract the cloner.
pub fn clone_via_dilation(d: usize, rho: &Matrix) -> Result<Matrix> {
    build_unitary(d)?.clone_state(rho)
}

/// All members of all three families for a dimension, in a deterministic
/// order: diagonals by `p`, then symmetric, then antisymmetric by `(p, q)`.
pub fn all_family_members(d: usize) -> Vec<IsometryFamily> {
    let mut members = Vec::new();
    for p in 0..d {
        members.push(build_family(d, FamilyKind::Diagonal, p, p).expect("valid indices"));
    }
    for kind in [FamilyKind::Symmetric, FamilyKind::Antisymmetric] {
        for p in 0..d {
            for q in (p + 1)..d {
                members.push(build_family(d, kind, p, q).expect("valid indices"));
            }
        }
    }
    members
}

/// Position of the single 1 in each row of the `d = 2` unitary.
pub const GOLDEN_U2_ONE_COLUMNS: [usize; 8] = [0, 5, 6, 7, 3, 2, 1, 4];

/// The reference 8x8 unitary for qubits as an explicit 0/1 matrix.
pub fn golden_unitary_d2() -> Matrix {
    Matrix::from_fn(8, 8, |i, j| {
        if GOLDEN_U2_ONE_COLUMNS[i] == j {
            cr(1.0)
        } else {
            cr(0.0)
        }
    })
}

/// The reference qubit ancilla `(2, 1, 1, 0)/sqrt(6)`.
pub fn golden_ancilla_d2() -> Matrix {
    let norm = 6.0f64.sqrt();
    Matrix::new(
        4,
        1,
        vec![cr(2.0 / norm), cr(1.0 / norm), cr(1.0 / norm), cr(0.0)],
    )
    .expect("static shape")
}
