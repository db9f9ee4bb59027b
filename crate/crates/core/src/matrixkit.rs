//! Dense complex linear algebra used throughout the crate.
//!
//! Composite spaces always put the subsystem `S` on the major (slow) index:
//! basis state `|s>|b>` sits at row `s * d_B + b`. [`tensor`] and
//! [`partial_trace`] share that convention.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Maximum tolerated entry of `M - M^dagger` for an operator to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending and
/// eigenvectors stored as orthonormal columns in the same order.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn from_real_diagonal(diag: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        diag.len(),
        diag.iter().map(|&x| c(x, 0.0)),
    ))
}

pub fn from_rows(rows: &[&[C64]]) -> CMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, cols, |i, j| rows[i][j])
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
}

pub fn pauli_x() -> CMatrix {
    from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> CMatrix {
    from_rows(&[&[c(0.0, 0.0), c(0.0, -1.0)], &[c(0.0, 1.0), c(0.0, 0.0)]])
}

pub fn pauli_z() -> CMatrix {
    from_real_diagonal(&[1.0, -1.0])
}

/// `|v><v|`
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn basis_vector(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = c(1.0, 0.0);
    v
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entry-wise deviation between two equally shaped matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_dim(m: &CMatrix, d: usize) -> Result<()> {
    let n = ensure_square(m)?;
    if n != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: n,
        });
    }
    Ok(())
}

pub fn hermitian_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && hermitian_asymmetry(m) <= tol
}

/// Checks Hermiticity against [`HERMITIAN_TOL`] and returns `(M + M^dagger)/2`.
pub fn symmetrized(m: &CMatrix) -> Result<CMatrix> {
    ensure_square(m)?;
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let asymmetry = hermitian_asymmetry(m);
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok((m + m.adjoint()).scale(0.5))
}

pub fn eig_hermitian(m: &CMatrix) -> Result<Eigen> {
    let sym = symmetrized(m)?;
    let n = sym.nrows();
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(sym, EIG_EPS, EIG_MAX_ITER).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok(Eigen { values, vectors })
}

pub fn eigenvalues_hermitian(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(eig_hermitian(m)?.values)
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Kronecker product, `a`'s index major.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    S,
    B,
}

pub fn partial_trace(m: &CMatrix, d_s: usize, d_b: usize, keep: Keep) -> Result<CMatrix> {
    ensure_dim(m, d_s * d_b)?;
    let out = match keep {
        Keep::S => CMatrix::from_fn(d_s, d_s, |i, j| {
            (0..d_b).map(|b| m[(i * d_b + b, j * d_b + b)]).sum()
        }),
        Keep::B => CMatrix::from_fn(d_b, d_b, |i, j| {
            (0..d_s).map(|s| m[(s * d_b + i, s * d_b + j)]).sum()
        }),
    };
    Ok(out)
}

/// Reduced state on `S` of the pure state `psi` in `S (x) B`, computed
/// as `Psi Psi^dagger` with `Psi` the `d_s x d_b` reshaping of `psi`.
pub fn reduce_pure(psi: &CVector, d_s: usize, d_b: usize) -> Result<CMatrix> {
    if psi.len() != d_s * d_b {
        return Err(Error::DimensionMismatch {
            expected: d_s * d_b,
            found: psi.len(),
        });
    }
    let reshaped = CMatrix::from_fn(d_s, d_b, |s, b| psi[s * d_b + b]);
    Ok(&reshaped * reshaped.adjoint())
}

/// `tr|M|` for Hermitian `M`.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    Ok(eigenvalues_hermitian(m)?.iter().map(|x| x.abs()).sum())
}

/// `tr(A^dagger B)`
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// JSON encoding of complex matrices and vectors as nested `[re, im]`
/// pairs, row-major.
pub mod json {
    use super::{c, CMatrix, CVector};
    use crate::error::{Error, Result};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub type Pair = [f64; 2];

    pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<Pair>> {
        (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                    .collect()
            })
            .collect()
    }

    pub fn rows_to_matrix(rows: &[Vec<Pair>]) -> Result<CMatrix> {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != cols) {
            return Err(Error::config("matrix", "ragged rows"));
        }
        let m = CMatrix::from_fn(r, cols, |i, j| c(rows[i][j][0], rows[i][j][1]));
        if !super::is_finite(&m) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn vector_to_pairs(v: &CVector) -> Vec<Pair> {
        v.iter().map(|z| [z.re, z.im]).collect()
    }

    pub fn pairs_to_vector(pairs: &[Pair]) -> CVector {
        CVector::from_iterator(pairs.len(), pairs.iter().map(|p| c(p[0], p[1])))
    }

    /// `#[serde(with = "matrixkit::json::matrix")]`
    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
            matrix_to_rows(m).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
            let rows = Vec::<Vec<Pair>>::deserialize(d)?;
            rows_to_matrix(&rows).map_err(serde::de::Error::custom)
        }
    }

    pub mod vector {
        use super::*;

        pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
            vector_to_pairs(v).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
            let pairs = Vec::<Pair>::deserialize(d)?;
            Ok(pairs_to_vector(&pairs))
        }
    }
}
