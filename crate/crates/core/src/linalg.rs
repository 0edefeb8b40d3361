//! Dense complex linear algebra for Hilbert spaces of up to six qubits.
//!
//! Basis convention used throughout the crate: qubit 0 is the most
//! significant bit of a basis index, i.e. `b = sum_i q_i * 2^(n-1-i)`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest matrix dimension accepted by [`kron`].
pub const MAX_DIM: usize = 1 << 12;

/// Hermiticity tolerance on `max |H - H^dagger|`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues above this (negative) threshold are treated as numerical
/// noise and clamped to zero.
pub const NEG_EIG_CLAMP: f64 = -1e-10;

pub const DEFAULT_EIG_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major data; fails on a length mismatch or
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Outer product `|v><v|`.
    pub fn projector(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// `max_ij |a_ij - b_ij|`; infinite on a shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |H - H^dagger|` for a square matrix.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                err = err.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        err
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Determinant by partial-pivoted LU.
    pub fn determinant(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("determinant of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .unwrap_or(col);
            if a[(pivot, col)] == ZERO {
                return Ok(ZERO);
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for r in col + 1..n {
                let factor = a[(r, col)] / p;
                for j in col..n {
                    let v = a[(col, j)];
                    a[(r, j)] -= factor * v;
                }
            }
        }
        Ok(det)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli matrices, mostly for tests and the spin-flip in the Wootters formula.
pub mod pauli {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        let i = Complex64::new(0.0, 1.0);
        ComplexMatrix::from_vec(2, 2, vec![ZERO, -i, i, ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows.checked_mul(b.rows).ok_or(Error::TooLarge(usize::MAX))?;
    let cols = a.cols.checked_mul(b.cols).ok_or(Error::TooLarge(usize::MAX))?;
    if rows > MAX_DIM || cols > MAX_DIM {
        return Err(Error::TooLarge(rows.max(cols)));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    }))
}

/// Spectrum of a Hermitian matrix: ascending eigenvalues and the matching
/// unit eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `V diag(f(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let w: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * w[k] * v[(j, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        let v = &self.eigenvectors;
        (0..v.rows()).map(|i| v[(i, k)]).collect()
    }
}

fn max_off_diagonal(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq`, then applies
/// a real Givens rotation that zeroes it. Sweeps stop once every
/// off-diagonal magnitude is at most `tol * max(1, |H|_F)`.
pub fn hermitian_eig(h: &ComplexMatrix, tol: f64) -> Result<EigenDecomposition> {
    hermitian_eig_with_sweeps(h, tol, DEFAULT_MAX_SWEEPS)
}

pub fn hermitian_eig_with_sweeps(
    h: &ComplexMatrix,
    tol: f64,
    max_sweeps: usize,
) -> Result<EigenDecomposition> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            h.rows, h.cols
        )));
    }
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let herr = h.hermiticity_error();
    if herr > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herr));
    }
    let n = h.rows;
    // Symmetrize so the rotations act on an exactly Hermitian matrix.
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (h[(i, j)] + h[(j, i)].conj()));
    let mut v = ComplexMatrix::identity(n);
    let threshold = tol * a.frobenius_norm().max(1.0);

    let mut sweeps = 0;
    loop {
        let off = max_off_diagonal(&a);
        if off <= threshold {
            break;
        }
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let z = a[(p, q)];
                let r = z.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = z / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = diag(1, e^{-i phi}) * [[c, s], [-s, c]] in the (p, q) plane.
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -s * phase.conj();
                let jqq = c * phase.conj();

                // A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                // A <- J^dagger A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(app - t * r, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * r, 0.0);
                // V <- V J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eig(h, DEFAULT_EIG_TOL)?.eigenvalues)
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero.
pub fn sqrt_psd(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h, DEFAULT_EIG_TOL)?;
    if let Some(&min) = eig.eigenvalues.first() {
        if min < NEG_EIG_CLAMP {
            return Err(Error::NegativeEigenvalue(min));
        }
    }
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()))
}

fn check_qubit_dim(rho: &ComplexMatrix, n_qubits: usize) -> Result<usize> {
    if n_qubits == 0 || n_qubits > 12 {
        return Err(Error::UnsupportedSize(n_qubits));
    }
    let dim = 1usize << n_qubits;
    if rho.rows != dim || rho.cols != dim {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for {n_qubits} qubits",
            rho.rows, rho.cols
        )));
    }
    Ok(dim)
}

/// Validates a list of qubit indices (distinct, each below `n_qubits`).
pub fn check_indices(indices: &[usize], n_qubits: usize) -> Result<()> {
    let mut seen = vec![false; n_qubits];
    for &i in indices {
        if i >= n_qubits {
            return Err(Error::IndexOutOfRange { index: i, n_qubits });
        }
        if seen[i] {
            return Err(Error::DuplicateIndex(i));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Reduced operator on the qubits in `keep`, in the listed order (the first
/// listed qubit becomes the most significant bit of the result).
pub fn partial_trace(rho: &ComplexMatrix, n_qubits: usize, keep: &[usize]) -> Result<ComplexMatrix> {
    check_qubit_dim(rho, n_qubits)?;
    check_indices(keep, n_qubits)?;
    let traced: Vec<usize> = (0..n_qubits).filter(|i| !keep.contains(i)).collect();
    let bit = |q: usize| 1usize << (n_qubits - 1 - q);
    let spread = |pattern: usize, qubits: &[usize]| -> usize {
        let k = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(pos, _)| pattern >> (k - 1 - pos) & 1 == 1)
            .map(|(_, &q)| bit(q))
            .sum()
    };
    let kept_offsets: Vec<usize> = (0..1usize << keep.len()).map(|p| spread(p, keep)).collect();
    let traced_offsets: Vec<usize> = (0..1usize << traced.len()).map(|p| spread(p, &traced)).collect();

    let dk = kept_offsets.len();
    Ok(ComplexMatrix::from_fn(dk, dk, |i, j| {
        traced_offsets
            .iter()
            .map(|&t| rho[(kept_offsets[i] + t, kept_offsets[j] + t)])
            .sum()
    }))
}

/// Reduced density matrix of a pure state `|psi>` on `keep`, computed
/// without forming the full projector.
pub fn partial_trace_pure(psi: &[Complex64], n_qubits: usize, keep: &[usize]) -> Result<ComplexMatrix> {
    if n_qubits == 0 || n_qubits > 12 || psi.len() != 1usize << n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for {n_qubits} qubits",
            psi.len()
        )));
    }
    check_indices(keep, n_qubits)?;
    let traced: Vec<usize> = (0..n_qubits).filter(|i| !keep.contains(i)).collect();
    let bit = |q: usize| 1usize << (n_qubits - 1 - q);
    let spread = |pattern: usize, qubits: &[usize]| -> usize {
        let k = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(pos, _)| pattern >> (k - 1 - pos) & 1 == 1)
            .map(|(_, &q)| bit(q))
            .sum()
    };
    let kept_offsets: Vec<usize> = (0..1usize << keep.len()).map(|p| spread(p, keep)).collect();
    let traced_offsets: Vec<usize> = (0..1usize << traced.len()).map(|p| spread(p, &traced)).collect();
    let dk = kept_offsets.len();
    Ok(ComplexMatrix::from_fn(dk, dk, |i, j| {
        traced_offsets
            .iter()
            .map(|&t| psi[kept_offsets[i] + t] * psi[kept_offsets[j] + t].conj())
            .sum()
    }))
}
