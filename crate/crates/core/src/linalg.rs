//! Dense complex linear algebra for small quantum registers.
//!
//! Everything here is dense and row-major. The intended scale is a handful of
//! qubits (dimension up to a few thousand), so no sparse structure is used.

use std::fmt;
use std::ops::{Deref, Index, IndexMut, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named tolerances shared by every module.
pub mod tol {
    /// Algebraic identities (Hermiticity, trace, normalization).
    pub const ALGEBRAIC: f64 = 1e-10;
    /// Unitarity and pulse/gate equivalence after long products.
    pub const UNITARY: f64 = 1e-9;
    /// Smallest eigenvalue admitted for a full density matrix.
    pub const POSITIVITY: f64 = 1e-9;
}

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Builds a square matrix from nested rows. Panics on ragged input; meant
    /// for literal constants.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let m = rows[0].as_ref().len();
        assert!(rows.iter().all(|r| r.as_ref().len() == m), "ragged rows");
        Self::from_fn(n, m, |i, j| rows[i].as_ref()[j])
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn column(entries: &[C64]) -> Self {
        Self::from_fn(entries.len(), 1, |i, _| entries[i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    fn check_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Frobenius inner product ⟨self, other⟩ = tr(self† other).
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_same_shape(other, "inner")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_residual() <= tol
    }

    /// Largest |m_ij − conj(m_ji)|.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols.min(self.rows) {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Frobenius norm of M†M − I.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = self.adjoint().matmul(self).expect("square");
        gram.sub(&Self::identity(self.rows))
            .expect("same shape")
            .frobenius_norm()
    }

    /// Relabels basis states: `out[i, j] = self[perm[i], perm[j]]`.
    pub fn permute_basis(&self, perm: &[usize]) -> Result<Self> {
        if !self.is_square() || perm.len() != self.rows {
            return Err(Error::DimensionMismatch {
                op: "permute_basis",
                left: self.shape(),
                right: (perm.len(), perm.len()),
            });
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            self[(perm[i], perm[j])]
        }))
    }

    /// Whether `self + shift·I` admits a Cholesky factorization, i.e. every
    /// eigenvalue of the Hermitian matrix `self` exceeds `−shift`.
    pub fn is_positive_semidefinite(&self, shift: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        let mut l = vec![ZERO; n * n];
        for j in 0..n {
            let mut d = self[(j, j)].re + shift;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if d <= 0.0 {
                return false;
            }
            let d = d.sqrt();
            l[j * n + j] = C64::new(d, 0.0);
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / d;
            }
        }
        true
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.shape() == other.shape()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Fixed-point text rendering with four decimals and `a+bi` cells.
    pub fn render(&self) -> String {
        let cells: Vec<String> = self.data.iter().map(|z| format_complex(*z)).collect();
        let width = cells.iter().map(String::len).max().unwrap_or(0);
        let mut out = String::new();
        for i in 0..self.rows {
            out.push('[');
            for j in 0..self.cols {
                if j > 0 {
                    out.push_str("  ");
                }
                out.push_str(&format!("{:>width$}", cells[i * self.cols + j]));
            }
            out.push_str("]\n");
        }
        out
    }
}

/// Formats `z` as `a+bi` with four decimals; `-0.0000` is folded to `0.0000`.
pub fn format_complex(z: C64) -> String {
    let clean = |x: f64| if x.abs() < 5e-5 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    let sign = if im < 0.0 { '-' } else { '+' };
    format!("{re:.4}{sign}{:.4}i", im.abs())
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{}", self.rows, self.cols)?;
        f.write_str(&self.render())
    }
}

/// `{rows, cols, re, im}` with row-major flattening.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            re: m.data.iter().map(|z| z.re).collect(),
            im: m.data.iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.re.len() != j.im.len() {
            return Err(Error::InvalidMatrix(format!(
                "re has {} entries, im has {}",
                j.re.len(),
                j.im.len()
            )));
        }
        let data = j.re.iter().zip(&j.im).map(|(&r, &i)| C64::new(r, i)).collect();
        ComplexMatrix::new(j.rows, j.cols, data)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        ComplexMatrix::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// Standard tensor product: `kron(a, b)[i·rb + k, j·cb + l] = a[i, j]·b[k, l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = b.shape();
    ComplexMatrix::from_fn(a.rows * rb, a.cols * cb, |r, c| {
        a[(r / rb, c / cb)] * b[(r % rb, c % cb)]
    })
}

/// `min_φ ‖u − e^{iφ}v‖_F`.
///
/// The minimizer is `φ = arg tr(v†u)`; the residual is then evaluated
/// directly rather than through `sqrt(2n − 2|tr(u†v)|)`, whose cancellation
/// leaves a ~1e-8 floor for identical inputs. Works for any equal shapes, so
/// state columns can be compared the same way.
pub fn phase_invariant_distance(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    let overlap = v.inner(u)?;
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    Ok(u.sub(&v.scale(phase))?.frobenius_norm())
}

/// ‖rho − reference‖_F / ‖reference‖_F.
pub fn relative_error(rho: &DensityMatrix, reference: &DensityMatrix) -> Result<f64> {
    if rho.kind() != reference.kind() {
        return Err(Error::InvalidDensity(format!(
            "cannot compare {:?} against {:?}",
            rho.kind(),
            reference.kind()
        )));
    }
    matrix_relative_error(rho, reference)
}

pub fn matrix_relative_error(m: &ComplexMatrix, reference: &ComplexMatrix) -> Result<f64> {
    let denom = reference.frobenius_norm();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(m.sub(reference)?.frobenius_norm() / denom)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidMatrix("empty state vector".into()));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > tol::ALGEBRAIC {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn as_column(&self) -> ComplexMatrix {
        ComplexMatrix::column(&self.amplitudes)
    }

    /// |ψ⟩⟨ψ| as a full density matrix.
    pub fn projector(&self) -> DensityMatrix {
        let a = &self.amplitudes;
        let m = ComplexMatrix::from_fn(a.len(), a.len(), |i, j| a[i] * a[j].conj());
        DensityMatrix {
            matrix: m,
            kind: DensityKind::Full,
        }
    }
}

/// A square matrix with U†U = I within [`tol::UNITARY`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let residual = m.unitarity_residual();
        if residual > tol::UNITARY {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self(m))
    }

    /// For products of already-validated unitaries.
    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        debug_assert!(m.unitarity_residual() < 1e-6);
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    /// `next · self`: apply `self` first, then `next`.
    pub fn then(&self, next: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        Ok(Self(next.0.matmul(&self.0)?))
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self(self.0.adjoint())
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        let out = self.0.matmul(&psi.as_column())?;
        Ok(StateVector {
            amplitudes: out.as_slice().to_vec(),
        })
    }

    /// Column `index` as a state, i.e. the image of basis state `index`.
    pub fn column(&self, index: usize) -> StateVector {
        StateVector {
            amplitudes: (0..self.dim()).map(|i| self.0[(i, index)]).collect(),
        }
    }
}

impl Deref for UnitaryMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    /// Trace one, positive semidefinite.
    Full,
    /// Traceless part of an NMR ensemble state.
    Deviation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    kind: DensityKind,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and (for full states) positivity.
    pub fn new(matrix: ComplexMatrix, kind: DensityKind) -> Result<Self> {
        let rho = Self::hermitian(matrix, kind)?;
        if kind == DensityKind::Full && !rho.is_physical() {
            return Err(Error::InvalidDensity(
                "full density matrix has a negative eigenvalue".into(),
            ));
        }
        Ok(rho)
    }

    /// Validates Hermiticity and trace only. Least-squares reconstructions
    /// come through here, since they are not projected onto the positive cone.
    pub fn hermitian(matrix: ComplexMatrix, kind: DensityKind) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensity(format!(
                "not square: {:?}",
                matrix.shape()
            )));
        }
        let residual = matrix.hermiticity_residual();
        if residual > tol::ALGEBRAIC {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (residual {residual:.3e})"
            )));
        }
        let expected = match kind {
            DensityKind::Full => 1.0,
            DensityKind::Deviation => 0.0,
        };
        let tr = matrix.trace();
        if (tr - C64::new(expected, 0.0)).norm() > tol::ALGEBRAIC {
            return Err(Error::InvalidDensity(format!(
                "trace {tr} for a {kind:?} matrix"
            )));
        }
        Ok(Self { matrix, kind })
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Eigenvalues ≥ −[`tol::POSITIVITY`]. Deviation matrices are always
    /// reported physical since they carry no positivity requirement.
    pub fn is_physical(&self) -> bool {
        match self.kind {
            DensityKind::Full => self.matrix.is_positive_semidefinite(tol::POSITIVITY),
            DensityKind::Deviation => true,
        }
    }

    /// ρ → UρU†. Kind is preserved.
    pub fn conjugate(&self, u: &UnitaryMatrix) -> Result<Self> {
        let m = u.matmul(&self.matrix)?.matmul(&u.adjoint())?;
        Ok(Self {
            matrix: m,
            kind: self.kind,
        })
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diag().iter().map(|z| z.re).collect()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.inner(&self.matrix).expect("square").re
    }

    /// `out[i, j] = self[perm[i], perm[j]]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        Ok(Self {
            matrix: self.matrix.permute_basis(perm)?,
            kind: self.kind,
        })
    }

    /// The traceless part ρ − tr(ρ)/n · I.
    pub fn deviation_part(&self) -> Self {
        let n = self.dim();
        let shift = self.matrix.trace() / n as f64;
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.matrix[(i, j)] - shift
            } else {
                self.matrix[(i, j)]
            }
        });
        Self {
            matrix: m,
            kind: DensityKind::Deviation,
        }
    }

    /// Entrywise mean of same-kind, same-size matrices.
    pub fn mean(items: &[DensityMatrix]) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::InvalidDensity("mean of an empty list".into()))?;
        let mut acc = ComplexMatrix::zeros(first.dim(), first.dim());
        for rho in items {
            if rho.kind != first.kind {
                return Err(Error::InvalidDensity("mixed kinds in mean".into()));
            }
            acc = acc.add(&rho.matrix)?;
        }
        Ok(Self {
            matrix: acc.scale_real(1.0 / items.len() as f64),
            kind: first.kind,
        })
    }
}

impl Deref for DensityMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

pub mod pauli {
    use super::*;

    pub fn identity2() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[[ZERO, -I], [I, ZERO]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[ONE, -ONE])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_rows(&[[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]])
    }

    #[test]
    fn new_rejects_bad_lengths_and_nan() {
        assert!(ComplexMatrix::new(2, 2, vec![ONE; 3]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(0.0, f64::INFINITY)]).is_err());
        assert!(ComplexMatrix::new(0, 1, vec![]).is_err());
    }

    #[test]
    fn kron_identities() {
        assert_eq!(
            kron(&pauli::identity2(), &pauli::identity2()),
            ComplexMatrix::identity(4)
        );
    }

    #[test]
    fn kron_hadamard_on_first_qubit() {
        let h0 = kron(&hadamard(), &pauli::identity2());
        let out = &h0 * &StateVector::basis(4, 0).as_column();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = ComplexMatrix::column(&[c(s, 0.0), ZERO, c(s, 0.0), ZERO]);
        assert!(out.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn kron_zz_quarter_diagonal() {
        let zz = kron(&pauli::z(), &pauli::z()).scale_real(0.25);
        let d: Vec<f64> = zz.diag().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![0.25, -0.25, -0.25, 0.25]);
        assert_eq!(zz.max_abs(), 0.25);
    }

    #[test]
    fn distance_examples() {
        let h = hadamard();
        assert_eq!(phase_invariant_distance(&h, &h).unwrap(), 0.0);
        let rotated = h.scale(C64::from_polar(1.0, 0.731));
        assert!(phase_invariant_distance(&h, &rotated).unwrap() < 1e-15);
        let d = phase_invariant_distance(&pauli::identity2(), &pauli::x()).unwrap();
        assert!((d - 2.0).abs() < 1e-15);
        assert!(phase_invariant_distance(&h, &ComplexMatrix::identity(4)).is_err());
    }

    #[test]
    fn relative_error_examples() {
        let psi = StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let rho = psi.projector();
        assert_eq!(relative_error(&rho, &rho).unwrap(), 0.0);
        let scaled = DensityMatrix::hermitian(rho.scale_real(1.1), DensityKind::Full);
        // trace 1.1 is not a valid full state; compare the raw matrices instead
        assert!(scaled.is_err());
        let e = matrix_relative_error(&rho.scale_real(1.1), &rho).unwrap();
        assert!((e - 0.1).abs() < 1e-12);
        let zero = ComplexMatrix::zeros(2, 2);
        assert!(matches!(
            matrix_relative_error(&rho, &zero),
            Err(Error::ZeroReference)
        ));
    }

    #[test]
    fn relative_error_rejects_kind_mismatch() {
        let full = StateVector::basis(2, 0).projector();
        let dev = full.deviation_part();
        assert!(relative_error(&full, &dev).is_err());
    }

    #[test]
    fn density_validation() {
        let good = StateVector::basis(4, 1).projector();
        assert!(DensityMatrix::new(good.matrix().clone(), DensityKind::Full).is_ok());
        let non_herm = ComplexMatrix::from_rows(&[[c(0.5, 0.0), c(0.1, 0.0)], [ZERO, c(0.5, 0.0)]]);
        assert!(DensityMatrix::new(non_herm, DensityKind::Full).is_err());
        let negative = ComplexMatrix::diagonal(&[c(1.5, 0.0), c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(negative.clone(), DensityKind::Full).is_err());
        assert!(DensityMatrix::hermitian(negative, DensityKind::Full).is_ok());
        let dev = ComplexMatrix::diagonal(&[ONE, ZERO, ZERO, -ONE]);
        assert!(DensityMatrix::new(dev.clone(), DensityKind::Deviation).is_ok());
        assert!(DensityMatrix::new(dev, DensityKind::Full).is_err());
    }

    #[test]
    fn state_vector_normalization() {
        assert!(StateVector::new(vec![ONE, ONE]).is_err());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(StateVector::new(vec![c(s, 0.0), c(0.0, s)]).is_ok());
    }

    #[test]
    fn unitary_validation() {
        assert!(UnitaryMatrix::new(hadamard()).is_ok());
        assert!(UnitaryMatrix::new(hadamard().scale_real(1.01)).is_err());
    }

    #[test]
    fn psd_check_matches_known_spectra() {
        let m = ComplexMatrix::from_rows(&[[c(0.5, 0.0), c(0.0, 0.5)], [c(0.0, -0.5), c(0.5, 0.0)]]);
        // eigenvalues 0 and 1
        assert!(m.is_positive_semidefinite(1e-9));
        let m = ComplexMatrix::from_rows(&[[c(0.5, 0.0), c(0.0, 0.6)], [c(0.0, -0.6), c(0.5, 0.0)]]);
        // eigenvalues -0.1 and 1.1
        assert!(!m.is_positive_semidefinite(1e-9));
    }

    #[test]
    fn json_layout() {
        let m = ComplexMatrix::from_rows(&[[c(1.0, 0.0), c(0.0, -1.0)], [c(2.0, 0.5), ZERO]]);
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(
            text,
            r#"{"rows":2,"cols":2,"re":[1.0,0.0,2.0,0.0],"im":[0.0,-1.0,0.5,0.0]}"#
        );
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"re":[1],"im":[1]}"#).is_err());
    }

    #[test]
    fn render_fixed_point() {
        assert_eq!(format_complex(c(0.5, -0.5)), "0.5000-0.5000i");
        assert_eq!(format_complex(c(-0.0, 1e-17)), "0.0000+0.0000i");
    }
}
