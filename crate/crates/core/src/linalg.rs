//! Dense complex linear algebra for the small Hilbert spaces the automata
//! operate on.
//!
//! Everything is double precision and row-major. Tensor products use the
//! left-factor-major convention: for `a ⊗ b`, basis index `(i, j)` maps to
//! `i * dim(b) + j`. Product constructions rely on this ordering when they
//! route joint measurement outcomes.

use std::fmt;
use std::ops::{Index, IndexMut};

pub use num_complex::Complex64 as Complex;

use crate::error::{Error, Result};

/// Tolerance used by every structural check (unitarity, projectors,
/// normalization, probability conservation).
pub const TOL: f64 = 1e-9;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex>) -> Self {
        Self { entries }
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self::new(entries.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![ZERO; dim])
    }

    /// Standard basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut v = Self::zeros(dim);
        v.entries[index] = ONE;
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self::new(self.entries.iter().map(|z| z * factor).collect())
    }

    /// Inner product `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                op: "inner",
                left: (self.dim(), 1),
                right: (other.dim(), 1),
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            for b in &other.entries {
                out.push(a * b);
            }
        }
        Self::new(out)
    }

    /// The rank-one operator `|self><self|`.
    pub fn outer(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.entries[i] * self.entries[j].conj();
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex;

    fn index(&self, i: usize) -> &Complex {
        &self.entries[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
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

    /// Builds a matrix from row vectors; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                op: "from_rows",
                left: (r, c),
                right: (1, bad.len()),
            });
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| Complex::new(x, 0.0)).collect())
                .collect(),
        )
    }

    /// Orthogonal projector onto the span of the listed basis vectors.
    pub fn basis_projector(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut m = Self::zeros(dim, dim);
        for &i in indices {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i, dim });
            }
            m[(i, i)] = ONE;
        }
        Ok(m)
    }

    /// Orthogonal projector onto the span of orthonormal `vectors`.
    pub fn span_projector(dim: usize, vectors: &[ComplexVector]) -> Result<Self> {
        let mut m = Self::zeros(dim, dim);
        for v in vectors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    op: "span_projector",
                    left: (dim, dim),
                    right: (v.dim(), 1),
                });
            }
            m = m.add(&v.outer())?;
        }
        Ok(m)
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

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    /// Matrix product. Zero entries of `self` are skipped, which makes
    /// products with the sparse block-rotation and tensor-power operators
    /// cheap.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "mat_mul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: (v.dim(), 1),
            });
        }
        Ok(ComplexVector::new(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(v.entries())
                        .filter(|(a, _)| **a != ZERO)
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect(),
        ))
    }

    /// `self · rho · self†`, skipping zero entries of `self` on both sides.
    pub fn sandwich(&self, rho: &Self) -> Result<Self> {
        if !rho.is_square() || self.cols != rho.rows {
            return Err(Error::DimensionMismatch {
                op: "sandwich",
                left: self.shape(),
                right: rho.shape(),
            });
        }
        let left = self.mul(rho)?;
        let nonzero: Vec<Vec<(usize, Complex)>> = (0..self.rows)
            .map(|j| {
                self.row(j)
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| **z != ZERO)
                    .map(|(k, z)| (k, z.conj()))
                    .collect()
            })
            .collect();
        let mut out = Self::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            let l_row = left.row(i);
            for (j, nz) in nonzero.iter().enumerate() {
                out.data[i * self.rows + j] = nz.iter().map(|&(k, c)| l_row[k] * c).sum();
            }
        }
        Ok(out)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut m = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        m[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        m
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    /// In-place `self += other`.
    pub fn accumulate(&mut self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op: "accumulate",
                left: self.shape(),
                right: other.shape(),
            });
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(Complex, Complex) -> Complex,
    ) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
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

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// True iff `P² = P` and `P† = P` within `tol`.
    pub fn is_projector(&self, tol: f64) -> bool {
        if !self.is_square() || !self.is_finite() {
            return false;
        }
        let squared = match self.mul(self) {
            Ok(m) => m,
            Err(_) => return false,
        };
        squared.max_abs_diff(self) <= tol && self.is_hermitian(tol)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

pub fn mat_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.mul(b)
}

pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.tensor(b)
}

/// True iff `‖U†U − I‖_max ≤ tol`.
pub fn validate_unitary(u: &ComplexMatrix, tol: f64) -> Result<bool> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            op: "validate_unitary",
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    if !u.is_finite() {
        return Ok(false);
    }
    let gram = u.adjoint().mul(u)?;
    Ok(gram.max_abs_diff(&ComplexMatrix::identity(u.rows())) <= tol)
}

/// One labeled outcome of a projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub projector: ComplexMatrix,
}

/// A projective measurement: labeled, pairwise orthogonal projectors that
/// sum to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFamily {
    pub outcomes: Vec<Outcome>,
}

/// Label of the single outcome of a trivial measurement.
pub const EPSILON_LABEL: &str = "eps";

impl MeasurementFamily {
    pub fn new(outcomes: Vec<(String, ComplexMatrix)>) -> Self {
        Self {
            outcomes: outcomes
                .into_iter()
                .map(|(label, projector)| Outcome { label, projector })
                .collect(),
        }
    }

    /// The measurement `{I}` whose only outcome is `eps`.
    pub fn trivial(dim: usize) -> Self {
        Self::new(vec![(EPSILON_LABEL.to_string(), ComplexMatrix::identity(dim))])
    }

    /// Measurement in the computational basis with one outcome per group of
    /// basis indices.
    pub fn from_basis_groups(dim: usize, groups: &[(&str, &[usize])]) -> Result<Self> {
        let mut outcomes = Vec::with_capacity(groups.len());
        for (label, indices) in groups {
            outcomes.push((label.to_string(), ComplexMatrix::basis_projector(dim, indices)?));
        }
        Ok(Self::new(outcomes))
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.outcomes.iter().map(|o| o.label.as_str())
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o.label == label)
    }

    /// Dimension shared by the projectors, or `None` for an empty family.
    pub fn dim(&self) -> Option<usize> {
        self.outcomes.first().map(|o| o.projector.rows())
    }

    pub fn is_trivial(&self) -> bool {
        self.outcomes.len() == 1
            && self.outcomes[0].projector
                == ComplexMatrix::identity(self.outcomes[0].projector.rows())
    }

    /// Outcome-wise tensor product; labels are joined as `l1|l2`, ordered
    /// left-outcome-major.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut outcomes = Vec::with_capacity(self.len() * other.len());
        for a in &self.outcomes {
            for b in &other.outcomes {
                outcomes.push(Outcome {
                    label: format!("{}|{}", a.label, b.label),
                    projector: a.projector.tensor(&b.projector),
                });
            }
        }
        Self { outcomes }
    }
}

/// Checks a measurement family: every projector idempotent and Hermitian,
/// pairwise orthogonal, summing to the identity, labels distinct.
pub fn validate_measurement(m: &MeasurementFamily, tol: f64) -> Result<bool> {
    let Some(dim) = m.dim() else {
        return Ok(false);
    };
    for o in &m.outcomes {
        if o.projector.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                op: "validate_measurement",
                left: (dim, dim),
                right: o.projector.shape(),
            });
        }
    }
    let mut labels: Vec<&str> = m.labels().collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() != m.len() {
        return Ok(false);
    }
    if !m.outcomes.iter().all(|o| o.projector.is_projector(tol)) {
        return Ok(false);
    }
    for (i, a) in m.outcomes.iter().enumerate() {
        for b in &m.outcomes[i + 1..] {
            if a.projector.mul(&b.projector)?.max_abs() > tol {
                return Ok(false);
            }
        }
    }
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for o in &m.outcomes {
        sum.accumulate(&o.projector)?;
    }
    Ok(sum.max_abs_diff(&ComplexMatrix::identity(dim)) <= tol)
}

/// Unnormalized density matrix of the quantum register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn pure(state: &ComplexVector) -> Self {
        Self {
            matrix: state.outer(),
        }
    }

    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                op: "DensityMatrix",
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Real part of the trace: the probability mass this matrix carries.
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `op · ρ · op†`.
    pub fn conjugate_by(&self, op: &ComplexMatrix) -> Result<Self> {
        Ok(Self {
            matrix: op.sandwich(&self.matrix)?,
        })
    }

    pub fn accumulate(&mut self, other: &Self) -> Result<()> {
        self.matrix.accumulate(&other.matrix)
    }

    /// Hermitian with real trace in `[−tol, 1 + tol]`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let tr = self.matrix.trace();
        self.matrix.is_hermitian(tol) && tr.im.abs() <= tol && tr.re >= -tol && tr.re <= 1.0 + tol
    }
}

/// Returns a unitary `V` with `V·src = e_target` up to a global phase.
///
/// `V` is a Householder reflection `I − 2uu†/‖u‖²` with
/// `u = src − φ·e_target`, where `φ` is the phase of `src[target]`. For a real
/// `src` the result is real orthogonal and symmetric.
pub fn householder_map_to_basis(src: &ComplexVector, target_index: usize) -> Result<ComplexMatrix> {
    let dim = src.dim();
    if target_index >= dim {
        return Err(Error::IndexOutOfRange {
            index: target_index,
            dim,
        });
    }
    let norm = src.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let src = src.scale(Complex::new(1.0 / norm, 0.0));
    let pivot = src[target_index];
    let phase = if pivot.norm() == 0.0 {
        ONE
    } else {
        pivot / pivot.norm()
    };
    let mut u = src.entries().to_vec();
    u[target_index] -= phase;
    let u_norm_sqr: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    if u_norm_sqr < 1e-30 {
        return Ok(ComplexMatrix::identity(dim));
    }
    let mut v = ComplexMatrix::identity(dim);
    let factor = 2.0 / u_norm_sqr;
    for i in 0..dim {
        for j in 0..dim {
            v[(i, j)] -= u[i] * u[j].conj() * factor;
        }
    }
    Ok(v)
}
