use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::space::SpaceLabel;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default Hermiticity tolerance.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Kronecker product of a sequence of matrices, first factor most significant.
pub fn kron_all(parts: &[CMatrix]) -> CMatrix {
    parts.iter().skip(1).fold(parts[0].clone(), |acc, m| acc.kronecker(m))
}

/// Lifts `local` acting on factor `at` to the whole space.
pub fn lift(space: &SpaceLabel, at: usize, local: &CMatrix) -> CMatrix {
    let dims = space.local_dims();
    assert_eq!(local.nrows(), dims[at], "local operator dimension mismatch");
    let left: usize = dims[..at].iter().product();
    let right: usize = dims[at + 1..].iter().product();
    CMatrix::identity(left, left).kronecker(local).kronecker(&CMatrix::identity(right, right))
}

/// A dense Hermitian matrix on a labeled space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    space: SpaceLabel,
    matrix: CMatrix,
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianOperator {
    pub fn new(space: SpaceLabel, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(space, matrix, HERMITICITY_TOL)
    }

    /// Hermiticity is checked as `max|M - M^dagger| <= tol * max(1, max|M|)`.
    pub fn with_tolerance(space: SpaceLabel, matrix: CMatrix, tol: f64) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Space(format!(
                "matrix is {}x{}, space dimension is {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let deviation = max_abs(&(&matrix - matrix.adjoint()));
        if deviation > tol * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { space, matrix })
    }

    /// Skips the Hermiticity check; callers guarantee it by construction.
    pub(crate) fn from_parts(space: SpaceLabel, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), space.dim());
        Self { space, matrix }
    }

    pub fn zero(space: &SpaceLabel) -> Self {
        let d = space.dim();
        Self::from_parts(space.clone(), CMatrix::zeros(d, d))
    }

    pub fn identity(space: &SpaceLabel) -> Self {
        let d = space.dim();
        Self::from_parts(space.clone(), CMatrix::identity(d, d))
    }

    pub fn from_real_diagonal(space: &SpaceLabel, diag: &[f64]) -> Self {
        assert_eq!(diag.len(), space.dim());
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self::from_parts(space.clone(), CMatrix::from_diagonal(&v))
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn check_space(&self, other: &Self) {
        assert_eq!(self.space, other.space, "operators live on different spaces");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_space(other);
        Self::from_parts(self.space.clone(), &self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_space(other);
        Self::from_parts(self.space.clone(), &self.matrix - &other.matrix)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_parts(self.space.clone(), &self.matrix * C64::new(factor, 0.0))
    }

    pub fn square(&self) -> Self {
        Self::from_parts(self.space.clone(), &self.matrix * &self.matrix)
    }

    /// Product of two commuting Hermitian operators; fails if they do not commute.
    pub fn commuting_product(&self, other: &Self) -> Result<Self> {
        self.check_space(other);
        let p = &self.matrix * &other.matrix;
        Self::with_tolerance(self.space.clone(), p, 1e-10)
    }

    /// `A B A` for Hermitian `A` and `B`.
    pub fn sandwich(&self, inner: &Self) -> Self {
        self.check_space(inner);
        Self::from_parts(self.space.clone(), &self.matrix * &inner.matrix * &self.matrix)
    }

    /// Max-entry norm of `[self, other]`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        self.check_space(other);
        max_abs(&commutator(&self.matrix, &other.matrix))
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.check_space(other);
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn off_diagonal_max(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    m = m.max(self.matrix[(i, j)].norm());
                }
            }
        }
        m
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigen(&self) -> Eigen {
        let n = self.dim();
        let eig = self.matrix.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Eigen { values, vectors }
    }

    /// Sorted eigenvalues.
    pub fn spectrum(&self) -> Vec<f64> {
        self.eigen().values
    }

    /// Number of eigenvalues with `|lambda| <= tol`.
    pub fn kernel_dimension(&self, tol: f64) -> usize {
        self.spectrum().iter().filter(|v| v.abs() <= tol).count()
    }

    /// Row-major flat export: header line then one `re im` pair per entry.
    pub fn export_flat(&self) -> String {
        let mut out = self.space.header();
        out.push('\n');
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.matrix[(i, j)];
                let _ = writeln!(out, "{:.17e} {:.17e}", z.re, z.im);
            }
        }
        out
    }
}

/// Groups sorted values into `(value, multiplicity)` clusters.
pub fn degeneracies(sorted: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &v in sorted {
        match out.last_mut() {
            Some((_, count, first)) if (v - *first).abs() <= tol => *count += 1,
            _ => out.push((v, 1, v)),
        }
    }
    out.into_iter().map(|(v, c, _)| (v, c)).collect()
}
