//! Dense complex-valued matrix algebra.
//!
//! Everything downstream (channel models, precoder designs, the SDP solver,
//! the capacity bounds) runs on [`CMat`], a dense row-major matrix of
//! `Complex64` entries. Matrices in this domain are small (tens of rows at
//! most), so the factorizations favour robustness over asymptotic speed:
//! one-sided Jacobi for the SVD, cyclic Jacobi for Hermitian
//! eigendecompositions, and partially pivoted LU for solves.

mod decomp;

pub use decomp::{HermEigResult, SvdResult};

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

/// Complex scalar used across the crate.
pub type C64 = Complex64;

/// Relative reconstruction tolerance guaranteed by the factorizations.
pub const RECON_TOL: f64 = 1e-9;
/// Orthonormality tolerance for singular-vector and eigenvector bases.
pub const ORTHO_TOL: f64 = 1e-10;
/// A Cholesky pivot (squared diagonal residual) at or below this value means
/// the matrix is treated as not positive definite.
pub const PD_PIVOT_TOL: f64 = 1e-12;
/// Hermitian-symmetry tolerance (relative to `1 + ||M||_F`) accepted by
/// [`CMat::herm_eig`] before symmetrizing internally.
pub const HERM_TOL: f64 = 1e-10;

/// Errors raised by the linear-algebra layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: left is {lhs_rows}x{lhs_cols}, right is {rhs_rows}x{rhs_cols}")]
    DimensionMismatch {
        op: &'static str,
        lhs_rows: usize,
        lhs_cols: usize,
        rhs_rows: usize,
        rhs_cols: usize,
    },
    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("matrix is not Hermitian within tolerance (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { pivot: f64, index: usize },
    #[error("matrix is singular to working precision (pivot {pivot:.3e} at index {index})")]
    Singular { pivot: f64, index: usize },
    #[error("{op} did not converge after {iterations} iterations")]
    NonConvergence { op: &'static str, iterations: usize },
}

/// Dense complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a generator over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from row-major complex entries. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "row-major data length {} does not match {}x{}",
            data.len(),
            rows,
            cols
        );
        CMat { rows, cols, data }
    }

    /// Build from row-major real entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols);
        CMat {
            rows,
            cols,
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    /// Diagonal matrix from complex entries.
    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = CMat::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Column vector from a slice.
    pub fn col_vector(entries: &[C64]) -> Self {
        CMat {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
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

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Hermitian (conjugate) transpose.
    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &CMat) -> Result<CMat, LinalgError> {
        self.check_same_shape("add", other)?;
        Ok(CMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &CMat) -> Result<CMat, LinalgError> {
        self.check_same_shape("sub", other)?;
        Ok(CMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &CMat) -> Result<CMat, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "mul",
                lhs_rows: self.rows,
                lhs_cols: self.cols,
                rhs_rows: other.rows,
                rhs_cols: other.cols,
            });
        }
        let oc = other.cols;
        let mut out = CMat::zeros(self.rows, oc);
        for i in 0..self.rows {
            let arow = &self.data[i * self.cols..(i + 1) * self.cols];
            let orow = &mut out.data[i * oc..(i + 1) * oc];
            for (k, &a) in arow.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &other.data[k * oc..(k + 1) * oc];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Trace (sum of diagonal entries). Requires a square matrix.
    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Real inner product `Re tr(self^H other)`.
    pub fn inner_re(&self, other: &CMat) -> f64 {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        self.asymmetry() <= tol * (1.0 + self.fro_norm())
    }

    /// Frobenius norm of `(M - M^H)/2`.
    pub fn asymmetry(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = self[(i, j)] - self[(j, i)].conj();
                sum += d.norm_sqr();
            }
        }
        sum.sqrt() / 2.0
    }

    /// `(M + M^H)/2`.
    pub fn symmetrize(&self) -> CMat {
        debug_assert!(self.is_square());
        CMat::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Copy of the rectangular block with the given corner and shape.
    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> CMat {
        assert!(row0 + rows <= self.rows && col0 + cols <= self.cols);
        CMat::from_fn(rows, cols, |i, j| self[(row0 + i, col0 + j)])
    }

    /// Overwrite the block with the given corner.
    pub fn set_block(&mut self, row0: usize, col0: usize, b: &CMat) {
        assert!(row0 + b.rows <= self.rows && col0 + b.cols <= self.cols);
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(row0 + i, col0 + j)] = b[(i, j)];
            }
        }
    }

    /// Copy of one column as an n×1 matrix.
    pub fn col(&self, j: usize) -> CMat {
        self.block(0, j, self.rows, 1)
    }

    /// Horizontal concatenation `[blocks_0 blocks_1 ...]`.
    pub fn hcat(blocks: &[CMat]) -> CMat {
        assert!(!blocks.is_empty());
        let rows = blocks[0].rows;
        assert!(blocks.iter().all(|b| b.rows == rows));
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = CMat::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            out.set_block(0, at, b);
            at += b.cols;
        }
        out
    }

    /// Block-diagonal assembly; off-diagonal blocks are zero.
    pub fn block_diag(blocks: &[CMat]) -> CMat {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = CMat::zeros(rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.set_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    fn check_same_shape(&self, op: &'static str, other: &CMat) -> Result<(), LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                op,
                lhs_rows: self.rows,
                lhs_cols: self.cols,
                rhs_rows: other.rows,
                rhs_cols: other.cols,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
