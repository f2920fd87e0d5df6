//! Dense complex matrices and the block operations used by the diagonal
//! union: Kronecker products, direct sums, Hadamard and generalized
//! Hadamard products, and the regular representation of `Z_k`.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

/// Default unitarity tolerance, in max norm.
pub const UNITARY_TOL: f64 = 1e-10;
/// Default magnitude threshold for reading off the support of a matrix.
pub const SUPPORT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("block size: {small} does not divide {large}")]
    NotDivisible { small: usize, large: usize },
    #[error("data length {len} does not match {rows}x{cols}")]
    BadLength {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("{0} is not a permutation")]
    NotPermutation(String),
    #[error("group element {l} out of range for Z_{k}")]
    ElementOutOfRange { k: usize, l: usize },
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds"
        );
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds"
        );
        &mut self.data[r * self.cols + c]
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::BadLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|z| !z.is_finite()) {
            return Err(MatrixError::NonFinite {
                row: i / cols,
                col: i % cols,
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// All-ones matrix `J`.
    pub fn ones(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![Complex64::new(1.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let data = (0..rows * cols).map(|i| f(i / cols, i % cols)).collect();
        DenseMatrix { rows, cols, data }
    }

    /// Real matrix from a list of equally long rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(MatrixError::BadLength {
                rows: rows.len(),
                cols,
                len: bad.len(),
            });
        }
        let data = rows
            .iter()
            .flatten()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        Self::new(rows.len(), cols, data)
    }

    /// The unitary DFT matrix: entry `(a, b)` is `exp(2πi·ab/k)/√k`.
    pub fn fourier(k: usize) -> Self {
        let scale = 1.0 / (k as f64).sqrt();
        Self::from_fn(k, k, |a, b| {
            // reduce the exponent first to keep the phase accurate
            let phase = 2.0 * PI * ((a * b) % k) as f64 / k as f64;
            Complex64::from_polar(scale, phase)
        })
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

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    fn require_square(&self) -> Result<usize, MatrixError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn require_same_shape(&self, other: &Self) -> Result<(), MatrixError> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(MatrixError::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            })
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self, MatrixError> {
        self.require_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.data[i * self.cols + l];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[l * other.cols..(l + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Entrywise product `N ∘ M`.
    pub fn hadamard(&self, other: &Self) -> Result<Self, MatrixError> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Blockwise product of an `n×n` matrix `self` with an `m×m` matrix `m`,
    /// `n | m`: block `(i, j)` of size `m/n` is scaled by `self[i, j]`.
    /// Reduces to the entrywise product when `n = m`.
    pub fn generalized_hadamard(&self, m: &Self) -> Result<Self, MatrixError> {
        let n = self.require_square()?;
        let size = m.require_square()?;
        if n == 0 || size % n != 0 {
            return Err(MatrixError::NotDivisible {
                small: n,
                large: size,
            });
        }
        if n == size {
            return self.hadamard(m);
        }
        let r = size / n;
        Ok(Self::from_fn(size, size, |row, col| {
            self[(row / r, col / r)] * m[(row, col)]
        }))
    }

    /// Standard Kronecker product: block `(i, j)` is `self[i, j] · m`.
    pub fn kronecker(&self, m: &Self) -> Self {
        let rows = self.rows * m.rows;
        let cols = self.cols * m.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / m.rows, c / m.cols)] * m[(r % m.rows, c % m.cols)]
        })
    }

    /// Block-diagonal stacking, in list order. The empty sum is `0×0`.
    pub fn direct_sum(blocks: &[DenseMatrix]) -> Result<Self, MatrixError> {
        let mut total = 0;
        for b in blocks {
            total += b.require_square()?;
        }
        let mut out = Self::zeros(total, total);
        let mut offset = 0;
        for b in blocks {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    out[(offset + r, offset + c)] = b[(r, c)];
                }
            }
            offset += b.rows;
        }
        Ok(out)
    }

    /// Largest entry modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, MatrixError> {
        self.require_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Smallest entry modulus (infinite for an empty matrix).
    pub fn min_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks `U†U = I` in max norm.
    pub fn unitarity(&self, tol: f64) -> Result<UnitarityCheck, MatrixError> {
        let n = self.require_square()?;
        let gram = self.adjoint().matmul(self)?;
        let residual = gram.max_abs_diff(&Self::identity(n))?;
        Ok(UnitarityCheck {
            unitary: residual <= tol,
            residual,
        })
    }

    /// Whether every entry is within `tol` of 0 or 1.
    pub fn is_zero_one(&self, tol: f64) -> bool {
        self.data
            .iter()
            .all(|z| z.norm() <= tol || (z - Complex64::new(1.0, 0.0)).norm() <= tol)
    }
}

/// Result of [`is_unitary`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitarityCheck {
    pub unitary: bool,
    /// `‖U†U − I‖_max`
    pub residual: f64,
}

/// Unitarity test in max norm. A non-square matrix is reported as
/// non-unitary with infinite residual.
pub fn is_unitary(u: &DenseMatrix, tol: f64) -> UnitarityCheck {
    u.unitarity(tol).unwrap_or(UnitarityCheck {
        unitary: false,
        residual: f64::INFINITY,
    })
}

/// A permutation matrix stored as the column index of the 1 in each row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermutationMatrix {
    image: Vec<usize>,
}

impl PermutationMatrix {
    pub fn new(image: Vec<usize>) -> Result<Self, MatrixError> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &j in &image {
            if j >= n || std::mem::replace(&mut seen[j], true) {
                return Err(MatrixError::NotPermutation(format!("{image:?}")));
            }
        }
        Ok(PermutationMatrix { image })
    }

    pub fn identity(n: usize) -> Self {
        PermutationMatrix {
            image: (0..n).collect(),
        }
    }

    /// Recognises a dense permutation matrix (entries within `tol` of 0 or 1).
    pub fn from_dense(m: &DenseMatrix, tol: f64) -> Result<Self, MatrixError> {
        let n = m.require_square()?;
        if !m.is_zero_one(tol) {
            return Err(MatrixError::NotPermutation("matrix is not 0/1".into()));
        }
        let mut image = Vec::with_capacity(n);
        for r in 0..n {
            let ones: Vec<usize> = (0..n).filter(|&c| m[(r, c)].norm() > 0.5).collect();
            match ones.as_slice() {
                [c] => image.push(*c),
                _ => {
                    return Err(MatrixError::NotPermutation(format!(
                        "row {r} has {} nonzero entries",
                        ones.len()
                    )))
                }
            }
        }
        Self::new(image)
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.image.len();
        let mut m = DenseMatrix::zeros(n, n);
        for (r, &c) in self.image.iter().enumerate() {
            m[(r, c)] = Complex64::new(1.0, 0.0);
        }
        m
    }
}

/// Regular permutation representation of `l ∈ Z_k`: a 1 at `(i, i + l mod k)`.
pub fn rho_reg_zk(k: usize, l: usize) -> Result<PermutationMatrix, MatrixError> {
    if l >= k {
        return Err(MatrixError::ElementOutOfRange { k, l });
    }
    Ok(PermutationMatrix {
        image: (0..k).map(|i| (i + l) % k).collect(),
    })
}
