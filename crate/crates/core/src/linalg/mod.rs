//! Dense real matrices and the numerical kernels the certificate modules
//! consume: column normalization, Gram matrices, numerical rank, and a
//! one-sided Jacobi SVD.
//!
//! Matrices are immutable values stored row-major; every operation returns a
//! fresh result, so values are safe to share and send between threads.

mod svd;

pub use svd::SvdFactors;

use thiserror::Error;

/// Relative orthogonality tolerance guaranteed by [`DenseMatrix::svd`].
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("entry length {len} does not match {rows}x{cols}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("column {0} has zero norm; coherence statistics are undefined")]
    ZeroColumn(usize),
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("jacobi sweeps did not converge within the budget of {sweeps}")]
    NoConvergence { sweeps: usize },
}

/// Dense real matrix in row-major order. Entries are validated finite on
/// construction and never mutated afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(LinalgError::InvalidShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        for (k, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(LinalgError::NonFiniteEntry {
                    row: k / cols,
                    col: k % cols,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::InvalidShape {
                rows: r,
                cols: c,
                len: rows.iter().map(|row| row.len()).sum(),
            });
        }
        Self::new(r, c, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        (0..self.rows)
            .map(|i| self.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn mat_mul(&self, other: &DenseMatrix) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.cols, other.cols),
                got: (other.rows, other.cols),
            });
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    data[i * other.cols + j] += aik * other.get(k, j);
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    pub fn mat_vec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.cols, 1),
                got: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Submatrix formed by the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            for &j in cols {
                data.push(self.get(i, j));
            }
        }
        Self {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    /// All columns except column `j`.
    pub fn drop_column(&self, j: usize) -> Self {
        let keep: Vec<usize> = (0..self.cols).filter(|&c| c != j).collect();
        self.select_columns(&keep)
    }

    /// `[self | v]` with `v` appended as a final column.
    pub fn augment_column(&self, v: &[f64]) -> Result<Self, LinalgError> {
        if v.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.rows, 1),
                got: (v.len(), 1),
            });
        }
        let mut data = Vec::with_capacity(self.rows * (self.cols + 1));
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.push(v[i]);
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols + 1,
            data,
        })
    }

    /// Rescale every column to unit l2 norm. Returns the normalized matrix
    /// and the scale factors `1/||a_j||`; the input is unchanged.
    pub fn normalize_columns(&self) -> Result<(Self, Vec<f64>), LinalgError> {
        let mut factors = Vec::with_capacity(self.cols);
        for j in 0..self.cols {
            let norm = self.column_norm(j);
            if norm == 0.0 {
                return Err(LinalgError::ZeroColumn(j));
            }
            factors.push(1.0 / norm);
        }
        let mut data = self.data.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[i * self.cols + j] *= factors[j];
            }
        }
        Ok((
            Self {
                rows: self.rows,
                cols: self.cols,
                data,
            },
            factors,
        ))
    }

    /// Number of singular values above `max(rows, cols) * eps * sigma_max`.
    /// The zero matrix has rank 0.
    pub fn numerical_rank(&self) -> usize {
        let sigma = svd::singular_values(self)
            .expect("jacobi sweep budget exhausted computing singular values");
        rank_from_singular_values(&sigma, self.rows, self.cols)
    }

    /// Full singular value decomposition `A = U diag(sigma) V^T` with
    /// orthogonal `U` (m x m) and `V^T` (n x n); singular values sorted
    /// nonincreasing.
    pub fn svd(&self) -> Result<SvdFactors, LinalgError> {
        svd::svd(self)
    }

    /// Minimum-norm least-squares solution of `self * x = b` via the SVD
    /// pseudo-inverse with the numerical-rank threshold.
    pub fn least_squares(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.rows, 1),
                got: (b.len(), 1),
            });
        }
        let f = self.svd()?;
        let thr = rank_threshold(f.singular_values(), self.rows, self.cols);
        let mut x = vec![0.0; self.cols];
        for (k, &s) in f.singular_values().iter().enumerate() {
            if s <= thr {
                continue;
            }
            let utb: f64 = (0..self.rows).map(|i| f.u().get(i, k) * b[i]).sum();
            let coeff = utb / s;
            for j in 0..self.cols {
                x[j] += coeff * f.vt().get(k, j);
            }
        }
        Ok(x)
    }

    /// Orthonormal basis of the null space (columns), from the trailing
    /// right singular vectors.
    pub fn null_space(&self) -> Result<Vec<Vec<f64>>, LinalgError> {
        let f = self.svd()?;
        let thr = rank_threshold(f.singular_values(), self.rows, self.cols);
        let rank = f.singular_values().iter().filter(|&&s| s > thr).count();
        Ok((rank..self.cols)
            .map(|k| (0..self.cols).map(|j| f.vt().get(k, j)).collect())
            .collect())
    }
}

pub(crate) fn rank_threshold(sigma: &[f64], rows: usize, cols: usize) -> f64 {
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

pub(crate) fn rank_from_singular_values(sigma: &[f64], rows: usize, cols: usize) -> usize {
    let thr = rank_threshold(sigma, rows, cols);
    sigma.iter().filter(|&&s| s > thr).count()
}

/// Symmetric Gram matrix `G = A^T A`, built by mirroring the upper triangle
/// so downstream tie detection never sees asymmetric float noise.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    dim: usize,
    entries: Vec<f64>,
    source_normalized: bool,
}

impl GramMatrix {
    /// Gram matrix of `a` as given; `source_normalized` is left unset.
    pub fn new(a: &DenseMatrix) -> Self {
        Self::build(a, false)
    }

    /// Gram matrix of a matrix whose columns the caller already normalized.
    /// The diagonal is stored as exactly 1.
    pub fn from_normalized(a: &DenseMatrix) -> Self {
        Self::build(a, true)
    }

    /// Normalize the columns of `a`, then form the Gram matrix of the result.
    pub fn normalized(a: &DenseMatrix) -> Result<Self, LinalgError> {
        let (normalized, _) = a.normalize_columns()?;
        Ok(Self::build(&normalized, true))
    }

    fn build(a: &DenseMatrix, source_normalized: bool) -> Self {
        let n = a.cols();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let dot: f64 = (0..a.rows()).map(|r| a.get(r, i) * a.get(r, j)).sum();
                entries[i * n + j] = dot;
                entries[j * n + i] = dot;
            }
            if source_normalized {
                entries[i * n + i] = 1.0;
            }
        }
        Self {
            dim: n,
            entries,
            source_normalized,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn source_normalized(&self) -> bool {
        self.source_normalized
    }

    /// Absolute off-diagonal entries of row `i`.
    pub fn abs_off_diagonal_row(&self, i: usize) -> Vec<f64> {
        (0..self.dim)
            .filter(|&j| j != i)
            .map(|j| self.get(i, j).abs())
            .collect()
    }

    /// Largest absolute off-diagonal entry.
    pub fn max_abs_off_diagonal(&self) -> f64 {
        let mut best = 0.0_f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                best = best.max(self.get(i, j).abs());
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rejects_bad_shapes_and_nonfinite() {
        assert!(matches!(
            DenseMatrix::new(0, 2, vec![]),
            Err(LinalgError::EmptyMatrix { .. })
        ));
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![1.0; 3]),
            Err(LinalgError::InvalidShape { .. })
        ));
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(LinalgError::NonFiniteEntry { row: 0, col: 1 })
        ));
    }

    #[test]
    fn normalize_identity_is_identity() {
        let a = DenseMatrix::identity(2);
        let (n, f) = a.normalize_columns().unwrap();
        assert_eq!(n, a);
        assert_eq!(f, vec![1.0, 1.0]);
    }

    #[test]
    fn normalize_three_four_five() {
        let a = DenseMatrix::new(2, 1, vec![3.0, 4.0]).unwrap();
        let (n, f) = a.normalize_columns().unwrap();
        assert!(close(n.get(0, 0), 0.6, 1e-15));
        assert!(close(n.get(1, 0), 0.8, 1e-15));
        assert!(close(f[0], 0.2, 1e-15));
    }

    #[test]
    fn normalize_rejects_zero_column() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(
            a.normalize_columns().unwrap_err(),
            LinalgError::ZeroColumn(1)
        );
    }

    #[test]
    fn gram_of_orthonormal_columns_is_identity() {
        let a = DenseMatrix::identity(3);
        let g = GramMatrix::normalized(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        assert!(g.source_normalized());
    }

    #[test]
    fn gram_unit_diagonal_is_exact() {
        let a = DenseMatrix::new(3, 2, vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]).unwrap();
        let g = GramMatrix::normalized(&a).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(1, 1), 1.0);
        assert_eq!(g.get(0, 1), g.get(1, 0));
    }

    #[test]
    fn rank_identity_and_duplicate_column() {
        assert_eq!(DenseMatrix::identity(3).numerical_rank(), 3);
        let dup = DenseMatrix::new(2, 2, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(dup.numerical_rank(), 1);
        let zero = DenseMatrix::new(2, 3, vec![0.0; 6]).unwrap();
        assert_eq!(zero.numerical_rank(), 0);
    }

    #[test]
    fn rank_matches_transpose() {
        let a = DenseMatrix::new(
            3,
            5,
            vec![
                -1.0, 0.0, -4.0, 2.0, 4.0, 0.0, -1.0, -1.0, 1.0, 2.0, 0.0, 0.0, -1.0, 0.0, 0.0,
            ],
        )
        .unwrap();
        assert_eq!(a.numerical_rank(), 3);
        assert_eq!(a.transpose().numerical_rank(), 3);
    }

    #[test]
    fn rank_invariant_under_well_conditioned_scaling() {
        // Nonsingular row scalings preserve the numerical rank.
        let a = DenseMatrix::new(
            3,
            5,
            vec![
                0.3, -1.2, 0.7, 2.0, -0.5, 1.1, 0.4, -0.9, 0.2, 0.8, -0.6, 0.5, 1.3, -1.7, 0.1,
            ],
        )
        .unwrap();
        let w =
            DenseMatrix::new(3, 3, vec![1.2, -0.3, 0.4, 0.1, 0.9, -0.2, -0.5, 0.6, 1.4]).unwrap();
        assert_eq!(w.numerical_rank(), 3, "test scaling must be nonsingular");
        let wa = w.mat_mul(&a).unwrap();
        assert_eq!(wa.numerical_rank(), a.numerical_rank());

        // Also for a rank-deficient input.
        let mut deficient = a.data().to_vec();
        for j in 0..5 {
            deficient[2 * 5 + j] = a.get(0, j) + a.get(1, j);
        }
        let d = DenseMatrix::new(3, 5, deficient).unwrap();
        assert_eq!(d.numerical_rank(), 2);
        assert_eq!(w.mat_mul(&d).unwrap().numerical_rank(), 2);
    }

    #[test]
    fn least_squares_recovers_exact_solution() {
        let a = DenseMatrix::new(3, 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let b = a.mat_vec(&[2.0, -1.0]).unwrap();
        let x = a.least_squares(&b).unwrap();
        assert!(close(x[0], 2.0, 1e-12));
        assert!(close(x[1], -1.0, 1e-12));
    }

    #[test]
    fn null_space_vectors_are_annihilated() {
        let a = DenseMatrix::new(2, 4, vec![1.0, 0.0, 1.0, 2.0, 0.0, 1.0, -1.0, 3.0]).unwrap();
        let ns = a.null_space().unwrap();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let av = a.mat_vec(v).unwrap();
            assert!(av.iter().all(|x| x.abs() < 1e-12));
        }
    }
}
