//! One-sided Jacobi singular value decomposition with cyclic sweeps.
//!
//! The working matrix's columns are orthogonalized by plane rotations that
//! are simultaneously accumulated into V; singular values are the final
//! column norms. Wide matrices are handled by factoring the transpose and
//! swapping the factors. Self-contained and accurate for the small dense
//! matrices this crate targets.

use super::{DenseMatrix, LinalgError, ORTHOGONALITY_TOLERANCE};

/// Relative threshold below which a column pair counts as orthogonal.
/// Rounding keeps the normalized coupling of a rotated pair at a few ulps,
/// so the threshold sits an order above machine epsilon.
const JACOBI_TOLERANCE: f64 = 1e-14;

/// Sweep budget factor: a decomposition of an m x n matrix may use at most
/// `30 * max(m, n)` cyclic sweeps before reporting no convergence.
const SWEEP_BUDGET_FACTOR: usize = 30;

/// Full SVD factors `A = U diag(sigma) V^T`.
///
/// `U` is m x m orthogonal, `Vt` is n x n orthogonal, and the singular
/// values are nonnegative and sorted nonincreasing with length `min(m, n)`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    u: DenseMatrix,
    singular_values: Vec<f64>,
    vt: DenseMatrix,
}

impl SvdFactors {
    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn vt(&self) -> &DenseMatrix {
        &self.vt
    }

    /// Worst-case deviation of `U^T U` and `V^T V` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        defect(&self.u).max(defect(&self.vt))
    }

    /// `max |A - U diag(sigma) V^T|` against the given matrix.
    pub fn reconstruction_error(&self, a: &DenseMatrix) -> f64 {
        let m = a.rows();
        let n = a.cols();
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..n {
                let mut sum = 0.0;
                for (k, &s) in self.singular_values.iter().enumerate() {
                    sum += self.u.get(i, k) * s * self.vt.get(k, j);
                }
                worst = worst.max((sum - a.get(i, j)).abs());
            }
        }
        worst
    }

    /// Condition number `sigma_max / sigma_min`; infinite when singular.
    pub fn condition_number(&self) -> f64 {
        let s_max = self.singular_values.first().copied().unwrap_or(0.0);
        let s_min = self.singular_values.last().copied().unwrap_or(0.0);
        if s_min == 0.0 {
            f64::INFINITY
        } else {
            s_max / s_min
        }
    }
}

fn defect(q: &DenseMatrix) -> f64 {
    let n = q.rows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = (0..n).map(|k| q.get(k, i) * q.get(k, j)).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

pub(crate) fn svd(a: &DenseMatrix) -> Result<SvdFactors, LinalgError> {
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        // A = (A^T)^T = (U' S V'^T)^T, so U = V', Vt = U'^T.
        let f = svd_tall(&a.transpose())?;
        Ok(SvdFactors {
            u: f.vt.transpose(),
            singular_values: f.singular_values,
            vt: f.u.transpose(),
        })
    }
}

pub(crate) fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    let work = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.transpose()
    };
    let (cols, _) = jacobi_orthogonalize(work, false)?;
    let n = cols.cols();
    let mut sigma: Vec<f64> = (0..n).map(|j| cols.column_norm(j)).collect();
    sigma.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(sigma)
}

/// SVD of a tall (m >= n) matrix.
fn svd_tall(a: &DenseMatrix) -> Result<SvdFactors, LinalgError> {
    let m = a.rows();
    let n = a.cols();
    let (b, v) = jacobi_orthogonalize(a.clone(), true)?;
    let v = v.expect("accumulation requested");

    // Column norms of the rotated matrix are the singular values.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| b.column_norm(j)).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    // Columns with negligible norm carry no direction; complete them below.
    let keep_threshold = sigma_max * f64::EPSILON * m.max(n) as f64;

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (rank_pos, &j) in order.iter().enumerate() {
        if sigma[rank_pos] > keep_threshold && sigma[rank_pos] > 0.0 {
            let col = b.column(j);
            u_cols.push(col.iter().map(|x| x / sigma[rank_pos]).collect());
        }
    }
    complete_orthonormal_basis(&mut u_cols, m);

    let mut u_data = vec![0.0; m * m];
    for (k, col) in u_cols.iter().enumerate() {
        for i in 0..m {
            u_data[i * m + k] = col[i];
        }
    }
    let u = DenseMatrix::new(m, m, u_data).expect("orthonormal basis entries are finite");

    let mut vt_data = vec![0.0; n * n];
    for (k, &j) in order.iter().enumerate() {
        for r in 0..n {
            vt_data[k * n + r] = v.get(r, j);
        }
    }
    let vt = DenseMatrix::new(n, n, vt_data).expect("rotation products are finite");

    let factors = SvdFactors {
        u,
        singular_values: sigma,
        vt,
    };
    if factors.orthogonality_defect() > ORTHOGONALITY_TOLERANCE {
        return Err(LinalgError::NoConvergence {
            sweeps: SWEEP_BUDGET_FACTOR * m.max(n),
        });
    }
    Ok(factors)
}

/// Cyclic one-sided Jacobi: rotate column pairs of `b` until all pairs are
/// numerically orthogonal, optionally accumulating the rotations.
fn jacobi_orthogonalize(
    mut b: DenseMatrix,
    accumulate: bool,
) -> Result<(DenseMatrix, Option<DenseMatrix>), LinalgError> {
    let m = b.rows();
    let n = b.cols();
    let budget = SWEEP_BUDGET_FACTOR * m.max(n).max(1);
    let mut v = accumulate.then(|| DenseMatrix::identity(n));

    if n == 1 {
        return Ok((b, v));
    }

    // Columns whose norm falls below this floor are numerically zero;
    // rotating against them only chases rounding noise, so they are
    // deflated. Their singular values land below every rank threshold.
    let col_scale = (0..n).map(|j| b.column_norm(j)).fold(0.0_f64, f64::max);
    let tiny = (f64::EPSILON * col_scale * m.max(n) as f64).powi(2);

    let mut converged = false;
    for _ in 0..budget {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let (app, aqq, apq) = column_moments(&b, p, q);
                if app <= tiny || aqq <= tiny {
                    continue;
                }
                if apq.abs() <= JACOBI_TOLERANCE * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut b, p, q, c, s);
                if let Some(v) = v.as_mut() {
                    rotate_columns(v, p, q, c, s);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps: budget });
    }
    Ok((b, v))
}

fn column_moments(b: &DenseMatrix, p: usize, q: usize) -> (f64, f64, f64) {
    let mut app = 0.0;
    let mut aqq = 0.0;
    let mut apq = 0.0;
    for i in 0..b.rows() {
        let bp = b.get(i, p);
        let bq = b.get(i, q);
        app += bp * bp;
        aqq += bq * bq;
        apq += bp * bq;
    }
    (app, aqq, apq)
}

fn rotate_columns(b: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = b.cols;
    for i in 0..b.rows {
        let bp = b.data[i * cols + p];
        let bq = b.data[i * cols + q];
        b.data[i * cols + p] = c * bp - s * bq;
        b.data[i * cols + q] = s * bp + c * bq;
    }
}

/// Extend `cols` to a full orthonormal basis of R^dim, picking at each step
/// the standard basis vector with the largest residual and re-orthogonalizing
/// twice.
fn complete_orthonormal_basis(cols: &mut Vec<Vec<f64>>, dim: usize) {
    while cols.len() < dim {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for e in 0..dim {
            let mut w = vec![0.0; dim];
            w[e] = 1.0;
            for _ in 0..2 {
                for col in cols.iter() {
                    let dot: f64 = w.iter().zip(col).map(|(a, b)| a * b).sum();
                    for (wi, ci) in w.iter_mut().zip(col) {
                        *wi -= dot * ci;
                    }
                }
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
                best = Some((norm, w));
            }
        }
        let (norm, w) = best.expect("dim > 0");
        cols.push(w.into_iter().map(|x| x / norm).collect());
    }
}
