//! Nonsingular scalings `W A` and the certificates recomputed under them:
//! user-supplied `W`, a diagonal built from the right-hand side, an
//! SVD-derived whitening, and a seeded heuristic search toward a lower
//! scaled coherence. The spark is invariant under every nonsingular scaling;
//! the coherence family is not, which is the whole point.

use crate::coherence::{coherence_summary, CoherenceError, CoherenceSummary};
use crate::exec;
use crate::linalg::{DenseMatrix, GramMatrix, LinalgError};
use crate::spark::{spark_report, SparkError, SparkReport};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Condition-number ceiling for generated scalings; ill-conditioned W
/// destroys tie detection.
const CONDITION_CEILING: f64 = 1e3;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ScalingError {
    #[error("scaling matrix is numerically singular")]
    SingularScaling,
    #[error("matrix must have full row rank for the SVD scaling")]
    RankDeficient,
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("spark analysis failed: {0}")]
    Spark(#[from] SparkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingKind {
    /// Caller-provided nonsingular W.
    Explicit,
    /// Diagonal with entries `1/b_i` (1 where `b_i = 0`).
    DiagonalFromRhs,
    /// `inv(Sigma) U^T` from the SVD of the system matrix.
    SvdWhitening,
    /// Best W found by randomized search plus coordinate descent.
    SearchHeuristic,
}

/// A concrete m x m scaling with its provenance and conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSpec {
    pub kind: ScalingKind,
    pub w: DenseMatrix,
    pub condition_number: f64,
    /// The right-hand side a diagonal scaling was built from.
    pub rhs: Option<Vec<f64>>,
}

impl ScalingSpec {
    /// Wrap an explicit W, verifying nonsingularity.
    pub fn explicit(w: DenseMatrix) -> Result<Self, ScalingError> {
        if w.rows() != w.cols() {
            return Err(ScalingError::DimensionMismatch {
                expected: (w.rows(), w.rows()),
                got: (w.rows(), w.cols()),
            });
        }
        if w.numerical_rank() < w.rows() {
            return Err(ScalingError::SingularScaling);
        }
        let condition_number = condition_of(&w)?;
        Ok(Self {
            kind: ScalingKind::Explicit,
            w,
            condition_number,
            rhs: None,
        })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            kind: ScalingKind::Explicit,
            w: DenseMatrix::identity(m),
            condition_number: 1.0,
            rhs: None,
        }
    }

    /// The scaled right-hand side `W b`.
    ///
    /// For a diagonal scaling applied to the vector it was built from, the
    /// result is formed directly from the sign pattern (1 where `b_i != 0`,
    /// 0 elsewhere), which the defining algebra gives exactly; a float
    /// product `b_i * (1/b_i)` can land one ulp off.
    pub fn scaled_rhs(&self, b: &[f64]) -> Result<Vec<f64>, ScalingError> {
        if self.kind == ScalingKind::DiagonalFromRhs {
            if let Some(own) = &self.rhs {
                if own == b {
                    return Ok(b
                        .iter()
                        .map(|&v| if v != 0.0 { 1.0 } else { 0.0 })
                        .collect());
                }
            }
        }
        Ok(self.w.mat_vec(b)?)
    }
}

fn condition_of(w: &DenseMatrix) -> Result<f64, ScalingError> {
    Ok(w.svd()?.condition_number())
}

/// Apply a scaling: returns `W A`. Callers renormalize columns before any
/// Gram analysis; normalization changes neither spark nor solution sparsity.
pub fn apply_scaling(a: &DenseMatrix, spec: &ScalingSpec) -> Result<DenseMatrix, ScalingError> {
    if spec.w.cols() != a.rows() {
        return Err(ScalingError::DimensionMismatch {
            expected: (a.rows(), a.rows()),
            got: (spec.w.rows(), spec.w.cols()),
        });
    }
    if spec.w.numerical_rank() < spec.w.rows() {
        return Err(ScalingError::SingularScaling);
    }
    Ok(spec.w.mat_mul(a)?)
}

/// Diagonal scaling built from a right-hand side: entries `1/b_i` where
/// `b_i != 0` and 1 elsewhere, so the scaled right-hand side is the
/// absolute sign pattern of `b`.
pub fn phi_diagonal_from_rhs(b: &[f64]) -> ScalingSpec {
    let m = b.len();
    let mut data = vec![0.0; m * m];
    let mut max_d = 0.0_f64;
    let mut min_d = f64::INFINITY;
    for (i, &v) in b.iter().enumerate() {
        let d = if v != 0.0 { 1.0 / v } else { 1.0 };
        data[i * m + i] = d;
        max_d = max_d.max(d.abs());
        min_d = min_d.min(d.abs());
    }
    ScalingSpec {
        kind: ScalingKind::DiagonalFromRhs,
        w: DenseMatrix::new(m, m, data).expect("finite reciprocals of finite nonzero entries"),
        condition_number: max_d / min_d,
        rhs: Some(b.to_vec()),
    }
}

/// Scaling `inv(Sigma) U^T` from the SVD of `a`; requires full row rank.
/// The scaled product equals the top rows of `V^T` up to orthogonal
/// convention, so its coherence can stand in for the system matrix's.
pub fn svd_scaling(a: &DenseMatrix) -> Result<ScalingSpec, ScalingError> {
    let m = a.rows();
    let f = a.svd()?;
    let rank = crate::linalg::rank_from_singular_values(f.singular_values(), a.rows(), a.cols());
    if rank < m {
        return Err(ScalingError::RankDeficient);
    }
    // inv(Sigma) U^T: row i is u_i^T / sigma_i.
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        let s = f.singular_values()[i];
        for j in 0..m {
            data[i * m + j] = f.u().get(j, i) / s;
        }
    }
    let w = DenseMatrix::new(m, m, data)?;
    let condition_number = condition_of(&w)?;
    Ok(ScalingSpec {
        kind: ScalingKind::SvdWhitening,
        w,
        condition_number,
        rhs: None,
    })
}

/// Mutual coherence of `W a`; infinite when the product has a zero column
/// (degenerate candidate).
fn scaled_mu(a: &DenseMatrix, w: &DenseMatrix) -> f64 {
    let Ok(wa) = w.mat_mul(a) else {
        return f64::INFINITY;
    };
    match GramMatrix::normalized(&wa) {
        Ok(g) => g.max_abs_off_diagonal(),
        Err(_) => f64::INFINITY,
    }
}

pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller from two open-interval uniforms.
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn random_well_conditioned(m: usize, rng: &mut ChaCha8Rng) -> Option<(DenseMatrix, f64)> {
    for _ in 0..64 {
        let data: Vec<f64> = (0..m * m).map(|_| standard_normal(rng)).collect();
        let Ok(w) = DenseMatrix::new(m, m, data) else {
            continue;
        };
        let Ok(cond) = condition_of(&w) else { continue };
        if cond <= CONDITION_CEILING {
            return Some((w, cond));
        }
    }
    None
}

/// Heuristic search for a scaling with low scaled coherence.
///
/// Candidates are the identity, `trials` random Gaussian matrices filtered
/// to condition number at most 1e3, and a coordinate-descent refinement of
/// the best random candidate (one entry at a time, shrinking step, strict
/// improvements only). The winner is an upper bound on the optimal scaled
/// coherence and never exceeds the unscaled value, since the identity is
/// always in the candidate set. Deterministic for a fixed seed.
pub fn search_scaling(a: &DenseMatrix, trials: usize, seed: u64) -> ScalingSpec {
    use rand::SeedableRng;
    let m = a.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let identity = DenseMatrix::identity(m);
    let mut candidates: Vec<DenseMatrix> = Vec::with_capacity(trials + 2);
    candidates.push(identity);
    for _ in 0..trials {
        if let Some((w, _)) = random_well_conditioned(m, &mut rng) {
            candidates.push(w);
        }
    }

    let mus = exec::map_collect(&candidates, |w| scaled_mu(a, w));
    let mut best_idx = 0;
    for (i, &mu) in mus.iter().enumerate() {
        if mu < mus[best_idx] {
            best_idx = i;
        }
    }

    // Refine the best random candidate; keep whichever of the three families
    // of candidates ends up lowest.
    let mut best_w = candidates[best_idx].clone();
    let mut best_mu = mus[best_idx];
    if best_idx > 0 {
        let (w, mu) = coordinate_descent(a, candidates[best_idx].clone(), mus[best_idx]);
        if mu < best_mu {
            best_w = w;
            best_mu = mu;
        }
    }
    let _ = best_mu;

    let condition_number = condition_of(&best_w).unwrap_or(f64::INFINITY);
    ScalingSpec {
        kind: ScalingKind::SearchHeuristic,
        w: best_w,
        condition_number,
        rhs: None,
    }
}

fn coordinate_descent(a: &DenseMatrix, mut w: DenseMatrix, mut mu: f64) -> (DenseMatrix, f64) {
    let m = w.rows();
    let step0 = 0.25 * w.max_abs().max(1e-3);
    for level in 0..8 {
        let step = step0 * 0.5_f64.powi(level);
        for entry in 0..m * m {
            for delta in [step, -step] {
                let mut data = w.data().to_vec();
                data[entry] += delta;
                let Ok(candidate) = DenseMatrix::new(m, m, data) else {
                    continue;
                };
                let Ok(cond) = condition_of(&candidate) else {
                    continue;
                };
                if cond > CONDITION_CEILING {
                    continue;
                }
                let candidate_mu = scaled_mu(a, &candidate);
                if candidate_mu < mu {
                    w = candidate;
                    mu = candidate_mu;
                }
            }
        }
    }
    (w, mu)
}

/// Vectorize a matrix-form linear system: column i of the result is the
/// row-major flattening of the i-th operator (stacking the columns of its
/// transpose), and the right-hand side is the flattening of `rhs`. The
/// trace inner product of two operators equals the ordinary inner product
/// of their vectorizations, so the operator system's coherence is the
/// vectorized system's.
pub fn matrix_form_ingest(
    operators: &[DenseMatrix],
    rhs: &DenseMatrix,
) -> Result<(DenseMatrix, Vec<f64>), ScalingError> {
    let m = rhs.rows();
    let q = rhs.cols();
    if operators.is_empty() {
        return Err(ScalingError::DimensionMismatch {
            expected: (m, q),
            got: (0, 0),
        });
    }
    for op in operators {
        if op.rows() != m || op.cols() != q {
            return Err(ScalingError::DimensionMismatch {
                expected: (m, q),
                got: (op.rows(), op.cols()),
            });
        }
    }
    let rows = m * q;
    let n = operators.len();
    let mut data = vec![0.0; rows * n];
    for (j, op) in operators.iter().enumerate() {
        for (k, &v) in op.data().iter().enumerate() {
            data[k * n + j] = v;
        }
    }
    let a = DenseMatrix::new(rows, n, data)?;
    Ok((a, rhs.data().to_vec()))
}

/// Deltas of the scaled bounds against the unscaled ones (scaled minus
/// unscaled; positive means the scaling improved the bound).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundDeltas {
    pub classic: Option<f64>,
    pub best_certified: f64,
}

/// Certificates of the scaled system, with the scaled-minus-unscaled deltas.
#[derive(Debug, Clone)]
pub struct ScaledCertificates {
    pub spec: ScalingSpec,
    pub summary: Option<CoherenceSummary>,
    pub report: SparkReport,
    pub comparison: BoundDeltas,
}

/// Recompute the coherence summary and spark report for `W A` and compare
/// against an unscaled report.
pub fn scaled_certificates(
    a: &DenseMatrix,
    spec: &ScalingSpec,
    unscaled: &SparkReport,
    tie_tolerance: f64,
    want_exact: bool,
    budget: usize,
) -> Result<ScaledCertificates, ScalingError> {
    let wa = apply_scaling(a, spec)?;
    let report = spark_report(&wa, tie_tolerance, want_exact, budget)?;
    let summary = match GramMatrix::normalized(&wa) {
        Ok(g) => match coherence_summary(&g, tie_tolerance) {
            Ok(s) => Some(s),
            Err(CoherenceError::Degenerate { .. }) => None,
            Err(_) => None,
        },
        Err(_) => None,
    };
    let comparison = BoundDeltas {
        classic: match (report.classic_bound, unscaled.classic_bound) {
            (Some(s), Some(u)) => Some(s - u),
            _ => None,
        },
        best_certified: report.best_certified - unscaled.best_certified,
    };
    Ok(ScaledCertificates {
        spec: spec.clone(),
        summary,
        report,
        comparison,
    })
}
