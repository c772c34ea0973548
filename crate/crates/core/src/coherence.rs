//! Coherence-family statistics of a normalized Gram matrix: mutual coherence,
//! sub-mutual coherence, coherence rank and sub-coherence rank, with an
//! explicit tie tolerance for the "equal to mu" classification.

use crate::linalg::GramMatrix;
use thiserror::Error;

/// Default tie tolerance for machine-precision inputs. Fixture matrices
/// entered at 4-decimal precision should use a looser tolerance (5e-4).
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CoherenceError {
    /// Every off-diagonal absolute entry ties with mu, so the sub-mutual
    /// coherence is undefined and the coherence-rank bounds do not apply.
    /// Carries mu so callers can still use the classic bound.
    #[error("sub-mutual coherence undefined: every off-diagonal entry ties with mu = {mu}")]
    Degenerate { mu: f64 },
    #[error("coherence statistics need at least two columns, got {0}")]
    TooFewColumns(usize),
    #[error("gram matrix was not built from normalized columns")]
    NotNormalized,
}

/// Coherence statistics of one normalized Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceSummary {
    /// Mutual coherence: largest absolute off-diagonal entry.
    pub mu: f64,
    /// Sub-mutual coherence: largest absolute off-diagonal entry strictly
    /// below `mu - tie_tolerance`. `None` only for an orthogonal dictionary.
    pub mu2: Option<f64>,
    /// Coherence rank: maximum per-row count of entries tying with mu.
    pub alpha: usize,
    /// Sub-coherence rank: second-largest per-row tie count, counting
    /// multiplicity.
    pub beta: usize,
    /// Per-row tie counts.
    pub row_tie_counts: Vec<usize>,
    /// Tolerance used for the "equal to mu" classification.
    pub tie_tolerance: f64,
    /// All off-diagonal entries are zero (within the tolerance): mu carries
    /// no information, `1/mu` is unusable, and the tie counts degenerate to
    /// `n - 1`. Bound evaluation should be skipped in favor of the exact
    /// spark path.
    pub orthogonal: bool,
}

/// Membership in the matrix class for which the coherence-rank spark bound
/// applies. When both conditions hold the rank condition is reported, with
/// the flag recording that the secondary condition holds too.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassMembership {
    /// `alpha < 1/mu`.
    M1 {
        also_m2: bool,
    },
    /// `alpha <= 1/mu` and `beta < alpha` (and not M1).
    M2,
    NotInM,
}

impl ClassMembership {
    pub fn in_class(&self) -> bool {
        !matches!(self, ClassMembership::NotInM)
    }
}

/// Compute the coherence summary of a normalized Gram matrix.
///
/// Entries within `tie_tolerance` of mu are classified as equal to mu. An
/// orthogonal dictionary (all off-diagonals below the tolerance) is not an
/// error; it is reported with the `orthogonal` flag set. A nonzero mu that
/// every entry ties with leaves mu2 undefined and is reported as
/// [`CoherenceError::Degenerate`].
pub fn coherence_summary(
    g: &GramMatrix,
    tie_tolerance: f64,
) -> Result<CoherenceSummary, CoherenceError> {
    if !g.source_normalized() {
        return Err(CoherenceError::NotNormalized);
    }
    let n = g.dim();
    if n < 2 {
        return Err(CoherenceError::TooFewColumns(n));
    }
    let mu = g.max_abs_off_diagonal();

    if mu <= tie_tolerance {
        return Ok(CoherenceSummary {
            mu,
            mu2: None,
            alpha: n - 1,
            beta: n - 1,
            row_tie_counts: vec![n - 1; n],
            tie_tolerance,
            orthogonal: true,
        });
    }

    let cut = mu - tie_tolerance;
    let mut row_tie_counts = vec![0usize; n];
    let mut mu2 = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = g.get(i, j).abs();
            if v >= cut {
                row_tie_counts[i] += 1;
            } else if v > mu2 {
                mu2 = v;
            }
        }
    }
    if !mu2.is_finite() {
        return Err(CoherenceError::Degenerate { mu });
    }

    let mut sorted = row_tie_counts.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let alpha = sorted[0];
    let beta = sorted[1];

    Ok(CoherenceSummary {
        mu,
        mu2: Some(mu2),
        alpha,
        beta,
        row_tie_counts,
        tie_tolerance,
        orthogonal: false,
    })
}

/// Classify a summary against the coherence-rank conditions. Callers must
/// ensure `mu > 0`; orthogonal summaries are reported as `NotInM` since their
/// coherence bounds are skipped anyway.
pub fn class_membership(s: &CoherenceSummary) -> ClassMembership {
    if s.orthogonal || s.mu <= 0.0 {
        return ClassMembership::NotInM;
    }
    let inv_mu = 1.0 / s.mu;
    let m2 = s.alpha as f64 <= inv_mu && s.beta < s.alpha;
    if (s.alpha as f64) < inv_mu {
        ClassMembership::M1 { also_m2: m2 }
    } else if m2 {
        ClassMembership::M2
    } else {
        ClassMembership::NotInM
    }
}
