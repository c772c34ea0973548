//! Babel and sub-Babel profiles of a normalized Gram matrix, and the two
//! spark thresholds they induce.
//!
//! For each row the absolute off-diagonal entries are sorted descending; the
//! Babel value at q is the maximal sum of the q largest over all rows, and
//! the sub-Babel value is the same sum maximized over the remaining rows.
//! The thresholds scan q = 1..=n with the value at q - 1 = 0 defined as 0,
//! so q = 1 never triggers.

use crate::linalg::GramMatrix;
use thiserror::Error;

/// One-sided slack for the threshold scans: an exactly-parallel column pair
/// makes the true partial sum exactly 1, which float rounding can land a
/// few ulps below. The slack only ever lowers a threshold, so the reported
/// value stays a valid spark lower bound.
const THRESHOLD_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BabelError {
    #[error("threshold q-hat does not exist for this profile")]
    MissingThreshold,
}

/// Babel-family profile of one normalized Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BabelProfile {
    /// Column count of the source matrix.
    pub n: usize,
    /// Babel values for q = 1..=n-1 (index q - 1).
    pub babel: Vec<f64>,
    /// Sub-Babel values for q = 1..=n-1.
    pub sub_babel: Vec<f64>,
    /// Maximizing row per q; ties resolved to the smallest row index.
    pub maximizing_row: Vec<usize>,
    /// Smallest q with `babel(q-1) >= 1`, if any.
    pub q_hat: Option<usize>,
    /// Smallest q with `babel(q-1) * sub_babel(q-1) >= 1`, if any.
    pub q_star: Option<usize>,
}

impl BabelProfile {
    /// Babel value at `q`, with the `q = 0` convention of 0.
    pub fn babel_at(&self, q: usize) -> f64 {
        if q == 0 {
            0.0
        } else {
            self.babel[q - 1]
        }
    }

    /// Sub-Babel value at `q`, with the `q = 0` convention of 0.
    pub fn sub_babel_at(&self, q: usize) -> f64 {
        if q == 0 {
            0.0
        } else {
            self.sub_babel[q - 1]
        }
    }
}

/// Compute the Babel profile. The maximizing row is recomputed per q, and
/// when several rows tie at the maximum the smallest index is chosen, which
/// makes the sub-Babel value equal the Babel value there.
///
/// # Panics
///
/// Panics if the Gram matrix was not built from normalized columns or has
/// fewer than two columns; both are contract violations.
pub fn babel_profile(g: &GramMatrix) -> BabelProfile {
    assert!(
        g.source_normalized(),
        "babel profile requires a normalized Gram matrix"
    );
    let n = g.dim();
    assert!(n >= 2, "babel profile requires at least two columns");

    // Per-row prefix sums of the descending absolute off-diagonal entries.
    let mut prefix: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut row = g.abs_off_diagonal_row(k);
        row.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut acc = 0.0;
        let sums: Vec<f64> = row
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        prefix.push(sums);
    }

    let mut babel = Vec::with_capacity(n - 1);
    let mut sub_babel = Vec::with_capacity(n - 1);
    let mut maximizing_row = Vec::with_capacity(n - 1);
    for q in 1..n {
        let mut k0 = 0usize;
        for k in 1..n {
            if prefix[k][q - 1] > prefix[k0][q - 1] {
                k0 = k;
            }
        }
        let second = (0..n)
            .filter(|&k| k != k0)
            .map(|k| prefix[k][q - 1])
            .fold(f64::NEG_INFINITY, f64::max);
        babel.push(prefix[k0][q - 1]);
        sub_babel.push(second);
        maximizing_row.push(k0);
    }

    let mut q_hat = None;
    let mut q_star = None;
    for q in 1..=n {
        let b = if q == 1 { 0.0 } else { babel[q - 2] };
        let s = if q == 1 { 0.0 } else { sub_babel[q - 2] };
        if q_hat.is_none() && b >= 1.0 - THRESHOLD_SLACK {
            q_hat = Some(q);
        }
        if q_star.is_none() && b * s >= 1.0 - THRESHOLD_SLACK {
            q_star = Some(q);
        }
    }

    BabelProfile {
        n,
        babel,
        sub_babel,
        maximizing_row,
        q_hat,
        q_star,
    }
}

/// Whether the sub-Babel product at `q_hat - 1` is strictly below 1, in
/// which case the sub-Babel threshold is strictly larger than the Babel one.
pub fn sub_babel_strict_gain_holds(p: &BabelProfile) -> Result<bool, BabelError> {
    let q_hat = p.q_hat.ok_or(BabelError::MissingThreshold)?;
    Ok(p.babel_at(q_hat - 1) * p.sub_babel_at(q_hat - 1) < 1.0)
}
