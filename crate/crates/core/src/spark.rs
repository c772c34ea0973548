//! Exact spark by combinatorial search plus the coherence-family lower
//! bounds, aggregated into a report with a best certified value.
//!
//! The search enumerates column subsets in increasing size, lexicographically
//! within each size, and stops at the first rank-deficient subset, which
//! makes the witness minimal and deterministic. Subsets of a given size are
//! rank-tested in parallel chunks; the reduction keeps the lexicographically
//! first hit, so the result matches the sequential scan exactly.

use crate::babel::babel_profile;
use crate::coherence::{class_membership, coherence_summary, CoherenceError, CoherenceSummary};
use crate::exec;
use crate::linalg::{DenseMatrix, GramMatrix, LinalgError};
use thiserror::Error;

/// Default enumeration budget, counted in rank tests.
pub const DEFAULT_SPARK_BUDGET: usize = 2_000_000;

/// Subsets are rank-tested in chunks of this many to bound memory while
/// keeping the parallel reduction ordered.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SparkError {
    /// The enumeration limit was hit. Every subset of size up to
    /// `independent_through` was verified independent, so
    /// `spark > independent_through` is still certified.
    #[error(
        "subset budget exhausted; all subsets of size <= {independent_through} are independent"
    )]
    BudgetExhausted { independent_through: usize },
    #[error("spark analysis requires at least two rows, got {0}")]
    TooFewRows(usize),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BoundError {
    #[error("coherence-rank conditions do not hold for this summary")]
    NotApplicable,
    #[error("sub-mutual coherence undefined; bound cannot be evaluated")]
    DegenerateCoherence,
}

/// Exact spark value: the smallest dependent subset size, or infinite when
/// the matrix has full column rank (only possible with at least as many rows
/// as columns).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparkValue {
    Finite(usize),
    Infinite,
}

impl SparkValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            SparkValue::Finite(p) => *p as f64,
            SparkValue::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<usize> {
        match self {
            SparkValue::Finite(p) => Some(*p),
            SparkValue::Infinite => None,
        }
    }
}

/// Result of the exact search: the spark and, when finite, the
/// lexicographically first dependent subset of that size.
#[derive(Debug, Clone, PartialEq)]
pub struct SparkSearch {
    pub spark: SparkValue,
    pub witness: Option<Vec<usize>>,
}

/// Every spark lower bound the coherence family yields, with the exact value
/// when the search ran, aggregated into the best certified bound.
#[derive(Debug, Clone)]
pub struct SparkReport {
    pub exact: Option<SparkValue>,
    pub witness: Option<Vec<usize>>,
    /// Present when the search hit its budget: all sizes through this value
    /// were verified independent.
    pub search_floor: Option<usize>,
    /// `1 + 1/mu`; absent for an orthogonal dictionary.
    pub classic_bound: Option<f64>,
    /// Coherence-rank bound; present when the class conditions hold.
    pub coherence_rank_bound: Option<f64>,
    /// Closed-form estimate under `alpha < 1/mu`.
    pub rank_estimate_first: Option<f64>,
    /// Closed-form estimate under `alpha <= 1/mu` and `beta < alpha`.
    pub rank_estimate_second: Option<f64>,
    /// Coherence-rank-1 bound, for `mu < 1` and `alpha = 1`.
    pub rank_one_bound: Option<f64>,
    /// Babel threshold q-hat.
    pub babel_bound: Option<usize>,
    /// Sub-Babel threshold q-star.
    pub sub_babel_bound: Option<usize>,
    /// Largest certified lower bound on the spark (infinite when the exact
    /// search proved full column rank).
    pub best_certified: f64,
    /// Coherence summary the bounds were derived from, when defined.
    pub summary: Option<CoherenceSummary>,
}

/// Exact spark of `a` by subset enumeration.
///
/// Sizes are enumerated in increasing order and a size is only attempted
/// when its full subset count fits in the remaining budget, so parallel and
/// sequential runs exhaust the budget identically. Any `m + 1` columns of an
/// m-row matrix are dependent by dimension, so that size needs no rank test
/// and the search is guaranteed to terminate at `min(m + 1, n)`.
pub fn exact_spark(a: &DenseMatrix, budget: usize) -> Result<SparkSearch, SparkError> {
    let m = a.rows();
    let n = a.cols();
    let max_size = (m + 1).min(n);
    let mut remaining = budget;

    for p in 1..=max_size {
        if p > m {
            return Ok(SparkSearch {
                spark: SparkValue::Finite(p),
                witness: Some((0..p).collect()),
            });
        }
        let count = binomial(n, p);
        if count > remaining {
            return Err(SparkError::BudgetExhausted {
                independent_through: p - 1,
            });
        }
        remaining -= count;
        if let Some(subset) = first_dependent_subset(a, p) {
            return Ok(SparkSearch {
                spark: SparkValue::Finite(p),
                witness: Some(subset),
            });
        }
    }
    Ok(SparkSearch {
        spark: SparkValue::Infinite,
        witness: None,
    })
}

/// Lexicographically first subset of `size` columns whose submatrix is
/// rank-deficient.
fn first_dependent_subset(a: &DenseMatrix, size: usize) -> Option<Vec<usize>> {
    let mut cursor = Combinations::new(a.cols(), size);
    let mut chunk: Vec<Vec<usize>> = Vec::with_capacity(CHUNK);
    loop {
        chunk.clear();
        while chunk.len() < CHUNK {
            match cursor.next_subset() {
                Some(s) => chunk.push(s),
                None => break,
            }
        }
        if chunk.is_empty() {
            return None;
        }
        let hit = exec::find_first_map(&chunk, |subset| {
            let sub = a.select_columns(subset);
            (sub.numerical_rank() < subset.len()).then(|| subset.clone())
        });
        if hit.is_some() {
            return hit;
        }
    }
}

/// Lexicographic k-subset generator over `0..n`.
struct Combinations {
    n: usize,
    k: usize,
    state: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        let state = (k <= n && k > 0).then(|| (0..k).collect());
        Self { n, k, state }
    }

    fn next_subset(&mut self) -> Option<Vec<usize>> {
        let current = self.state.clone()?;
        // Advance: find the rightmost index that can move up.
        let next = {
            let mut s = current.clone();
            let mut i = self.k;
            loop {
                if i == 0 {
                    break None;
                }
                i -= 1;
                if s[i] < self.n - (self.k - i) {
                    s[i] += 1;
                    for j in i + 1..self.k {
                        s[j] = s[j - 1] + 1;
                    }
                    break Some(s);
                }
            }
        };
        self.state = next;
        Some(current)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Coherence-rank spark bound
/// `1 + 2(1 - a b t^2) / (mu2 (t (a + b) + sqrt((t (a - b))^2 + 4)))`
/// with `t = mu - mu2`, valid when the class conditions hold.
pub fn coherence_rank_bound(s: &CoherenceSummary) -> Result<f64, BoundError> {
    if !class_membership(s).in_class() {
        return Err(BoundError::NotApplicable);
    }
    let mu2 = s.mu2.ok_or(BoundError::DegenerateCoherence)?;
    if mu2 <= 0.0 {
        return Err(BoundError::DegenerateCoherence);
    }
    let a = s.alpha as f64;
    let b = s.beta as f64;
    let t = s.mu - mu2;
    let numer = 2.0 * (1.0 - a * b * t * t);
    let denom = mu2 * (t * (a + b) + ((t * (a - b)).powi(2) + 4.0).sqrt());
    Ok(1.0 + numer / denom)
}

/// Closed-form estimates under each class condition. The first is valid
/// when `alpha < 1/mu`, the second adds a correction when `alpha <= 1/mu`
/// and `beta < alpha`; each is a lower bound on the coherence-rank bound.
pub fn coherence_rank_estimates(
    s: &CoherenceSummary,
) -> Result<(Option<f64>, Option<f64>), BoundError> {
    let mu2 = s.mu2.ok_or(BoundError::DegenerateCoherence)?;
    if s.orthogonal || s.mu <= 0.0 {
        return Err(BoundError::NotApplicable);
    }
    let a = s.alpha as f64;
    let inv_mu = 1.0 / s.mu;
    let t = s.mu - mu2;
    let base = (1.0 + inv_mu) + (1.0 / mu2 - inv_mu) * (1.0 - a * s.mu);
    let case1 = (a < inv_mu).then_some(base);
    let case2 = (a <= inv_mu && s.beta < s.alpha).then(|| base + a * t * t / (mu2 * (1.0 + a * t)));
    if case1.is_none() && case2.is_none() {
        return Err(BoundError::NotApplicable);
    }
    Ok((case1, case2))
}

/// Coherence-rank-1 bound, for `mu < 1` and `alpha = 1`:
/// `1 + 1/mu + (1/mu2 - 1/mu)(1 - mu)`.
pub fn rank_one_bound(s: &CoherenceSummary) -> Option<f64> {
    let mu2 = s.mu2?;
    (!s.orthogonal && s.mu < 1.0 && s.mu > 0.0 && s.alpha == 1)
        .then(|| 1.0 + 1.0 / s.mu + (1.0 / mu2 - 1.0 / s.mu) * (1.0 - s.mu))
}

/// Eigenvalue-inclusion sanity check for a dependent column subset: the zero
/// eigenvalue of the subset Gram must lie in the union of the pairwise ovals
/// `|G_ii| |G_jj| <= D_i D_j` with `D_i` the off-diagonal absolute row sum.
/// Verified with a small slack so exact-parallel columns do not fail on
/// rounding.
pub fn brauer_inclusion_check(g: &GramMatrix, subset: &[usize]) -> bool {
    const SLACK: f64 = 1e-9;
    let p = subset.len();
    if p < 2 {
        return false;
    }
    let mut delta = vec![0.0_f64; p];
    for (i, &si) in subset.iter().enumerate() {
        for (j, &sj) in subset.iter().enumerate() {
            if i != j {
                delta[i] += g.get(si, sj).abs();
            }
        }
    }
    for i in 0..p {
        for j in (i + 1)..p {
            let dii = g.get(subset[i], subset[i]).abs();
            let djj = g.get(subset[j], subset[j]).abs();
            if dii * djj <= delta[i] * delta[j] + SLACK {
                return true;
            }
        }
    }
    false
}

/// Compute every applicable bound and, when requested, the exact spark.
/// Sub-operation failures surface as absent fields, never total failure.
pub fn spark_report(
    a: &DenseMatrix,
    tie_tolerance: f64,
    want_exact: bool,
    budget: usize,
) -> Result<SparkReport, SparkError> {
    if a.rows() < 2 {
        return Err(SparkError::TooFewRows(a.rows()));
    }

    let mut report = SparkReport {
        exact: None,
        witness: None,
        search_floor: None,
        classic_bound: None,
        coherence_rank_bound: None,
        rank_estimate_first: None,
        rank_estimate_second: None,
        rank_one_bound: None,
        babel_bound: None,
        sub_babel_bound: None,
        best_certified: 1.0,
        summary: None,
    };

    match gram_and_summary(a, tie_tolerance) {
        Ok((gram, summary)) => {
            if !summary.orthogonal && summary.mu > 0.0 {
                report.classic_bound = Some(1.0 + 1.0 / summary.mu);
            }
            if let Ok(psi) = coherence_rank_bound(&summary) {
                report.coherence_rank_bound = Some(psi);
            }
            if let Ok((c1, c2)) = coherence_rank_estimates(&summary) {
                report.rank_estimate_first = c1;
                report.rank_estimate_second = c2;
            }
            report.rank_one_bound = rank_one_bound(&summary);
            let profile = babel_profile(&gram);
            report.babel_bound = profile.q_hat;
            report.sub_babel_bound = profile.q_star;
            report.summary = Some(summary);
        }
        Err(SummaryFailure::Degenerate { mu }) => {
            // mu is still defined, so the classic bound survives.
            report.classic_bound = Some(1.0 + 1.0 / mu);
        }
        Err(SummaryFailure::Unavailable) => {}
    }

    if want_exact {
        match exact_spark(a, budget) {
            Ok(search) => {
                report.exact = Some(search.spark);
                report.witness = search.witness;
            }
            Err(SparkError::BudgetExhausted {
                independent_through,
            }) => {
                report.search_floor = Some(independent_through);
            }
            Err(e) => return Err(e),
        }
    }

    report.best_certified = report.lower_bounds().into_iter().fold(1.0_f64, f64::max);
    Ok(report)
}

enum SummaryFailure {
    Degenerate { mu: f64 },
    Unavailable,
}

fn gram_and_summary(
    a: &DenseMatrix,
    tie_tolerance: f64,
) -> Result<(GramMatrix, CoherenceSummary), SummaryFailure> {
    let gram = match GramMatrix::normalized(a) {
        Ok(g) => g,
        Err(LinalgError::ZeroColumn(_)) => return Err(SummaryFailure::Unavailable),
        Err(_) => return Err(SummaryFailure::Unavailable),
    };
    match coherence_summary(&gram, tie_tolerance) {
        Ok(s) => Ok((gram, s)),
        Err(CoherenceError::Degenerate { mu }) => Err(SummaryFailure::Degenerate { mu }),
        Err(_) => Err(SummaryFailure::Unavailable),
    }
}

impl SparkReport {
    /// Every certified lower bound currently present, as reals.
    pub fn lower_bounds(&self) -> Vec<f64> {
        let mut bounds = Vec::new();
        if let Some(v) = self.classic_bound {
            bounds.push(v);
        }
        if let Some(v) = self.coherence_rank_bound {
            bounds.push(v);
        }
        if let Some(v) = self.rank_estimate_first {
            bounds.push(v);
        }
        if let Some(v) = self.rank_estimate_second {
            bounds.push(v);
        }
        if let Some(v) = self.rank_one_bound {
            bounds.push(v);
        }
        if let Some(q) = self.babel_bound {
            bounds.push(q as f64);
        }
        if let Some(q) = self.sub_babel_bound {
            bounds.push(q as f64);
        }
        if let Some(floor) = self.search_floor {
            bounds.push((floor + 1) as f64);
        }
        if let Some(exact) = self.exact {
            bounds.push(exact.as_f64());
        }
        bounds
    }

    /// Exact spark when known, otherwise the best certified lower bound.
    pub fn spark_or_floor(&self) -> f64 {
        self.exact.map_or(self.best_certified, |e| e.as_f64())
    }
}
