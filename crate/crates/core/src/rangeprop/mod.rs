//! Range-property certificates for the row space of the system matrix, and
//! the k-column independence check they imply.
//!
//! For every admissible pair of disjoint index sets (the second of size at
//! most one), the row space must contain a vector that is +1 on the first
//! set, -1 on the second, and strictly inside (-1, 1) elsewhere. Each pair
//! becomes a small Chebyshev feasibility LP: minimize the largest
//! off-support magnitude subject to the prescribed values. A pair passes
//! when the optimum is below 1 by the strictness margin; an LP optimum can
//! only certify a strict inequality with such a margin.

pub mod simplex;

pub use simplex::{solve_lp, Bound, LpError, LpProblem, LpSolution, LpStatus};

use crate::exec;
use crate::linalg::DenseMatrix;
use thiserror::Error;

/// Margin under 1 required of each pair's optimum.
pub const STRICTNESS_MARGIN: f64 = 1e-7;

/// Default ceiling on the number of pairs enumerated per certificate.
pub const DEFAULT_PAIR_BUDGET: usize = 200_000;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RangePropError {
    #[error("order {k} is out of range for {n} columns")]
    InvalidOrder { k: usize, n: usize },
    #[error("pair enumeration needs {required} pairs, over the budget of {budget}")]
    BudgetExhausted { required: usize, budget: usize },
    #[error("subset enumeration needs {required} rank tests, over the budget of {budget}")]
    SubsetBudgetExhausted { required: usize, budget: usize },
}

/// Outcome for one enumerated pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMargin {
    pub lambda1: Vec<usize>,
    pub lambda2: Vec<usize>,
    /// Optimal off-support magnitude; `None` when the pair's LP was
    /// infeasible or failed, with the diagnostic recording why.
    pub margin: Option<f64>,
    pub diagnostic: Option<String>,
}

impl PairMargin {
    pub fn passes(&self) -> bool {
        self.margin.is_some_and(|t| t < 1.0 - STRICTNESS_MARGIN)
    }
}

/// Aggregate certificate for one order.
#[derive(Debug, Clone, PartialEq)]
pub struct RangePropertyCertificate {
    pub order: usize,
    pub holds: bool,
    /// First failing pair in enumeration order, when any.
    pub failing_pair: Option<(Vec<usize>, Vec<usize>)>,
    pub margins: Vec<PairMargin>,
}

/// Certify the range property of the given order by solving one LP per
/// admissible pair. Order zero is vacuously true. Pairs are solved in
/// parallel; aggregation is a conjunction, so the result is
/// order-independent, and the recorded failing pair is the first in
/// enumeration order.
pub fn range_property_ii(
    a: &DenseMatrix,
    k: usize,
    pair_budget: usize,
) -> Result<RangePropertyCertificate, RangePropError> {
    let n = a.cols();
    if k > n {
        return Err(RangePropError::InvalidOrder { k, n });
    }
    if k == 0 {
        return Ok(RangePropertyCertificate {
            order: 0,
            holds: true,
            failing_pair: None,
            margins: Vec::new(),
        });
    }
    let required = binomial_count(n, k).saturating_mul(k + 1);
    if required > pair_budget {
        return Err(RangePropError::BudgetExhausted {
            required,
            budget: pair_budget,
        });
    }

    let mut pairs: Vec<(Vec<usize>, Vec<usize>)> = Vec::with_capacity(required);
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        pairs.push((subset.clone(), Vec::new()));
        for drop in 0..k {
            let lambda1: Vec<usize> = subset
                .iter()
                .enumerate()
                .filter(|(pos, _)| *pos != drop)
                .map(|(_, &c)| c)
                .collect();
            pairs.push((lambda1, vec![subset[drop]]));
        }
        if !advance(&mut subset, n) {
            break;
        }
    }

    let at = a.transpose();
    let margins = exec::map_collect(&pairs, |(lambda1, lambda2)| {
        solve_pair(a, &at, lambda1, lambda2)
    });

    let failing = margins.iter().position(|m| !m.passes());
    Ok(RangePropertyCertificate {
        order: k,
        holds: failing.is_none(),
        failing_pair: failing.map(|i| (pairs[i].0.clone(), pairs[i].1.clone())),
        margins,
    })
}

/// One Chebyshev pair: minimize t subject to `(A^T y)_i = +-1` on the pair
/// and `-t <= (A^T y)_j <= t` outside it.
fn solve_pair(
    a: &DenseMatrix,
    at: &DenseMatrix,
    lambda1: &[usize],
    lambda2: &[usize],
) -> PairMargin {
    let m = a.rows();
    let n = a.cols();
    let on_support = |j: usize| lambda1.contains(&j) || lambda2.contains(&j);
    let outside: Vec<usize> = (0..n).filter(|&j| !on_support(j)).collect();

    // Variables: y (m, free), t (1, >= 0), then slack pairs per outside
    // column for (A^T y)_j - t + s = 0 and (A^T y)_j + t - r = 0.
    let n_vars = m + 1 + 2 * outside.len();
    let n_rows = lambda1.len() + lambda2.len() + 2 * outside.len();
    let t_col = m;

    let mut lhs = vec![0.0_f64; n_rows * n_vars];
    let mut rhs = vec![0.0_f64; n_rows];
    let mut row = 0;

    for (j, target) in lambda1
        .iter()
        .map(|&j| (j, 1.0))
        .chain(lambda2.iter().map(|&j| (j, -1.0)))
    {
        for c in 0..m {
            lhs[row * n_vars + c] = at.get(j, c);
        }
        rhs[row] = target;
        row += 1;
    }
    let mut slack = m + 1;
    for &j in &outside {
        for c in 0..m {
            lhs[row * n_vars + c] = at.get(j, c);
        }
        lhs[row * n_vars + t_col] = -1.0;
        lhs[row * n_vars + slack] = 1.0;
        row += 1;
        for c in 0..m {
            lhs[row * n_vars + c] = at.get(j, c);
        }
        lhs[row * n_vars + t_col] = 1.0;
        lhs[row * n_vars + slack + 1] = -1.0;
        row += 1;
        slack += 2;
    }
    debug_assert_eq!(row, n_rows);

    let mut objective = vec![0.0; n_vars];
    objective[t_col] = 1.0;
    let mut bounds = vec![Bound::nonnegative(); n_vars];
    for b in bounds.iter_mut().take(m) {
        *b = Bound::free();
    }

    let problem = LpProblem {
        objective,
        eq_lhs: DenseMatrix::new(n_rows, n_vars, lhs)
            .expect("constructed dimensions are consistent"),
        eq_rhs: rhs,
        bounds,
    };

    match solve_lp(&problem) {
        Ok(sol) => match sol.status {
            // A pass must come with a clean optimality certificate.
            LpStatus::Optimal if sol.certificate_residual > 1e-8 => PairMargin {
                lambda1: lambda1.to_vec(),
                lambda2: lambda2.to_vec(),
                margin: None,
                diagnostic: Some(format!(
                    "optimality certificate residual {} above 1e-8",
                    sol.certificate_residual
                )),
            },
            LpStatus::Optimal => PairMargin {
                lambda1: lambda1.to_vec(),
                lambda2: lambda2.to_vec(),
                margin: sol.value,
                diagnostic: None,
            },
            LpStatus::Infeasible => PairMargin {
                lambda1: lambda1.to_vec(),
                lambda2: lambda2.to_vec(),
                margin: None,
                diagnostic: Some("prescribed signs are infeasible".to_string()),
            },
            LpStatus::Unbounded => PairMargin {
                lambda1: lambda1.to_vec(),
                lambda2: lambda2.to_vec(),
                margin: None,
                diagnostic: Some("unexpected unbounded subproblem".to_string()),
            },
        },
        Err(e) => PairMargin {
            lambda1: lambda1.to_vec(),
            lambda2: lambda2.to_vec(),
            margin: None,
            diagnostic: Some(e.to_string()),
        },
    }
}

/// Whether every set of `k` columns is linearly independent, equivalently
/// whether the spark exceeds `k`. Checking size k alone suffices: subsets of
/// independent sets stay independent. More columns than rows can never be
/// independent, so `k > rows` is immediately false.
pub fn all_k_subsets_independent(
    a: &DenseMatrix,
    k: usize,
    budget: usize,
) -> Result<bool, RangePropError> {
    let n = a.cols();
    if k > n {
        return Err(RangePropError::InvalidOrder { k, n });
    }
    if k == 0 {
        return Ok(true);
    }
    if k > a.rows() {
        return Ok(false);
    }
    let required = binomial_count(n, k);
    if required > budget {
        return Err(RangePropError::SubsetBudgetExhausted { required, budget });
    }
    let mut subsets = Vec::with_capacity(required);
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        subsets.push(subset.clone());
        if !advance(&mut subset, n) {
            break;
        }
    }
    let dependent = exec::find_first_map(&subsets, |s| {
        (a.select_columns(s).numerical_rank() < k).then_some(())
    });
    Ok(dependent.is_none())
}

fn advance(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - (k - i) {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial_count(n: usize, k: usize) -> usize {
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
