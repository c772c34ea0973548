//! Dense two-phase primal simplex with Bland's anti-cycling rule, for the
//! small linear programs the range-property certificates generate.
//!
//! Problems are stated as `min c^T x` subject to equality constraints and
//! per-variable interval bounds; they are rewritten to standard form
//! (nonnegative variables, equalities only) before solving. Bland's rule
//! guarantees termination, so the cycle guard is purely defensive.

use crate::linalg::{DenseMatrix, LinalgError};
use thiserror::Error;

/// Pivots smaller than this trigger a numerical-breakdown error.
const PIVOT_FLOOR: f64 = 1e-12;
/// Reduced-cost / entry tolerance.
const TOL: f64 = 1e-9;
/// Phase-1 objective above this is infeasible.
const FEAS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LpError {
    #[error("simplex cycle guard tripped after {0} iterations")]
    CycleDetected(usize),
    #[error("pivot magnitude below {PIVOT_FLOOR}")]
    NumericalBreakdown,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Inclusive variable bounds; use infinities for one-sided or free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub fn free() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn nonnegative() -> Self {
        Self {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }
}

/// `min objective . x` subject to `eq_lhs x = eq_rhs` and `bounds`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub eq_lhs: DenseMatrix,
    pub eq_rhs: Vec<f64>,
    pub bounds: Vec<Bound>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub solution: Option<Vec<f64>>,
    pub value: Option<f64>,
    /// Worst violation among primal feasibility and dual sign conditions at
    /// the reported optimum; meaningful only for `Optimal`.
    pub certificate_residual: f64,
}

enum VarMap {
    Shifted { z: usize, offset: f64 },
    Flipped { z: usize, offset: f64 },
    Split { zp: usize, zn: usize },
}

pub fn solve_lp(p: &LpProblem) -> Result<LpSolution, LpError> {
    let n = p.objective.len();
    assert_eq!(p.eq_lhs.cols(), n, "objective length must match columns");
    assert_eq!(
        p.eq_lhs.rows(),
        p.eq_rhs.len(),
        "rhs length must match rows"
    );
    assert_eq!(p.bounds.len(), n, "one bound per variable");

    // Rewrite to standard form: nonnegative z, equality rows only.
    let m0 = p.eq_lhs.rows();
    let mut maps: Vec<VarMap> = Vec::with_capacity(n);
    let mut n_std = 0usize;
    let mut extra_rows = 0usize;
    for b in &p.bounds {
        if b.upper < b.lower {
            return Ok(infeasible());
        }
        match (b.lower.is_finite(), b.upper.is_finite()) {
            (true, false) => {
                maps.push(VarMap::Shifted {
                    z: n_std,
                    offset: b.lower,
                });
                n_std += 1;
            }
            (false, true) => {
                maps.push(VarMap::Flipped {
                    z: n_std,
                    offset: b.upper,
                });
                n_std += 1;
            }
            (true, true) => {
                maps.push(VarMap::Shifted {
                    z: n_std,
                    offset: b.lower,
                });
                n_std += 1;
                extra_rows += 1;
            }
            (false, false) => {
                maps.push(VarMap::Split {
                    zp: n_std,
                    zn: n_std + 1,
                });
                n_std += 2;
            }
        }
    }
    let n_slack = extra_rows;
    let rows = m0 + extra_rows;
    let cols = n_std + n_slack;

    let mut a = vec![vec![0.0_f64; cols]; rows];
    let mut rhs = vec![0.0_f64; rows];
    let mut cost = vec![0.0_f64; cols];

    rhs[..m0].copy_from_slice(&p.eq_rhs);
    for (j, map) in maps.iter().enumerate() {
        let col: Vec<f64> = (0..m0).map(|r| p.eq_lhs.get(r, j)).collect();
        match *map {
            VarMap::Shifted { z, offset } => {
                for r in 0..m0 {
                    a[r][z] = col[r];
                    rhs[r] -= col[r] * offset;
                }
                cost[z] = p.objective[j];
            }
            VarMap::Flipped { z, offset } => {
                for r in 0..m0 {
                    a[r][z] = -col[r];
                    rhs[r] -= col[r] * offset;
                }
                cost[z] = -p.objective[j];
            }
            VarMap::Split { zp, zn } => {
                for r in 0..m0 {
                    a[r][zp] = col[r];
                    a[r][zn] = -col[r];
                }
                cost[zp] = p.objective[j];
                cost[zn] = -p.objective[j];
            }
        }
    }
    // Rows bounding doubly-finite variables: z + slack = upper - lower.
    let mut next_row = m0;
    let mut next_slack = n_std;
    for (j, b) in p.bounds.iter().enumerate() {
        if b.lower.is_finite() && b.upper.is_finite() {
            let VarMap::Shifted { z, .. } = maps[j] else {
                unreachable!()
            };
            a[next_row][z] = 1.0;
            a[next_row][next_slack] = 1.0;
            rhs[next_row] = b.upper - b.lower;
            next_row += 1;
            next_slack += 1;
        }
    }

    let (status, z_opt, residual) = simplex_two_phase(a, rhs, cost)?;
    match status {
        LpStatus::Optimal => {
            let z = z_opt.expect("optimal status carries a point");
            let mut x = vec![0.0; n];
            for (j, map) in maps.iter().enumerate() {
                x[j] = match *map {
                    VarMap::Shifted { z: k, offset } => offset + z[k],
                    VarMap::Flipped { z: k, offset } => offset - z[k],
                    VarMap::Split { zp, zn } => z[zp] - z[zn],
                };
            }
            let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            Ok(LpSolution {
                status,
                solution: Some(x),
                value: Some(value),
                certificate_residual: residual,
            })
        }
        _ => Ok(LpSolution {
            status,
            solution: None,
            value: None,
            certificate_residual: residual,
        }),
    }
}

fn infeasible() -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        solution: None,
        value: None,
        certificate_residual: 0.0,
    }
}

type PhaseOutcome = (LpStatus, Option<Vec<f64>>, f64);

/// Two-phase simplex on `min cost . z`, `a z = rhs`, `z >= 0`.
fn simplex_two_phase(
    mut a: Vec<Vec<f64>>,
    mut rhs: Vec<f64>,
    cost: Vec<f64>,
) -> Result<PhaseOutcome, LpError> {
    let n_real = cost.len();
    let m = a.len();

    // Make the right-hand side nonnegative so artificials start feasible.
    for r in 0..m {
        if rhs[r] < 0.0 {
            rhs[r] = -rhs[r];
            for v in a[r].iter_mut() {
                *v = -*v;
            }
        }
    }
    // Append artificial columns.
    for (r, row) in a.iter_mut().enumerate() {
        for k in 0..m {
            row.push(if k == r { 1.0 } else { 0.0 });
        }
    }
    let mut basis: Vec<usize> = (n_real..n_real + m).collect();
    let phase1_cost: Vec<f64> = (0..n_real + m)
        .map(|j| if j >= n_real { 1.0 } else { 0.0 })
        .collect();

    let p1 = run_simplex(&mut a, &mut rhs, &mut basis, &phase1_cost, n_real + m)?;
    if p1 == LpStatus::Unbounded {
        // Phase 1 objective is bounded below by zero; cannot happen.
        return Err(LpError::CycleDetected(0));
    }
    let p1_value: f64 = basis
        .iter()
        .zip(&rhs)
        .map(|(&b, &v)| if b >= n_real { v } else { 0.0 })
        .sum();
    if p1_value > FEAS_TOL {
        return Ok((LpStatus::Infeasible, None, 0.0));
    }

    // Remove artificials: pivot basic ones out, drop rows that are redundant.
    let mut r = 0;
    while r < basis.len() {
        if basis[r] >= n_real {
            let pivot_col = (0..n_real).find(|&j| a[r][j].abs() > TOL);
            match pivot_col {
                Some(j) => pivot(&mut a, &mut rhs, &mut basis, r, j)?,
                None => {
                    a.remove(r);
                    rhs.remove(r);
                    basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    for row in a.iter_mut() {
        row.truncate(n_real);
    }

    let p2 = run_simplex(&mut a, &mut rhs, &mut basis, &cost, n_real)?;
    if p2 == LpStatus::Unbounded {
        return Ok((LpStatus::Unbounded, None, 0.0));
    }

    let mut z = vec![0.0; n_real];
    for (r, &b) in basis.iter().enumerate() {
        z[b] = rhs[r];
    }
    let residual = optimality_residual(&a, &rhs, &basis, &cost, n_real);
    Ok((LpStatus::Optimal, Some(z), residual))
}

/// Bland-rule iterations on a tableau kept in canonical form.
fn run_simplex(
    a: &mut [Vec<f64>],
    rhs: &mut [f64],
    basis: &mut [usize],
    cost: &[f64],
    n_cols: usize,
) -> Result<LpStatus, LpError> {
    let m = a.len();
    let cap = 10_000 + 100 * (m + n_cols);
    for _ in 0..cap {
        // Reduced costs: c_j - c_B . column_j.
        let entering = (0..n_cols).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let rc = cost[j]
                - basis
                    .iter()
                    .enumerate()
                    .map(|(r, &b)| cost[b] * a[r][j])
                    .sum::<f64>();
            rc < -TOL
        });
        let Some(j) = entering else {
            return Ok(LpStatus::Optimal);
        };

        // Ratio test; ties broken by smallest basis variable (Bland).
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            if a[r][j] > TOL {
                let ratio = rhs[r] / a[r][j];
                let better = match leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < lratio - 1e-12 || (ratio < lratio + 1e-12 && basis[r] < basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Ok(LpStatus::Unbounded);
        };
        pivot(a, rhs, basis, r, j)?;
    }
    Err(LpError::CycleDetected(cap))
}

fn pivot(
    a: &mut [Vec<f64>],
    rhs: &mut [f64],
    basis: &mut [usize],
    r: usize,
    j: usize,
) -> Result<(), LpError> {
    let piv = a[r][j];
    if piv.abs() < PIVOT_FLOOR {
        return Err(LpError::NumericalBreakdown);
    }
    let inv = 1.0 / piv;
    for v in a[r].iter_mut() {
        *v *= inv;
    }
    rhs[r] *= inv;
    let pivot_row = a[r].clone();
    let pivot_rhs = rhs[r];
    for i in 0..a.len() {
        if i == r {
            continue;
        }
        let factor = a[i][j];
        if factor == 0.0 {
            continue;
        }
        for (v, pv) in a[i].iter_mut().zip(&pivot_row) {
            *v -= factor * pv;
        }
        rhs[i] -= factor * pivot_rhs;
    }
    basis[r] = j;
    Ok(())
}

fn optimality_residual(
    a: &[Vec<f64>],
    rhs: &[f64],
    basis: &[usize],
    cost: &[f64],
    n_cols: usize,
) -> f64 {
    let mut worst = 0.0_f64;
    for &v in rhs.iter() {
        worst = worst.max((-v).max(0.0)); // primal nonnegativity
    }
    for j in 0..n_cols {
        let rc = cost[j]
            - basis
                .iter()
                .enumerate()
                .map(|(r, &b)| cost[b] * a[r][j])
                .sum::<f64>();
        worst = worst.max((-rc).max(0.0)); // dual sign condition
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn single_variable_lower_bound() {
        // min x s.t. x >= 1 (stated as x - s = 1 via bounds on x only).
        let p = LpProblem {
            objective: vec![1.0],
            eq_lhs: matrix(&[&[0.0]]),
            eq_rhs: vec![0.0],
            bounds: vec![Bound {
                lower: 1.0,
                upper: f64::INFINITY,
            }],
        };
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        // x >= 1 and x <= 0.
        let p = LpProblem {
            objective: vec![1.0],
            eq_lhs: matrix(&[&[0.0]]),
            eq_rhs: vec![0.0],
            bounds: vec![Bound {
                lower: 1.0,
                upper: 0.0,
            }],
        };
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn infeasible_equalities_detected() {
        // x1 + x2 = 1 and x1 + x2 = 2 with x >= 0.
        let p = LpProblem {
            objective: vec![1.0, 1.0],
            eq_lhs: matrix(&[&[1.0, 1.0], &[1.0, 1.0]]),
            eq_rhs: vec![1.0, 2.0],
            bounds: vec![Bound::nonnegative(); 2],
        };
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction_detected() {
        // min -x s.t. x - y = 0, x, y >= 0: can grow forever.
        let p = LpProblem {
            objective: vec![-1.0, 0.0],
            eq_lhs: matrix(&[&[1.0, -1.0]]),
            eq_rhs: vec![0.0],
            bounds: vec![Bound::nonnegative(); 2],
        };
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn transportation_style_instance() {
        // min x1 + 2 x2 + 3 x3 s.t. x1 + x2 + x3 = 10, x2 + x3 = 4, x >= 0.
        // Optimum: x1 = 6, x2 = 4, x3 = 0 -> 14.
        let p = LpProblem {
            objective: vec![1.0, 2.0, 3.0],
            eq_lhs: matrix(&[&[1.0, 1.0, 1.0], &[0.0, 1.0, 1.0]]),
            eq_rhs: vec![10.0, 4.0],
            bounds: vec![Bound::nonnegative(); 3],
        };
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value.unwrap() - 14.0).abs() < 1e-9);
        assert!(s.certificate_residual <= 1e-8);
    }

    #[test]
    fn free_variables_and_minimax() {
        // min t s.t. y = 1 with |y2| <= t encoded by y2 - t <= 0 rows:
        // chebyshev-style: min t, y1 = 1, y1 + y2 + t >= ... keep simple:
        // min t s.t. y + t = 1, y - t = -1 has solution y = 0, t = 1.
        let p = LpProblem {
            objective: vec![0.0, 1.0],
            eq_lhs: matrix(&[&[1.0, 1.0], &[1.0, -1.0]]),
            eq_rhs: vec![1.0, -1.0],
            bounds: vec![Bound::free(), Bound::nonnegative()],
        };
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        let x = s.solution.unwrap();
        assert!((x[0] - 0.0).abs() < 1e-9);
        assert!((x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn doubly_bounded_variables() {
        // min -x1 - x2, 0 <= x1 <= 2, 0 <= x2 <= 3, x1 + x2 = 4.
        let p = LpProblem {
            objective: vec![-1.0, -1.0],
            eq_lhs: matrix(&[&[1.0, 1.0]]),
            eq_rhs: vec![4.0],
            bounds: vec![
                Bound {
                    lower: 0.0,
                    upper: 2.0,
                },
                Bound {
                    lower: 0.0,
                    upper: 3.0,
                },
            ],
        };
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value.unwrap() + 4.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_instances_terminate() {
        // Redundant constraints force degenerate pivots; Bland must exit.
        let p = LpProblem {
            objective: vec![1.0, 1.0, 1.0],
            eq_lhs: matrix(&[&[1.0, 1.0, 0.0], &[2.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]),
            eq_rhs: vec![1.0, 2.0, 0.0],
            bounds: vec![Bound::nonnegative(); 3],
        };
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value.unwrap() - 1.0).abs() < 1e-9);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Brute-force vertex enumeration for standard-form problems.
        fn vertex_optimum(p: &LpProblem) -> Option<f64> {
            let m = p.eq_lhs.rows();
            let n = p.objective.len();
            let mut best: Option<f64> = None;
            let mut subset: Vec<usize> = (0..m).collect();
            loop {
                // Solve the square system on this basis.
                if let Some(xb) = solve_square(&p.eq_lhs, &subset, &p.eq_rhs) {
                    if xb.iter().all(|&v| v >= -1e-9) {
                        let mut value = 0.0;
                        for (pos, &j) in subset.iter().enumerate() {
                            value += p.objective[j] * xb[pos];
                        }
                        best = Some(best.map_or(value, |b: f64| b.min(value)));
                    }
                }
                // Next lexicographic m-subset of 0..n.
                let mut i = m;
                loop {
                    if i == 0 {
                        return best;
                    }
                    i -= 1;
                    if subset[i] < n - (m - i) {
                        subset[i] += 1;
                        for j in i + 1..m {
                            subset[j] = subset[j - 1] + 1;
                        }
                        break;
                    }
                }
            }
        }

        fn solve_square(a: &DenseMatrix, cols: &[usize], b: &[f64]) -> Option<Vec<f64>> {
            let m = cols.len();
            let mut mat: Vec<Vec<f64>> = (0..m)
                .map(|r| cols.iter().map(|&c| a.get(r, c)).collect())
                .collect();
            let mut rhs = b.to_vec();
            for col in 0..m {
                let piv_row = (col..m)
                    .max_by(|&i, &j| mat[i][col].abs().partial_cmp(&mat[j][col].abs()).unwrap())?;
                if mat[piv_row][col].abs() < 1e-10 {
                    return None;
                }
                mat.swap(col, piv_row);
                rhs.swap(col, piv_row);
                let inv = 1.0 / mat[col][col];
                for r in 0..m {
                    if r == col {
                        continue;
                    }
                    let f = mat[r][col] * inv;
                    for c in col..m {
                        let v = mat[col][c];
                        mat[r][c] -= f * v;
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
            Some((0..m).map(|r| rhs[r] / mat[r][r]).collect())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(40))]

            #[test]
            fn matches_vertex_enumeration(
                entries in proptest::collection::vec(-2.0_f64..2.0, 15),
                point in proptest::collection::vec(0.0_f64..2.0, 5),
                costs in proptest::collection::vec(0.0_f64..2.0, 5),
            ) {
                // b = A x0 with x0 >= 0 keeps the problem feasible; c >= 0
                // with x >= 0 keeps it bounded.
                let a = DenseMatrix::new(3, 5, entries).unwrap();
                let b = a.mat_vec(&point).unwrap();
                let p = LpProblem {
                    objective: costs,
                    eq_lhs: a,
                    eq_rhs: b,
                    bounds: vec![Bound::nonnegative(); 5],
                };
                let s = solve_lp(&p).unwrap();
                prop_assert_eq!(s.status, LpStatus::Optimal);
                let oracle = vertex_optimum(&p).expect("feasible by construction");
                prop_assert!((s.value.unwrap() - oracle).abs() < 1e-8,
                    "simplex {} vs vertices {}", s.value.unwrap(), oracle);
            }
        }
    }
}
