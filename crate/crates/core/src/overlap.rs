//! Support overlap of the solution set of `Ax = b` and the
//! overlap-strengthened spark criterion.
//!
//! A column index belongs to the overlap exactly when deleting it makes the
//! system infeasible: solutions with that coordinate zero exist iff the
//! right-hand side lies in the span of the remaining columns. Membership is
//! decided by rank comparisons, which are exact at desk scale and free of
//! solver tolerances.

use crate::exec;
use crate::linalg::{DenseMatrix, LinalgError};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OverlapError {
    #[error("system is infeasible; the support overlap is undefined")]
    Infeasible,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Indices common to the support of every solution of `Ax = b`. May be
/// empty; `b = 0` always yields the empty overlap since the zero solution
/// has empty support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportOverlap {
    pub indices: Vec<usize>,
    pub feasible: bool,
}

impl SupportOverlap {
    pub fn cardinality(&self) -> usize {
        self.indices.len()
    }
}

/// Compute the support overlap. Feasibility is checked first via
/// `rank([A | b]) = rank(A)`; per-column tests are independent and run in
/// parallel.
pub fn support_overlap(a: &DenseMatrix, b: &[f64]) -> Result<SupportOverlap, OverlapError> {
    let augmented = a.augment_column(b)?;
    if augmented.numerical_rank() > a.numerical_rank() {
        return Err(OverlapError::Infeasible);
    }
    let columns: Vec<usize> = (0..a.cols()).collect();
    let verdicts = exec::map_collect(&columns, |&j| {
        let reduced = a.drop_column(j);
        match reduced.augment_column(b) {
            Ok(aug) => aug.numerical_rank() == reduced.numerical_rank() + 1,
            Err(_) => false,
        }
    });
    let indices = columns.into_iter().filter(|&j| verdicts[j]).collect();
    Ok(SupportOverlap {
        indices,
        feasible: true,
    })
}

/// The overlap-strengthened uniqueness criterion: a solution with the given
/// sparsity is the unique sparsest one when
/// `sparsity < (|overlap| + spark) / 2` (strict). `spark_value` may be the
/// exact spark or any certified lower bound, which keeps the test
/// conservative. The caller is responsible for having verified that the
/// candidate actually solves the system.
pub fn overlap_verdict(sparsity: usize, spark_value: f64, overlap: &SupportOverlap) -> bool {
    (sparsity as f64) < (overlap.cardinality() as f64 + spark_value) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::{dependent_3x5, dependent_rhs, gaussian_matrix};

    #[test]
    fn dependent_fixture_overlap_contains_forced_column() {
        let overlap = support_overlap(&dependent_3x5(), &dependent_rhs()).unwrap();
        assert_eq!(overlap.indices, vec![2]);
        assert!(overlap.feasible);
    }

    #[test]
    fn identity_with_unit_rhs_has_singleton_overlap() {
        let a = DenseMatrix::identity(3);
        let overlap = support_overlap(&a, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(overlap.indices, vec![0]);
    }

    #[test]
    fn zero_rhs_has_empty_overlap() {
        let overlap = support_overlap(&dependent_3x5(), &[0.0, 0.0, 0.0]).unwrap();
        assert!(overlap.indices.is_empty());
    }

    #[test]
    fn infeasible_system_is_an_error() {
        let a = DenseMatrix::new(3, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            support_overlap(&a, &[0.0, 0.0, 1.0]).unwrap_err(),
            OverlapError::Infeasible
        );
    }

    #[test]
    fn verdict_thresholds() {
        let overlap = SupportOverlap {
            indices: vec![2],
            feasible: true,
        };
        // 1 < (1 + 2) / 2 = 1.5
        assert!(overlap_verdict(1, 2.0, &overlap));
        // Strictness: 1 < (0 + 2) / 2 = 1 fails.
        let empty = SupportOverlap {
            indices: vec![],
            feasible: true,
        };
        assert!(!overlap_verdict(1, 2.0, &empty));
        // Empty overlap reduces to the bare spark criterion.
        assert!(overlap_verdict(0, 2.0, &empty));
    }

    #[test]
    fn overlap_members_are_nonzero_in_sampled_solutions() {
        // Falsification of the rank characterization: for every overlap
        // index, the least-squares particular solution plus random
        // null-space perturbations must keep that coordinate nonzero.
        use rand::SeedableRng;
        let a = dependent_3x5();
        let b = dependent_rhs();
        let overlap = support_overlap(&a, &b).unwrap();
        let particular = a.least_squares(&b).unwrap();
        let basis = a.null_space().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let mut y = particular.clone();
            for v in &basis {
                let c = crate::scaling::standard_normal(&mut rng);
                for (yi, vi) in y.iter_mut().zip(v) {
                    *yi += c * vi;
                }
            }
            let norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
            let residual = a
                .mat_vec(&y)
                .unwrap()
                .iter()
                .zip(&b)
                .map(|(av, bv)| (av - bv).abs())
                .fold(0.0_f64, f64::max);
            assert!(residual <= 1e-9 * (1.0 + norm));
            for &i in &overlap.indices {
                assert!(
                    y[i].abs() > 1e-8 * norm,
                    "overlap coordinate {i} vanished in a sampled solution"
                );
            }
        }
    }

    #[test]
    fn random_feasible_systems_have_consistent_overlap() {
        // For random 3x6 systems with a planted solution, deleting an
        // overlap column must make the system infeasible.
        for seed in 0..20u64 {
            let a = gaussian_matrix(3, 6, seed);
            let x0: Vec<f64> = (0..6).map(|i| if i == 1 { 1.5 } else { 0.0 }).collect();
            let b = a.mat_vec(&x0).unwrap();
            let overlap = support_overlap(&a, &b).unwrap();
            for &i in &overlap.indices {
                let reduced = a.drop_column(i);
                let aug = reduced.augment_column(&b).unwrap();
                assert_eq!(aug.numerical_rank(), reduced.numerical_rank() + 1);
            }
        }
    }
}
