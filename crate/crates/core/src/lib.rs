//! Uniqueness certificates for sparsest solutions of underdetermined linear
//! systems `Ax = b`.
//!
//! The library computes every certificate that bounds or determines the spark
//! of a dense real matrix and turns those bounds into per-criterion
//! uniqueness verdicts for a candidate solution:
//!
//! - [`coherence`]: mutual coherence, sub-mutual coherence, coherence rank and
//!   sub-coherence rank from the normalized Gram matrix, with an explicit tie
//!   tolerance.
//! - [`babel`]: the Babel and sub-Babel profiles and their spark thresholds.
//! - [`spark`]: exact spark by combinatorial search plus every
//!   coherence-family lower bound, aggregated into a best certified bound.
//! - [`scaling`]: certificates recomputed under nonsingular scalings `WA` —
//!   explicit `W`, a diagonal built from the right-hand side, an SVD-derived
//!   whitening, and a seeded heuristic search.
//! - [`overlap`]: the support overlap of the solution set and the
//!   overlap-strengthened spark criterion.
//! - [`rangeprop`]: range-property certificates via small dense linear
//!   programs, and k-column independence checks.
//! - [`engine`]: the verdict aggregator over all applicable criteria.
//!
//! Everything operates on immutable values and is deterministic for a fixed
//! seed. With the default `parallel` feature the combinatorial inner loops
//! (subset rank tests, per-pair LPs, per-column rank tests, scaling trials)
//! run on rayon; disabling the feature selects sequential fallbacks that
//! produce bit-identical results.

pub mod babel;
pub mod coherence;
pub mod engine;
mod exec;
pub mod linalg;
pub mod overlap;
pub mod rangeprop;
pub mod scaling;
pub mod spark;
#[cfg(test)]
pub(crate) mod test_fixtures;

pub use babel::{babel_profile, sub_babel_strict_gain_holds, BabelError, BabelProfile};
pub use coherence::{
    class_membership, coherence_summary, ClassMembership, CoherenceError, CoherenceSummary,
    DEFAULT_TIE_TOLERANCE,
};
pub use engine::{
    best_recoverable_sparsity, count_sparsity, evaluate, Conclusion, Criterion, EngineError,
    EvaluateOptions, SystemInstance, UniquenessVerdict,
};
pub use linalg::{DenseMatrix, GramMatrix, LinalgError, SvdFactors};
pub use overlap::{overlap_verdict, support_overlap, OverlapError, SupportOverlap};
pub use rangeprop::{
    all_k_subsets_independent, range_property_ii, PairMargin, RangePropError,
    RangePropertyCertificate,
};
pub use scaling::{
    apply_scaling, matrix_form_ingest, phi_diagonal_from_rhs, scaled_certificates, search_scaling,
    svd_scaling, ScaledCertificates, ScalingError, ScalingKind, ScalingSpec,
};
pub use spark::{
    brauer_inclusion_check, coherence_rank_bound, coherence_rank_estimates, exact_spark,
    spark_report, BoundError, SparkError, SparkReport, SparkSearch, SparkValue,
    DEFAULT_SPARK_BUDGET,
};
