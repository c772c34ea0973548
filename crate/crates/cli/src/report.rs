//! Analysis report: the machine-readable JSON schema and the human table
//! rendering.
//!
//! The JSON schema is versioned and uses only structs and vectors, so field
//! order is fixed; floats print in shortest round-trip form. Re-parsing and
//! re-emitting a report is byte-identical. Values that can be infinite
//! (exact spark, best certified bound) are encoded structurally, never as a
//! non-finite float.

use serde::{Deserialize, Serialize};
use sparkcert::{
    BabelProfile, CoherenceSummary, Criterion, PairMargin, RangePropertyCertificate,
    ScaledCertificates, ScalingKind, SparkReport, SparkValue, SupportOverlap, UniquenessVerdict,
};
use std::fmt::Write as _;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub input: InputInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherence: Option<CoherenceOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub babel: Option<BabelOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spark: Option<SparkOut>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub scalings: Vec<ScalingOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap: Option<OverlapOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_property: Option<RangePropertyOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictOut>,
    pub timings: Vec<StageTiming>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct InputInfo {
    pub matrix: String,
    pub rows: usize,
    pub cols: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate: Option<String>,
    pub tie_tolerance: f64,
    pub budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct CoherenceOut {
    pub mu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu2: Option<f64>,
    pub alpha: usize,
    pub beta: usize,
    pub row_tie_counts: Vec<usize>,
    pub tie_tolerance: f64,
    pub orthogonal: bool,
    pub membership: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct BabelOut {
    pub babel: Vec<f64>,
    pub sub_babel: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_hat: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_star: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub enum SparkValueOut {
    Finite(usize),
    Infinite,
}

impl From<SparkValue> for SparkValueOut {
    fn from(v: SparkValue) -> Self {
        match v {
            SparkValue::Finite(p) => SparkValueOut::Finite(p),
            SparkValue::Infinite => SparkValueOut::Infinite,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct SparkOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<SparkValueOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_floor: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classic_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherence_rank_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_estimate_first: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_estimate_second: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_one_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub babel_bound: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sub_babel_bound: Option<usize>,
    /// Absent exactly when the search proved full column rank (infinite).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_certified: Option<f64>,
}

impl SparkOut {
    pub fn from_report(r: &SparkReport) -> Self {
        Self {
            exact: r.exact.map(SparkValueOut::from),
            witness: r.witness.clone(),
            search_floor: r.search_floor,
            classic_bound: r.classic_bound,
            coherence_rank_bound: r.coherence_rank_bound,
            rank_estimate_first: r.rank_estimate_first,
            rank_estimate_second: r.rank_estimate_second,
            rank_one_bound: r.rank_one_bound,
            babel_bound: r.babel_bound,
            sub_babel_bound: r.sub_babel_bound,
            best_certified: r.best_certified.is_finite().then_some(r.best_certified),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct ScalingOut {
    pub kind: String,
    pub condition_number: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherence: Option<CoherenceOut>,
    pub spark: SparkOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_classic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_best_certified: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct OverlapOut {
    pub indices: Vec<usize>,
    pub cardinality: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct MarginOut {
    pub lambda1: Vec<usize>,
    pub lambda2: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct RangePropertyOut {
    pub order: usize,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_pair: Option<(Vec<usize>, Vec<usize>)>,
    pub margins: Vec<MarginOut>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct CriterionOut {
    pub name: String,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub passed: bool,
    pub provenance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct VerdictOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<usize>,
    pub conclusion: String,
    pub criteria: Vec<CriterionOut>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct StageTiming {
    pub stage: String,
    pub millis: u64,
}

pub fn coherence_out(s: &CoherenceSummary) -> CoherenceOut {
    let membership = match sparkcert::class_membership(s) {
        sparkcert::ClassMembership::M1 { also_m2: true } => "rank-condition (both)".to_string(),
        sparkcert::ClassMembership::M1 { also_m2: false } => "rank-condition".to_string(),
        sparkcert::ClassMembership::M2 => "rank-gap-condition".to_string(),
        sparkcert::ClassMembership::NotInM => "none".to_string(),
    };
    CoherenceOut {
        mu: s.mu,
        mu2: s.mu2,
        alpha: s.alpha,
        beta: s.beta,
        row_tie_counts: s.row_tie_counts.clone(),
        tie_tolerance: s.tie_tolerance,
        orthogonal: s.orthogonal,
        membership,
    }
}

pub fn babel_out(p: &BabelProfile) -> BabelOut {
    BabelOut {
        babel: p.babel.clone(),
        sub_babel: p.sub_babel.clone(),
        q_hat: p.q_hat,
        q_star: p.q_star,
    }
}

pub fn kind_name(kind: ScalingKind) -> &'static str {
    match kind {
        ScalingKind::Explicit => "explicit",
        ScalingKind::DiagonalFromRhs => "rhs-diagonal",
        ScalingKind::SvdWhitening => "svd-whitening",
        ScalingKind::SearchHeuristic => "search",
    }
}

pub fn scaling_out(cert: &ScaledCertificates) -> ScalingOut {
    let delta_best = cert.comparison.best_certified;
    ScalingOut {
        kind: kind_name(cert.spec.kind).to_string(),
        condition_number: cert.spec.condition_number,
        coherence: cert.summary.as_ref().map(coherence_out),
        spark: SparkOut::from_report(&cert.report),
        delta_classic: cert.comparison.classic,
        delta_best_certified: delta_best.is_finite().then_some(delta_best),
    }
}

pub fn overlap_out(o: &SupportOverlap) -> OverlapOut {
    OverlapOut {
        indices: o.indices.clone(),
        cardinality: o.cardinality(),
    }
}

pub fn range_property_out(c: &RangePropertyCertificate) -> RangePropertyOut {
    let margin_out = |m: &PairMargin| MarginOut {
        lambda1: m.lambda1.clone(),
        lambda2: m.lambda2.clone(),
        margin: m.margin,
        diagnostic: m.diagnostic.clone(),
    };
    RangePropertyOut {
        order: c.order,
        holds: c.holds,
        failing_pair: c.failing_pair.clone(),
        margins: c.margins.iter().map(margin_out).collect(),
    }
}

pub fn verdict_out(v: &UniquenessVerdict) -> VerdictOut {
    let criterion_out = |c: &Criterion| CriterionOut {
        name: c.name.clone(),
        applicable: c.applicable,
        threshold: c.threshold,
        passed: c.passed,
        provenance: c.provenance.clone(),
        note: c.note.clone(),
    };
    VerdictOut {
        sparsity: v.sparsity,
        conclusion: match v.conclusion {
            sparkcert::Conclusion::UniqueSparsest => "unique-sparsest".to_string(),
            sparkcert::Conclusion::Inconclusive => "inconclusive".to_string(),
        },
        criteria: v.criteria.iter().map(criterion_out).collect(),
    }
}

pub fn to_json(report: &AnalysisReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialization cannot fail")
}

fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

fn opt4(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), fmt4)
}

/// Render the human table: 4-decimal fixed floats, one section per stage.
pub fn render_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "matrix {} ({}x{})",
        report.input.matrix, report.input.rows, report.input.cols
    );
    if let Some(c) = &report.coherence {
        let _ = writeln!(out, "\ncoherence");
        let _ = writeln!(out, "  mu        {}", fmt4(c.mu));
        let _ = writeln!(out, "  mu2       {}", opt4(c.mu2));
        let _ = writeln!(out, "  alpha     {}", c.alpha);
        let _ = writeln!(out, "  beta      {}", c.beta);
        let _ = writeln!(out, "  class     {}", c.membership);
        if c.orthogonal {
            let _ = writeln!(out, "  note      orthogonal dictionary; bounds skipped");
        }
    }
    if let Some(b) = &report.babel {
        let _ = writeln!(out, "\nbabel");
        let render = |v: &[f64]| v.iter().map(|x| fmt4(*x)).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "  profile     {}", render(&b.babel));
        let _ = writeln!(out, "  sub-profile {}", render(&b.sub_babel));
        let _ = writeln!(
            out,
            "  q-hat {}   q-star {}",
            b.q_hat.map_or("-".to_string(), |q| q.to_string()),
            b.q_star.map_or("-".to_string(), |q| q.to_string())
        );
    }
    if let Some(s) = &report.spark {
        let _ = writeln!(out, "\nspark");
        match &s.exact {
            Some(SparkValueOut::Finite(p)) => {
                let _ = writeln!(out, "  exact          {p}");
            }
            Some(SparkValueOut::Infinite) => {
                let _ = writeln!(out, "  exact          infinite (full column rank)");
            }
            None => {}
        }
        if let Some(w) = &s.witness {
            let cols: Vec<String> = w.iter().map(|i| (i + 1).to_string()).collect();
            let _ = writeln!(out, "  witness cols   {{{}}}", cols.join(", "));
        }
        if let Some(floor) = s.search_floor {
            let _ = writeln!(out, "  search floor   spark > {floor} (budget hit)");
        }
        let _ = writeln!(
            out,
            "  classic        {}  (half {})",
            opt4(s.classic_bound),
            opt4(s.classic_bound.map(|b| b / 2.0))
        );
        let _ = writeln!(
            out,
            "  coh-rank       {}  (half {})",
            opt4(s.coherence_rank_bound),
            opt4(s.coherence_rank_bound.map(|b| b / 2.0))
        );
        let _ = writeln!(
            out,
            "  coh-rank-1     {}  (half {})",
            opt4(s.rank_one_bound),
            opt4(s.rank_one_bound.map(|b| b / 2.0))
        );
        let _ = writeln!(
            out,
            "  babel q-hat    {}   sub-babel q-star {}",
            s.babel_bound.map_or("-".to_string(), |q| q.to_string()),
            s.sub_babel_bound.map_or("-".to_string(), |q| q.to_string())
        );
        let _ = writeln!(out, "  best certified {}", opt4(s.best_certified));
    }
    for sc in &report.scalings {
        let _ = writeln!(
            out,
            "\nscaling [{}]  cond {}",
            sc.kind,
            fmt4(sc.condition_number)
        );
        if let Some(c) = &sc.coherence {
            let _ = writeln!(
                out,
                "  mu {}  mu2 {}  alpha {}  beta {}",
                fmt4(c.mu),
                opt4(c.mu2),
                c.alpha,
                c.beta
            );
        }
        let _ = writeln!(
            out,
            "  classic {} (half {})  coh-rank-1 {} (half {})",
            opt4(sc.spark.classic_bound),
            opt4(sc.spark.classic_bound.map(|b| b / 2.0)),
            opt4(sc.spark.rank_one_bound),
            opt4(sc.spark.rank_one_bound.map(|b| b / 2.0)),
        );
        if let Some(d) = sc.delta_classic {
            let _ = writeln!(out, "  delta vs unscaled classic {}", fmt4(d));
        }
    }
    if let Some(o) = &report.overlap {
        let _ = writeln!(out, "\nsupport overlap");
        let cols: Vec<String> = o.indices.iter().map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(out, "  columns     {{{}}}", cols.join(", "));
        let _ = writeln!(out, "  cardinality {}", o.cardinality);
    }
    if let Some(r) = &report.range_property {
        let _ = writeln!(out, "\nrange property (order {})", r.order);
        let _ = writeln!(out, "  holds  {}", r.holds);
        if let Some((l1, l2)) = &r.failing_pair {
            let _ = writeln!(out, "  failing pair  {:?} / {:?}", l1, l2);
        }
        let worst = r
            .margins
            .iter()
            .filter_map(|m| m.margin)
            .fold(f64::NEG_INFINITY, f64::max);
        if worst.is_finite() {
            let _ = writeln!(out, "  worst margin  {}", fmt4(worst));
        }
    }
    if let Some(v) = &report.verdict {
        let _ = writeln!(out, "\nverdict");
        if let Some(s) = v.sparsity {
            let _ = writeln!(out, "  candidate sparsity {s}");
        }
        for c in &v.criteria {
            let status = if c.passed {
                "pass"
            } else if c.applicable {
                "fail"
            } else {
                "n/a "
            };
            let _ = writeln!(
                out,
                "  {status}  {:<28} threshold {}",
                c.name,
                opt4(c.threshold)
            );
        }
        let _ = writeln!(out, "  conclusion: {}", v.conclusion);
    }
    let _ = writeln!(out, "\ntimings");
    for t in &report.timings {
        let _ = writeln!(out, "  {:<14} {} ms", t.stage, t.millis);
    }
    out
}
