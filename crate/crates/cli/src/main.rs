//! Command-line analyzer for sparsest-solution uniqueness certificates.

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparkcert::{
    babel_profile, coherence_summary, evaluate, phi_diagonal_from_rhs, range_property_ii,
    scaled_certificates, search_scaling, spark_report, support_overlap, svd_scaling, Conclusion,
    DenseMatrix, EvaluateOptions, GramMatrix, ScalingSpec, SystemInstance, DEFAULT_SPARK_BUDGET,
};
use sparkcert_cli::io::{parse_matrix, parse_vector, MatrixFormat};
use sparkcert_cli::report::{
    self, AnalysisReport, InputInfo, SparkOut, StageTiming, SCHEMA_VERSION,
};
use std::path::PathBuf;
use std::time::Instant;

const DEFAULT_PAIR_BUDGET: usize = 200_000;

#[derive(Parser)]
#[command(
    name = "sparkcert",
    about = "Uniqueness certificates for sparsest solutions of underdetermined linear systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// System matrix file
    #[arg(long, value_name = "PATH")]
    matrix: PathBuf,

    /// Right-hand side vector file
    #[arg(long, value_name = "PATH")]
    rhs: Option<PathBuf>,

    /// Input format; defaults to the file extension, then CSV
    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    /// Tie tolerance for the "equal to mu" classification
    #[arg(long = "tie-tol", value_name = "REAL", default_value_t = 1e-9)]
    tie_tol: f64,

    /// Enumeration budget (rank tests for spark, pairs for rangeprop)
    #[arg(long, value_name = "N")]
    budget: Option<usize>,

    /// Seed for the scaling search
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,

    /// Known lower bound on the support-overlap size
    #[arg(long = "gamma-star", value_name = "N")]
    gamma_star: Option<usize>,

    /// Emit the machine-readable JSON report on stdout
    #[arg(long)]
    json: bool,

    /// Run the exact combinatorial spark search (default)
    #[arg(long, overrides_with = "no_exact")]
    exact: bool,

    /// Skip the exact spark search
    #[arg(long = "no-exact")]
    no_exact: bool,
}

impl CommonArgs {
    fn want_exact(&self) -> bool {
        !self.no_exact
    }

    fn spark_budget(&self) -> usize {
        self.budget.unwrap_or(DEFAULT_SPARK_BUDGET)
    }

    fn pair_budget(&self) -> usize {
        self.budget.unwrap_or(DEFAULT_PAIR_BUDGET)
    }

    fn format(&self) -> Option<MatrixFormat> {
        self.format.map(|f| match f {
            FormatArg::Csv => MatrixFormat::Csv,
            FormatArg::Json => MatrixFormat::Json,
        })
    }
}

#[derive(Args, Default)]
struct ScalingArgs {
    /// Explicit scaling matrix file (repeatable)
    #[arg(long = "w", value_name = "PATH")]
    w: Vec<PathBuf>,

    /// Add the diagonal scaling built from the right-hand side
    #[arg(long = "rhs-diagonal")]
    rhs_diagonal: bool,

    /// Add the SVD whitening scaling
    #[arg(long)]
    svd: bool,

    /// Add the best scaling found by a randomized search with this many trials
    #[arg(long, value_name = "TRIALS")]
    search: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis: coherence, Babel, spark, scalings, overlap, verdict
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scalings: ScalingArgs,
        /// Candidate solution file
        #[arg(long = "x", value_name = "PATH")]
        x: Option<PathBuf>,
        /// Also certify the range property of this order
        #[arg(long = "k", value_name = "K")]
        k: Option<usize>,
    },
    /// Exact spark and every lower bound
    Spark {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Coherence and Babel thresholds only (no exact search)
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Recompute certificates under scalings
    Scale {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scalings: ScalingArgs,
    },
    /// Support overlap of the solution set
    Overlap {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Range-property certificate of order K
    Rangeprop {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "k", value_name = "K")]
        k: usize,
    },
    /// Verdict for a candidate solution; exit 1 when inconclusive
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scalings: ScalingArgs,
        /// Candidate solution file
        #[arg(long = "x", value_name = "PATH")]
        x: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    };
    std::process::exit(code);
}

struct Loaded {
    matrix: DenseMatrix,
    rhs: Option<Vec<f64>>,
    input: InputInfo,
    json: bool,
}

fn load(common: &CommonArgs) -> Result<Loaded, String> {
    let format = MatrixFormat::detect(common.format(), &common.matrix);
    let matrix = parse_matrix(&common.matrix, format).map_err(|e| e.to_string())?;
    let rhs = match &common.rhs {
        Some(path) => {
            let v = parse_vector(path, MatrixFormat::detect(common.format(), path))
                .map_err(|e| e.to_string())?;
            if v.len() != matrix.rows() {
                return Err(format!(
                    "{}: right-hand side length {} does not match {} rows",
                    path.display(),
                    v.len(),
                    matrix.rows()
                ));
            }
            Some(v)
        }
        None => None,
    };
    let input = InputInfo {
        matrix: common.matrix.display().to_string(),
        rows: matrix.rows(),
        cols: matrix.cols(),
        rhs: common.rhs.as_ref().map(|p| p.display().to_string()),
        candidate: None,
        tie_tolerance: common.tie_tol,
        budget: common.spark_budget(),
        seed: common.seed,
    };
    Ok(Loaded {
        matrix,
        rhs,
        input,
        json: common.json,
    })
}

fn load_candidate(
    path: &std::path::Path,
    common: &CommonArgs,
    matrix: &DenseMatrix,
) -> Result<Vec<f64>, String> {
    let x = parse_vector(path, MatrixFormat::detect(common.format(), path))
        .map_err(|e| e.to_string())?;
    if x.len() != matrix.cols() {
        return Err(format!(
            "{}: candidate length {} does not match {} columns",
            path.display(),
            x.len(),
            matrix.cols()
        ));
    }
    Ok(x)
}

fn build_scalings(
    args: &ScalingArgs,
    common: &CommonArgs,
    matrix: &DenseMatrix,
    rhs: Option<&[f64]>,
) -> Result<Vec<ScalingSpec>, String> {
    let mut specs = Vec::new();
    for path in &args.w {
        let w = parse_matrix(path, MatrixFormat::detect(common.format(), path))
            .map_err(|e| e.to_string())?;
        if w.rows() != matrix.rows() || w.cols() != matrix.rows() {
            return Err(format!(
                "{}: scaling must be {}x{}, got {}x{}",
                path.display(),
                matrix.rows(),
                matrix.rows(),
                w.rows(),
                w.cols()
            ));
        }
        specs.push(ScalingSpec::explicit(w).map_err(|e| e.to_string())?);
    }
    if args.rhs_diagonal {
        let b = rhs.ok_or("--rhs-diagonal requires --rhs")?;
        specs.push(phi_diagonal_from_rhs(b));
    }
    if args.svd {
        specs.push(svd_scaling(matrix).map_err(|e| e.to_string())?);
    }
    if let Some(trials) = args.search {
        if trials == 0 {
            return Err("--search requires at least one trial".to_string());
        }
        specs.push(search_scaling(matrix, trials, common.seed));
    }
    Ok(specs)
}

fn emit(report: &AnalysisReport, json: bool) {
    if json {
        println!("{}", report::to_json(report));
    } else {
        print!("{}", report::render_text(report));
    }
}

fn blank_report(input: InputInfo) -> AnalysisReport {
    AnalysisReport {
        schema_version: SCHEMA_VERSION,
        input,
        coherence: None,
        babel: None,
        spark: None,
        scalings: Vec::new(),
        overlap: None,
        range_property: None,
        verdict: None,
        timings: Vec::new(),
    }
}

fn coherence_sections(matrix: &DenseMatrix, tie_tol: f64, report: &mut AnalysisReport) {
    if let Ok(gram) = GramMatrix::normalized(matrix) {
        if let Ok(summary) = coherence_summary(&gram, tie_tol) {
            report.coherence = Some(report::coherence_out(&summary));
        }
        if gram.dim() >= 2 {
            report.babel = Some(report::babel_out(&babel_profile(&gram)));
        }
    }
}

fn time_stage<T>(timings: &mut Vec<StageTiming>, stage: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timings.push(StageTiming {
        stage: stage.to_string(),
        millis: start.elapsed().as_millis() as u64,
    });
    out
}

fn dispatch(command: Command) -> Result<i32, String> {
    match command {
        Command::Analyze {
            common,
            scalings,
            x,
            k,
        } => {
            let loaded = load(&common)?;
            let mut rep = blank_report(loaded.input.clone());
            let candidate = match &x {
                Some(path) => Some(load_candidate(path, &common, &loaded.matrix)?),
                None => None,
            };
            rep.input.candidate = x.as_ref().map(|p| p.display().to_string());
            let mut timings = Vec::new();

            time_stage(&mut timings, "coherence", || {
                coherence_sections(&loaded.matrix, common.tie_tol, &mut rep)
            });

            let spark = time_stage(&mut timings, "spark", || {
                spark_report(
                    &loaded.matrix,
                    common.tie_tol,
                    common.want_exact(),
                    common.spark_budget(),
                )
            })
            .map_err(|e| e.to_string())?;
            rep.spark = Some(SparkOut::from_report(&spark));

            let specs = build_scalings(&scalings, &common, &loaded.matrix, loaded.rhs.as_deref())?;
            time_stage(&mut timings, "scalings", || -> Result<(), String> {
                for spec in &specs {
                    let cert = scaled_certificates(
                        &loaded.matrix,
                        spec,
                        &spark,
                        common.tie_tol,
                        common.want_exact(),
                        common.spark_budget(),
                    )
                    .map_err(|e| e.to_string())?;
                    rep.scalings.push(report::scaling_out(&cert));
                }
                Ok(())
            })?;

            if let Some(b) = &loaded.rhs {
                if common.gamma_star.is_none() {
                    time_stage(&mut timings, "overlap", || {
                        if let Ok(overlap) = support_overlap(&loaded.matrix, b) {
                            rep.overlap = Some(report::overlap_out(&overlap));
                        }
                    });
                }
            }

            if let Some(order) = k {
                let cert = time_stage(&mut timings, "range-property", || {
                    range_property_ii(&loaded.matrix, order, common.pair_budget())
                })
                .map_err(|e| e.to_string())?;
                rep.range_property = Some(report::range_property_out(&cert));
            }

            if let Some(b) = loaded.rhs.clone() {
                let instance = SystemInstance::new(
                    loaded.matrix.clone(),
                    b,
                    candidate,
                    common.gamma_star,
                    specs,
                )
                .map_err(|e| e.to_string())?;
                let options = EvaluateOptions {
                    tie_tolerance: common.tie_tol,
                    exact_spark: common.want_exact(),
                    spark_budget: common.spark_budget(),
                    // A supplied gamma-star replaces the exact overlap.
                    overlap: common.gamma_star.is_none(),
                    ..EvaluateOptions::default()
                };
                let verdict = time_stage(&mut timings, "verdict", || evaluate(&instance, &options));
                rep.verdict = Some(report::verdict_out(&verdict));
            }

            rep.timings = timings;
            emit(&rep, loaded.json);
            Ok(0)
        }

        Command::Spark { common } => {
            let loaded = load(&common)?;
            let mut rep = blank_report(loaded.input.clone());
            let mut timings = Vec::new();
            let spark = time_stage(&mut timings, "spark", || {
                spark_report(
                    &loaded.matrix,
                    common.tie_tol,
                    common.want_exact(),
                    common.spark_budget(),
                )
            })
            .map_err(|e| e.to_string())?;
            rep.spark = Some(SparkOut::from_report(&spark));
            rep.timings = timings;
            emit(&rep, loaded.json);
            Ok(0)
        }

        Command::Bounds { common } => {
            let loaded = load(&common)?;
            let mut rep = blank_report(loaded.input.clone());
            let mut timings = Vec::new();
            time_stage(&mut timings, "coherence", || {
                coherence_sections(&loaded.matrix, common.tie_tol, &mut rep)
            });
            let spark = time_stage(&mut timings, "bounds", || {
                spark_report(&loaded.matrix, common.tie_tol, false, common.spark_budget())
            })
            .map_err(|e| e.to_string())?;
            rep.spark = Some(SparkOut::from_report(&spark));
            rep.timings = timings;
            emit(&rep, loaded.json);
            Ok(0)
        }

        Command::Scale { common, scalings } => {
            let loaded = load(&common)?;
            let mut rep = blank_report(loaded.input.clone());
            let mut timings = Vec::new();
            let spark = time_stage(&mut timings, "spark", || {
                spark_report(
                    &loaded.matrix,
                    common.tie_tol,
                    common.want_exact(),
                    common.spark_budget(),
                )
            })
            .map_err(|e| e.to_string())?;
            rep.spark = Some(SparkOut::from_report(&spark));
            let specs = build_scalings(&scalings, &common, &loaded.matrix, loaded.rhs.as_deref())?;
            if specs.is_empty() {
                return Err(
                    "scale needs at least one of --w, --rhs-diagonal, --svd, --search".to_string(),
                );
            }
            time_stage(&mut timings, "scalings", || -> Result<(), String> {
                for spec in &specs {
                    let cert = scaled_certificates(
                        &loaded.matrix,
                        spec,
                        &spark,
                        common.tie_tol,
                        common.want_exact(),
                        common.spark_budget(),
                    )
                    .map_err(|e| e.to_string())?;
                    rep.scalings.push(report::scaling_out(&cert));
                }
                Ok(())
            })?;
            rep.timings = timings;
            emit(&rep, loaded.json);
            Ok(0)
        }

        Command::Overlap { common } => {
            let loaded = load(&common)?;
            let b = loaded.rhs.clone().ok_or("overlap requires --rhs")?;
            let mut rep = blank_report(loaded.input.clone());
            let mut timings = Vec::new();
            let overlap = time_stage(&mut timings, "overlap", || {
                support_overlap(&loaded.matrix, &b)
            })
            .map_err(|e| e.to_string())?;
            rep.overlap = Some(report::overlap_out(&overlap));
            let spark = time_stage(&mut timings, "spark", || {
                spark_report(
                    &loaded.matrix,
                    common.tie_tol,
                    common.want_exact(),
                    common.spark_budget(),
                )
            })
            .map_err(|e| e.to_string())?;
            rep.spark = Some(SparkOut::from_report(&spark));
            rep.timings = timings;
            emit(&rep, loaded.json);
            Ok(0)
        }

        Command::Rangeprop { common, k } => {
            let loaded = load(&common)?;
            let mut rep = blank_report(loaded.input.clone());
            let mut timings = Vec::new();
            let cert = time_stage(&mut timings, "range-property", || {
                range_property_ii(&loaded.matrix, k, common.pair_budget())
            })
            .map_err(|e| e.to_string())?;
            rep.range_property = Some(report::range_property_out(&cert));
            rep.timings = timings;
            emit(&rep, loaded.json);
            Ok(0)
        }

        Command::Verify {
            common,
            scalings,
            x,
        } => {
            let loaded = load(&common)?;
            let b = loaded.rhs.clone().ok_or("verify requires --rhs")?;
            let candidate = load_candidate(&x, &common, &loaded.matrix)?;
            let specs = build_scalings(&scalings, &common, &loaded.matrix, Some(&b))?;
            let mut rep = blank_report(loaded.input.clone());
            rep.input.candidate = Some(x.display().to_string());
            let instance = SystemInstance::new(
                loaded.matrix.clone(),
                b,
                Some(candidate),
                common.gamma_star,
                specs,
            )
            .map_err(|e| e.to_string())?;
            let options = EvaluateOptions {
                tie_tolerance: common.tie_tol,
                exact_spark: common.want_exact(),
                spark_budget: common.spark_budget(),
                // A supplied gamma-star replaces the exact overlap.
                overlap: common.gamma_star.is_none(),
                ..EvaluateOptions::default()
            };
            let mut timings = Vec::new();
            let verdict = time_stage(&mut timings, "verdict", || evaluate(&instance, &options));
            let conclusion = verdict.conclusion;
            rep.verdict = Some(report::verdict_out(&verdict));
            rep.timings = timings;
            emit(&rep, loaded.json);
            Ok(match conclusion {
                Conclusion::UniqueSparsest => 0,
                Conclusion::Inconclusive => 1,
            })
        }
    }
}
