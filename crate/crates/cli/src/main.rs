use clap::{Args, Parser, Subcommand, ValueEnum};
use nnorm_core::analysis::{self, SequencePrefix, Status, Verdict};
use nnorm_core::fixedpoint::{self, SolveOptions};
use nnorm_core::lp::{self, BatchConfig};
use nnorm_core::nnorm::{self as norms, NormParams, DEFAULT_ABS_TOL, DEFAULT_REL_TOL};
use nnorm_core::verify::{self, VerifyConfig, SUITE_NAMES};
use nnorm_core::{AnchorSet, DomainSampler, Error, IndexSubset, Mapping};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nnorm",
    version,
    about = "n-norms, class-m quotient norms and fixed points on truncated lp"
)]
struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative tolerance for independence and axiom checks.
    #[arg(long, global = true, default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    /// Absolute tolerance for zero tests.
    #[arg(long, global = true, default_value_t = DEFAULT_ABS_TOL)]
    abs_tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// n-norm of a tuple of vectors.
    Norm {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// JSON file: `[[...], ...]` or `{"vectors": [[...], ...]}`.
        #[arg(long)]
        vectors: PathBuf,
    },
    /// Class-1 or class-m quotient norms of a vector.
    Qnorm {
        #[command(flatten)]
        anchors: AnchorArg,
        /// The vector, inline JSON.
        #[arg(long)]
        u: String,
        /// A single subset such as "1,3"; all class-m subsets otherwise.
        #[arg(long, conflicts_with = "m")]
        subset: Option<String>,
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
    /// Sampled check of the n-norm axioms.
    Axioms {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convergence of a sequence prefix to a limit in the class-m norms.
    Converge {
        #[command(flatten)]
        seq: SequenceArgs,
        /// The limit, inline JSON.
        #[arg(long)]
        limit: String,
    },
    /// Cauchy check of a sequence prefix in the class-m norms.
    Cauchy {
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Largest class-m norm over a point set.
    Bounded {
        #[command(flatten)]
        anchors: AnchorArg,
        /// JSON file: `[[...], ...]` or `{"points": [[...], ...]}`.
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
    /// Contraction constant of a map in the class-m norms.
    Contraction {
        #[command(flatten)]
        anchors: AnchorArg,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 500)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Half-width of the sampling box around the origin.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Also check that class ratios propagate pairwise.
        #[arg(long)]
        propagation: bool,
    },
    /// Banach iteration from a starting point.
    Solve {
        /// Anchor set; defaults to the standard basis of R^d.
        #[arg(long)]
        anchors: Option<PathBuf>,
        #[arg(long)]
        map: PathBuf,
        /// Starting point, inline JSON.
        #[arg(long)]
        x0: String,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        /// Known contraction constant; certified automatically when possible.
        #[arg(long)]
        contraction: Option<f64>,
        /// Include every iterate in the report.
        #[arg(long)]
        trace: bool,
    },
    /// Batch check of the lp norm equivalences.
    Equivalence {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ambient dimensions, e.g. "2,4,8"; defaults to n, n+2 and 8.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// `csv` emits one row per sample and check.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Every module's property suite.
    VerifyAll {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        maps: usize,
        #[arg(long, default_value_t = 500)]
        pairs: usize,
        /// Run only these suites.
        #[arg(long, value_delimiter = ',', value_parser = clap::builder::PossibleValuesParser::new(SUITE_NAMES))]
        suite: Option<Vec<String>>,
    },
}

#[derive(Args)]
struct AnchorArg {
    /// JSON file `{"n": .., "p": .., "vectors": [[...], ...]}`.
    #[arg(long)]
    anchors: PathBuf,
}

#[derive(Args)]
struct SequenceArgs {
    #[command(flatten)]
    anchors: AnchorArg,
    /// JSON file `{"points": [[...], ...]}`.
    #[arg(long)]
    sequence: PathBuf,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Evaluate only the covering family.
    #[arg(long)]
    covering: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// A failed run: exit 1 for a mathematical verdict, exit 2 for bad input.
enum Failure {
    Input(String),
    Verdict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Diverged { .. } | Error::NonFiniteIterate(_) => Failure::Verdict(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

/// Report text plus whether it records a violation.
struct Output {
    text: String,
    violated: bool,
}

impl Output {
    fn json<T: Serialize>(value: &T, violated: bool) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        Self { text, violated }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn inline_json<T: DeserializeOwned>(flag: &str, text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Input(format!("--{flag}: {e}")))
}

#[derive(Clone, Copy)]
struct Tolerances {
    rel: f64,
    abs: f64,
}

impl Tolerances {
    fn params(self, n: usize, p: f64, d: usize) -> Result<NormParams, Failure> {
        Ok(NormParams::with_tolerances(n, p, d, self.rel, self.abs)?)
    }

    fn anchors(self, vectors: Vec<Vec<f64>>, p: f64) -> Result<AnchorSet, Failure> {
        Ok(AnchorSet::with_tolerances(vectors, p, self.rel, self.abs)?)
    }
}

fn read_anchors_at(path: &Path, tol: Tolerances) -> Result<AnchorSet, Failure> {
    let y: AnchorSet = read_json(path)?;
    if tol.rel == DEFAULT_REL_TOL && tol.abs == DEFAULT_ABS_TOL {
        return Ok(y);
    }
    let p = y.p();
    tol.anchors(y.vectors().to_vec(), p).map_err(|e| match e {
        Failure::Input(msg) => Failure::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn read_map(path: &Path) -> Result<Mapping, Failure> {
    let map: Mapping = read_json(path)?;
    map.validate()
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(map)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VectorList {
    Bare(Vec<Vec<f64>>),
    Vectors { vectors: Vec<Vec<f64>> },
    Points { points: Vec<Vec<f64>> },
}

impl VectorList {
    fn into_inner(self) -> Vec<Vec<f64>> {
        match self {
            VectorList::Bare(v) | VectorList::Vectors { vectors: v } | VectorList::Points { points: v } => v,
        }
    }
}

#[derive(Serialize)]
struct NormReport {
    n: usize,
    p: f64,
    d: usize,
    value: f64,
    linearly_independent: bool,
}

#[derive(Serialize)]
struct SubsetNorm {
    subset: IndexSubset,
    value: f64,
    is_zero: bool,
}

#[derive(Serialize)]
struct QnormReport {
    n: usize,
    p: f64,
    norms: Vec<SubsetNorm>,
}

#[derive(Serialize)]
struct BoundedReport {
    m: usize,
    points: usize,
    bound: Option<f64>,
}

#[derive(Serialize)]
struct ContractionReport {
    sampled: fixedpoint::ContractionEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    certified: Option<fixedpoint::ContractionEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    propagation: Option<fixedpoint::PropagationReport>,
}

#[derive(Serialize)]
struct SolveReport {
    contraction: Option<f64>,
    #[serde(flatten)]
    result: fixedpoint::FixedPointResult,
}

fn verdict_output(v: &Verdict) -> Output {
    Output::json(v, v.status == Status::Violated)
}

fn run(command: Command, tol: Tolerances) -> Result<Output, Failure> {
    match command {
        Command::Norm { p, vectors } => {
            let v = read_json::<VectorList>(&vectors)?.into_inner();
            let d = v.first().map_or(0, Vec::len);
            let params = tol.params(v.len(), p, d)?;
            let value = norms::lp_n_norm(&v, &params)?;
            let report = NormReport {
                n: v.len(),
                p,
                d,
                value,
                linearly_independent: norms::is_linearly_independent(&v, &params)?,
            };
            Ok(Output::json(&report, false))
        }
        Command::Qnorm { anchors, u, subset, m } => {
            let y = read_anchors_at(&anchors.anchors, tol)?;
            let u: Vec<f64> = inline_json("u", &u)?;
            let subsets = match subset {
                Some(s) => {
                    let s: IndexSubset = s.parse().map_err(|e: Error| Failure::Input(format!("--subset: {e}")))?;
                    s.check(y.n())?;
                    vec![s]
                }
                None => nnorm_core::enumerate_class(y.n(), m)?.subsets,
            };
            let norms = subsets
                .into_iter()
                .map(|s| {
                    Ok(SubsetNorm {
                        value: y.classm_norm(&u, &s)?,
                        is_zero: y.quotient_zero_check(&u, &s)?,
                        subset: s,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            Ok(Output::json(
                &QnormReport {
                    n: y.n(),
                    p: y.p(),
                    norms,
                },
                false,
            ))
        }
        Command::Axioms { n, p, d, samples, seed } => {
            let report = norms::check_axioms(&tol.params(n, p, d)?, samples, seed)?;
            Ok(Output::json(&report, !report.passed()))
        }
        Command::Converge { seq, limit } => {
            let y = read_anchors_at(&seq.anchors.anchors, tol)?;
            let prefix: SequencePrefix = read_json(&seq.sequence)?;
            let limit: Vec<f64> = inline_json("limit", &limit)?;
            let v = analysis::check_convergence(&prefix, &limit, &y, seq.m, seq.eps, seq.covering)?;
            Ok(verdict_output(&v))
        }
        Command::Cauchy { seq } => {
            let y = read_anchors_at(&seq.anchors.anchors, tol)?;
            let prefix: SequencePrefix = read_json(&seq.sequence)?;
            let v = analysis::check_cauchy(&prefix, &y, seq.m, seq.eps, seq.covering)?;
            Ok(verdict_output(&v))
        }
        Command::Bounded { anchors, points, m } => {
            let y = read_anchors_at(&anchors.anchors, tol)?;
            let pts = read_json::<VectorList>(&points)?.into_inner();
            let bound = analysis::check_bounded(&pts, &y, m)?;
            Ok(Output::json(
                &BoundedReport {
                    m,
                    points: pts.len(),
                    bound,
                },
                false,
            ))
        }
        Command::Contraction {
            anchors,
            map,
            m,
            pairs,
            seed,
            radius,
            propagation,
        } => {
            let y = read_anchors_at(&anchors.anchors, tol)?;
            let map = read_map(&map)?;
            let sampler = DomainSampler::origin_box(y.d(), radius)?;
            let sampled = fixedpoint::estimate_contraction(&map, &sampler, &y, m, pairs, seed)?;
            let certified = match fixedpoint::certify(&map, &y, m) {
                Ok(c) => Some(c),
                Err(Error::CertificationUnavailable(_)) => None,
                Err(e) => return Err(e.into()),
            };
            let propagation = if propagation {
                Some(fixedpoint::verify_class_propagation(
                    &map, &sampler, &y, m, pairs, seed,
                )?)
            } else {
                None
            };
            let violated = propagation.as_ref().is_some_and(|p| !p.holds);
            Ok(Output::json(
                &ContractionReport {
                    sampled,
                    certified,
                    propagation,
                },
                violated,
            ))
        }
        Command::Solve {
            anchors,
            map,
            x0,
            m,
            eps,
            max_iter,
            contraction,
            trace,
        } => {
            let map = read_map(&map)?;
            let x0: Vec<f64> = inline_json("x0", &x0)?;
            let y = match anchors {
                Some(path) => read_anchors_at(&path, tol)?,
                None => {
                    let d = x0.len();
                    tol.anchors(
                        (0..d)
                            .map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect())
                            .collect(),
                        2.0,
                    )?
                }
            };
            let contraction = match contraction {
                Some(c) => Some(c),
                None => map.certified_contraction(&y, m).ok().filter(|c| c.is_finite()),
            };
            let mut options = SolveOptions::new(eps, max_iter).with_trace(trace);
            if let Some(c) = contraction {
                options = options.with_contraction(c);
            }
            let result = fixedpoint::banach_solve(&map, &x0, &y, m, &options)?;
            let violated = !result.converged;
            Ok(Output::json(&SolveReport { contraction, result }, violated))
        }
        Command::Equivalence {
            n,
            p,
            samples,
            seed,
            dims,
            format,
        } => {
            let mut config = BatchConfig::new(n, p, samples, seed);
            if let Some(dims) = dims {
                config.dims = dims;
            }
            let report = lp::run_batch(&config)?;
            let violated = !report.pass;
            match format {
                Format::Json => Ok(Output::json(&report, violated)),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for row in &report.rows {
                        w.serialize(row).map_err(|e| Failure::Input(e.to_string()))?;
                    }
                    let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
                    Ok(Output {
                        text: String::from_utf8(bytes).expect("csv output is utf-8"),
                        violated,
                    })
                }
            }
        }
        Command::VerifyAll {
            seed,
            samples,
            maps,
            pairs,
            suite,
        } => {
            let cfg = VerifyConfig {
                seed,
                samples,
                maps,
                pairs,
            };
            let report = match suite {
                None => verify::verify_all(&cfg)?,
                Some(names) => {
                    let suites = names
                        .iter()
                        .map(|name| verify::run_suite(name, &cfg).expect("validated by clap"))
                        .collect::<Result<Vec<_>, Error>>()?;
                    let pass = suites.iter().all(|s| s.pass);
                    verify::VerifyReport {
                        config: cfg,
                        suites,
                        pass,
                    }
                }
            };
            Ok(Output::json(&report, !report.pass))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let tol = Tolerances {
        rel: cli.rel_tol,
        abs: cli.abs_tol,
    };
    match run(cli.command, tol) {
        Ok(output) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &output.text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{}", output.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(u8::from(output.violated))
        }
        Err(Failure::Verdict(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
