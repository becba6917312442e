//! Command-line front end: `solve`, `sweep` and `verify` over JSON model
//! files.
//!
//! Exit codes: 0 success, 1 usage error, 2 model validation failure,
//! 3 infeasible population, 4 oracle size limit, 5 verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::metrics::{ConvolutionAnalysis, StationReport};
use crate::model::{NetworkModel, VisitRatios};
use crate::oracle;
use crate::report::{ModelFile, OutputFormat, ReportDocument};
use crate::{model, mva, stable_mva};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MODEL: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_SIZE_LIMIT: i32 = 4;
pub const EXIT_VERIFY_FAILED: i32 = 5;

/// Solution algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Convolution,
    Mva,
    StableMva,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Convolution => "convolution",
            Method::Mva => "mva",
            Method::StableMva => "stable-mva",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> OutputFormat {
        match f {
            Format::Table => OutputFormat::Table,
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "skipover",
    version,
    about = "Exact solver for closed queueing networks with finite buffers and skip-over routing"
)]
struct Cli {
    /// Reserved for fixture-generation workflows; the solver commands accept
    /// and ignore it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the model at one population and print the full report
    Solve {
        /// Model file (JSON)
        #[arg(short, long)]
        model: PathBuf,
        /// Network population
        #[arg(short = 'n', long)]
        population: usize,
        #[arg(long, value_enum, default_value_t = Method::Convolution)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Solve over a population range, one report per (population, station)
    Sweep {
        #[arg(short, long)]
        model: PathBuf,
        /// First population of the range (at least 1)
        #[arg(long)]
        from: usize,
        /// Last population of the range (inclusive)
        #[arg(long)]
        to: usize,
        #[arg(long, value_enum, default_value_t = Method::Convolution)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run all three solvers plus the enumeration oracle and compare
    Verify {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(short = 'n', long)]
        population: usize,
        /// Maximum allowed deviation per index family
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::InfeasiblePopulation { .. } => EXIT_INFEASIBLE,
            Error::SizeLimit { .. } => EXIT_SIZE_LIMIT,
            _ => EXIT_MODEL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses and dispatches; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point used by the binary.
pub fn main_from_env() -> i32 {
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    run(std::env::args_os(), &mut out, &mut err)
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            model,
            population,
            method,
            format,
        } => cmd_solve(&model, population, method, format, out, err),
        Command::Sweep {
            model,
            from,
            to,
            method,
            format,
        } => cmd_sweep(&model, from, to, method, format, out, err),
        Command::Verify {
            model,
            population,
            tolerance,
        } => cmd_verify(&model, population, tolerance, out),
    }
}

fn load_model(path: &Path) -> Result<NetworkModel, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_MODEL,
        message: format!("cannot read model file {}: {e}", path.display()),
    })?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| Failure {
        code: EXIT_MODEL,
        message: format!("cannot parse model file {}: {e}", path.display()),
    })?;
    Ok(file.into_model()?)
}

/// Reports for each requested population under one method. The boolean is
/// true when the MVA solver flagged instability anywhere in the run.
fn solve_reports(
    model: &NetworkModel,
    visits: &VisitRatios,
    method: Method,
    populations: &[usize],
) -> Result<(Vec<StationReport>, bool), Failure> {
    let max_population = populations.iter().copied().max().unwrap_or(0);
    model.check_population(max_population)?;
    let mut rows = Vec::new();
    let mut flagged = false;
    match method {
        Method::Convolution => {
            let analysis = ConvolutionAnalysis::new(model, visits, max_population);
            for &n in populations {
                rows.extend(analysis.reports(n)?);
            }
        }
        Method::Mva => {
            let states = mva::run(model, visits, max_population)?;
            for &n in populations {
                if n == 0 {
                    rows.extend((0..model.station_count()).map(|i| {
                        let mut r = StationReport::empty(i);
                        r.stability_flag = Some(false);
                        r
                    }));
                } else {
                    let state = &states[n - 1];
                    flagged |= state.any_flag();
                    rows.extend(state.reports());
                }
            }
        }
        Method::StableMva => {
            let solution = stable_mva::solve(model, visits, max_population)?;
            for &n in populations {
                rows.extend(solution.reports(n));
            }
        }
    }
    Ok((rows, flagged))
}

fn cmd_solve(
    path: &Path,
    population: usize,
    method: Method,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    let model = load_model(path)?;
    let visits = model::solve_visit_ratios(&model)?;
    let started = Instant::now();
    let (reports, flagged) = solve_reports(&model, &visits, method, &[population])?;
    let timing_ms = started.elapsed().as_secs_f64() * 1e3;
    if flagged {
        let _ = writeln!(
            err,
            "warning: mva stability flag tripped at population {population}; \
             consider --method stable-mva"
        );
    }
    let document = ReportDocument::new(method.name(), &model, &visits, reports, timing_ms);
    let _ = write!(out, "{}", document.render(format.into()));
    Ok(())
}

fn cmd_sweep(
    path: &Path,
    from: usize,
    to: usize,
    method: Method,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    if from < 1 || from > to {
        return Err(Failure {
            code: EXIT_USAGE,
            message: format!("invalid sweep range {from}..{to}: need 1 <= from <= to"),
        });
    }
    let model = load_model(path)?;
    let visits = model::solve_visit_ratios(&model)?;
    let populations: Vec<usize> = (from..=to).collect();
    let started = Instant::now();
    let (reports, flagged) = solve_reports(&model, &visits, method, &populations)?;
    let timing_ms = started.elapsed().as_secs_f64() * 1e3;
    if flagged {
        let _ = writeln!(
            err,
            "warning: mva stability flag tripped within the sweep; \
             consider --method stable-mva"
        );
    }
    let document = ReportDocument::new(method.name(), &model, &visits, reports, timing_ms);
    let _ = write!(out, "{}", document.render(format.into()));
    Ok(())
}

/// One compared index family in a verification run.
#[derive(Debug, Clone)]
pub struct DeviationLine {
    pub family: &'static str,
    pub comparison: &'static str,
    pub deviation: f64,
    pub within: bool,
    pub exempted: bool,
}

/// Outcome of running every solver plus the oracle on one population.
#[derive(Debug, Clone)]
pub struct VerificationSummary {
    pub population: usize,
    pub tolerance: f64,
    pub lines: Vec<DeviationLine>,
    pub mva_exempted: bool,
    pub passed: bool,
}

fn relative_deviation(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Runs convolution, MVA, stable MVA and the enumeration oracle at one
/// population and reports the worst deviation per index family.
///
/// MVA comparisons are exempted (reported but not counted) at populations
/// where its stability flag tripped.
pub fn verify_model(
    model: &NetworkModel,
    visits: &VisitRatios,
    population: usize,
    tolerance: f64,
    state_limit: usize,
) -> crate::error::Result<VerificationSummary> {
    let oracle_result = oracle::direct_solution(model, visits, population, state_limit)?;
    let analysis = ConvolutionAnalysis::new(model, visits, population);
    let stable = stable_mva::solve(model, visits, population)?;
    let mva_states = mva::run(model, visits, population)?;

    let m = model.station_count();
    let mut lines = Vec::new();

    // Convolution against ground truth.
    let g = analysis.gtable().full(population);
    let norm_dev = relative_deviation(g.ratio(oracle_result.normalization), 1.0);
    lines.push(DeviationLine {
        family: "normalization",
        comparison: "convolution vs oracle",
        deviation: norm_dev,
        within: norm_dev <= tolerance,
        exempted: false,
    });
    let mut marginal_dev = 0.0f64;
    for i in 0..m {
        let p = analysis.queue_length_distribution(i, population)?;
        for (k, &truth) in oracle_result.marginals[i].iter().enumerate() {
            marginal_dev = marginal_dev.max((p[k] - truth).abs());
        }
    }
    lines.push(DeviationLine {
        family: "marginals",
        comparison: "convolution vs oracle",
        deviation: marginal_dev,
        within: marginal_dev <= tolerance,
        exempted: false,
    });

    // Solver-to-solver comparisons, field family by field family.
    let reference: Vec<StationReport> = analysis.reports(population)?;
    let stable_reports = stable.reports(population);
    let mva_reports: Vec<StationReport> = if population == 0 {
        (0..m).map(StationReport::empty).collect()
    } else {
        mva_states[population - 1].reports()
    };
    let mva_exempted = population > 0 && mva_states[population - 1].any_flag();

    let families: [(&'static str, fn(&StationReport) -> f64); 6] = [
        ("total_throughput", |r| r.total_throughput),
        ("productive_throughput", |r| r.productive_throughput),
        ("skipping_throughput", |r| r.skipping_throughput),
        ("utilization", |r| r.utilization),
        ("mean_queue_length", |r| r.mean_queue_length),
        ("mean_waiting_time", |r| r.mean_waiting_time),
    ];
    for (candidate, comparison, exempted) in [
        (&stable_reports, "convolution vs stable-mva", false),
        (&mva_reports, "convolution vs mva", mva_exempted),
    ] {
        let mut dist_dev = 0.0f64;
        for (a, b) in reference.iter().zip(candidate.iter()) {
            for (p, q) in a.distribution.iter().zip(&b.distribution) {
                dist_dev = dist_dev.max(relative_deviation(*p, *q));
            }
        }
        lines.push(DeviationLine {
            family: "distribution",
            comparison,
            deviation: dist_dev,
            within: dist_dev <= tolerance,
            exempted,
        });
        for (family, extract) in families {
            let mut dev = 0.0f64;
            for (a, b) in reference.iter().zip(candidate.iter()) {
                dev = dev.max(relative_deviation(extract(a), extract(b)));
            }
            lines.push(DeviationLine {
                family,
                comparison,
                deviation: dev,
                within: dev <= tolerance,
                exempted,
            });
        }
    }

    let passed = lines.iter().all(|l| l.within || l.exempted);
    Ok(VerificationSummary {
        population,
        tolerance,
        lines,
        mva_exempted,
        passed,
    })
}

fn cmd_verify(
    path: &Path,
    population: usize,
    tolerance: f64,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let model = load_model(path)?;
    let visits = model::solve_visit_ratios(&model)?;
    let summary = verify_model(
        &model,
        &visits,
        population,
        tolerance,
        oracle::DEFAULT_STATE_LIMIT,
    )?;
    let _ = writeln!(
        out,
        "verify: population={} tolerance={:e}",
        summary.population, summary.tolerance
    );
    for line in &summary.lines {
        let status = if line.exempted {
            "exempt"
        } else if line.within {
            "pass"
        } else {
            "FAIL"
        };
        let _ = writeln!(
            out,
            "  {:<22} {:<28} {:>12.5e}  {status}",
            line.family, line.comparison, line.deviation
        );
    }
    if summary.mva_exempted {
        let _ = writeln!(
            out,
            "  note: mva exempted at population {} (stability flag tripped)",
            summary.population
        );
    }
    let _ = writeln!(
        out,
        "result: {}",
        if summary.passed { "PASS" } else { "FAIL" }
    );
    if summary.passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY_FAILED,
            message: format!(
                "verification failed at population {} (tolerance {:e})",
                summary.population, summary.tolerance
            ),
        })
    }
}
