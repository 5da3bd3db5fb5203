//! The `polygon-odds` command line.
//!
//! [`run`] takes the full argument vector and writes the report to the given
//! writers, returning the process exit code: `0` on success, `1` for domain
//! errors (not a polygon, budget exceeded, invalid parameters), `2` for usage
//! errors.

pub mod report;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use polygon_odds::closed_form::{
    broken_brick_prob, broken_stick_prob, convergence_gap_exact, pickup_bricks_prob,
    pickup_sticks_prob, Family,
};
use polygon_odds::montecarlo::{simulate_brick_lambda, simulate_stick_lambda, trace_failures};
use polygon_odds::oracle::{
    broken_brick_oracle, pickup_bricks_oracle, stick_lambda_brick_oracle, Budget,
};
use polygon_odds::polygon::{construct_polygon, Inventory};
use polygon_odds::{Error, ExactProb, Partition, ProblemParams, SimConfig};

use report::{
    ConvergenceResult, ConvergenceRow, CountResult, ExactResult, Format, PolygonResult,
    ReportResult, RunReport, SimResult, TableResult, TableRow,
};

#[derive(Debug, Parser)]
#[command(
    name = "polygon-odds",
    version,
    about = "Probabilities that random stick pieces form a polygon"
)]
struct Cli {
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a closed form exactly.
    Exact {
        #[arg(value_enum)]
        problem: ExactProblem,
        #[command(flatten)]
        size: Size,
    },
    /// Count outcomes by exhaustive enumeration.
    Oracle {
        #[arg(value_enum)]
        problem: OracleProblem,
        #[command(flatten)]
        size: Size,
        /// Partition for `stick-lambda`, e.g. `3,1`.
        #[arg(long, value_parser = parse_list)]
        lambda: Option<IntList>,
        /// Maximum number of outcomes to enumerate.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Estimate a Stick(λ) probability by simulation.
    Simulate(SimulateArgs),
    /// Build a convex polygon with the given side lengths.
    Construct {
        /// Side lengths in order, e.g. `3,4,5`.
        #[arg(long, value_parser = parse_real_list)]
        sides: RealList,
    },
    /// Exact values over a grid of sizes, sorted by (k, n).
    Table {
        #[arg(long, value_enum)]
        family: ExactProblem,
        /// Piece counts: `3..6`, `3,5,7` or `4`.
        #[arg(long, value_parser = parse_list)]
        k: IntList,
        /// Brick lengths for the brick families, same syntax as `--k`.
        #[arg(long, value_parser = parse_list)]
        n: Option<IntList>,
    },
    /// Gap between a discrete problem and its continuous limit.
    Convergence {
        #[arg(long, value_enum)]
        family: LimitFamily,
        #[arg(long)]
        k: u64,
        /// Brick lengths, e.g. `10,100,10000`.
        #[arg(long, value_parser = parse_list)]
        n: IntList,
    },
}

#[derive(Debug, Args)]
struct Size {
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Partition, e.g. `2,1,1`. Unsorted input is sorted with a warning.
    #[arg(long, value_parser = parse_list)]
    lambda: IntList,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    shards: u64,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// Use the discrete model with stick lengths in `{λᵢ, …, n}`.
    #[arg(long)]
    n: Option<u64>,
    /// Print one line per failed trial to standard error.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExactProblem {
    BrokenStick,
    BrokenBrick,
    PickupBricks,
    PickupSticks,
}

impl ExactProblem {
    fn name(self) -> &'static str {
        match self {
            ExactProblem::BrokenStick => "broken-stick",
            ExactProblem::BrokenBrick => "broken-brick",
            ExactProblem::PickupBricks => "pickup-bricks",
            ExactProblem::PickupSticks => "pickup-sticks",
        }
    }

    fn needs_n(self) -> bool {
        matches!(self, ExactProblem::BrokenBrick | ExactProblem::PickupBricks)
    }

    fn evaluate(self, n: Option<u64>, k: u64) -> Result<ExactProb, Failure> {
        match self {
            ExactProblem::BrokenStick => Ok(broken_stick_prob(k)?),
            ExactProblem::PickupSticks => Ok(pickup_sticks_prob(k)?),
            ExactProblem::BrokenBrick => {
                Ok(broken_brick_prob(ProblemParams::new(require(n, "n")?, k))?)
            }
            ExactProblem::PickupBricks => {
                Ok(pickup_bricks_prob(ProblemParams::new(require(n, "n")?, k))?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleProblem {
    BrokenBrick,
    PickupBricks,
    StickLambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LimitFamily {
    Broken,
    Pickup,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct IntList(Vec<u64>);

#[derive(Debug, Clone, PartialEq)]
struct RealList(Vec<f64>);

/// `a..b` (inclusive), `a` or comma-separated mixes of both.
fn parse_list(raw: &str) -> Result<IntList, String> {
    let mut out = Vec::new();
    for item in raw.split(',').map(str::trim) {
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: u64 = lo
                .parse()
                .map_err(|_| format!("bad range start in {item:?}"))?;
            let hi: u64 = hi
                .trim_start_matches('=')
                .parse()
                .map_err(|_| format!("bad range end in {item:?}"))?;
            if lo > hi {
                return Err(format!("empty range {item:?}"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(
                item.parse()
                    .map_err(|_| format!("not an integer: {item:?}"))?,
            );
        }
    }
    Ok(IntList(out))
}

fn parse_real_list(raw: &str) -> Result<RealList, String> {
    raw.split(',')
        .map(|s| s.trim().parse().map_err(|_| format!("not a number: {s:?}")))
        .collect::<Result<_, _>>()
        .map(RealList)
}

/// Why a command did not produce a report.
#[derive(Debug)]
enum Failure {
    /// A flag the subcommand needs was left out; reported like a parse error.
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn missing(flag: &str) -> Failure {
    Failure::Usage(format!(
        "the argument '--{flag}' is required for this subcommand"
    ))
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| missing(flag))
}

fn budget(flag: Option<u64>) -> Result<Budget, Error> {
    match flag {
        Some(b) => Ok(Budget(b)),
        None => Budget::from_env(),
    }
}

fn partition(parts: Vec<u64>, warnings: &mut dyn Write) -> Result<Partition, Error> {
    let (lambda, resorted) = Partition::sorted(parts)?;
    if resorted {
        let _ = writeln!(warnings, "warning: lambda sorted to {lambda}");
    }
    Ok(lambda)
}

fn join(parts: &[u64]) -> String {
    parts
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

struct Outcome {
    command: String,
    params: BTreeMap<String, String>,
    result: ReportResult,
}

fn execute(command: Command, err: &mut dyn Write) -> Result<Outcome, Failure> {
    let mut params = BTreeMap::new();
    let (command, result) = match command {
        Command::Exact { problem, size } => {
            let k = require(size.k, "k")?;
            params.insert("k".into(), k.to_string());
            if problem.needs_n() {
                params.insert("n".into(), require(size.n, "n")?.to_string());
            }
            let p = problem.evaluate(size.n, k)?;
            (
                format!("exact {}", problem.name()),
                ReportResult::Exact(ExactResult::from(&p)),
            )
        }
        Command::Oracle {
            problem,
            size,
            lambda,
            budget: flag,
        } => {
            let budget = budget(flag)?;
            params.insert("budget".into(), budget.0.to_string());
            let n = require(size.n, "n")?;
            params.insert("n".into(), n.to_string());
            let (name, count) = match problem {
                OracleProblem::BrokenBrick | OracleProblem::PickupBricks => {
                    let k = require(size.k, "k")?;
                    params.insert("k".into(), k.to_string());
                    let p = ProblemParams::new(n, k);
                    if problem == OracleProblem::BrokenBrick {
                        ("broken-brick", broken_brick_oracle(p, budget)?)
                    } else {
                        ("pickup-bricks", pickup_bricks_oracle(p, budget)?)
                    }
                }
                OracleProblem::StickLambda => {
                    let IntList(parts) = require(lambda, "lambda")?;
                    let lambda = partition(parts, err)?;
                    params.insert("lambda".into(), join(lambda.parts()));
                    (
                        "stick-lambda",
                        stick_lambda_brick_oracle(n, &lambda, budget)?,
                    )
                }
            };
            (
                format!("oracle {name}"),
                ReportResult::Count(CountResult::from(&count)),
            )
        }
        Command::Simulate(args) => {
            let lambda = partition(args.lambda.0, err)?;
            params.insert("lambda".into(), join(lambda.parts()));
            params.insert("trials".into(), args.trials.to_string());
            params.insert("seed".into(), args.seed.to_string());
            params.insert("shards".into(), args.shards.to_string());
            params.insert("confidence".into(), args.confidence.to_string());
            params.insert(
                "model".into(),
                if args.n.is_some() {
                    "discrete"
                } else {
                    "continuous"
                }
                .into(),
            );
            if let Some(n) = args.n {
                params.insert("n".into(), n.to_string());
            }
            let cfg = SimConfig::new(lambda, args.trials, args.seed)
                .with_shards(args.shards)
                .with_confidence(args.confidence);
            let estimate = match args.n {
                Some(n) => simulate_brick_lambda(n, &cfg)?,
                None => simulate_stick_lambda(&cfg)?,
            };
            if args.trace {
                trace_failures(&cfg, args.n, err)?;
            }
            (
                "simulate".to_string(),
                ReportResult::Simulation(SimResult::from(&estimate)),
            )
        }
        Command::Construct {
            sides: RealList(sides),
        } => {
            params.insert(
                "sides".into(),
                sides
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            );
            let polygon = construct_polygon(&Inventory::new(sides)?)?;
            (
                "construct".to_string(),
                ReportResult::Polygon(PolygonResult::from(&polygon)),
            )
        }
        Command::Table {
            family,
            k: IntList(k),
            n,
        } => {
            params.insert("family".into(), family.name().into());
            params.insert("k".into(), join(&k));
            let mut ks = k;
            ks.sort_unstable();
            ks.dedup();
            let ns = if family.needs_n() {
                let IntList(mut ns) = require(n, "n")?;
                params.insert("n".into(), join(&ns));
                ns.sort_unstable();
                ns.dedup();
                ns.into_iter().map(Some).collect()
            } else {
                vec![None]
            };
            let mut rows = Vec::new();
            for &k in &ks {
                for &n in &ns {
                    // Skip grid points outside a brick family's domain (n < k).
                    if family == ExactProblem::BrokenBrick && n.is_some_and(|n| n < k) {
                        continue;
                    }
                    let p = family.evaluate(n, k)?;
                    let ExactResult { value, decimal } = ExactResult::from(&p);
                    rows.push(TableRow {
                        family: family.name().into(),
                        n,
                        k,
                        value,
                        decimal,
                    });
                }
            }
            if rows.is_empty() {
                return Err(
                    Error::InvalidParams("the grid has no valid (n, k) pair".into()).into(),
                );
            }
            (
                "table".to_string(),
                ReportResult::Table(TableResult { rows }),
            )
        }
        Command::Convergence {
            family,
            k,
            n: IntList(n),
        } => {
            let (name, family) = match family {
                LimitFamily::Broken => ("broken", Family::Broken),
                LimitFamily::Pickup => ("pickup", Family::Pickup),
            };
            params.insert("family".into(), name.into());
            params.insert("k".into(), k.to_string());
            params.insert("n".into(), join(&n));
            let limit = family.continuous(k)?;
            let mut rows = Vec::new();
            let mut gaps = Vec::new();
            for &n in &n {
                let p = ProblemParams::new(n, k);
                let discrete = family.discrete(p)?;
                let gap = ExactProb::from_ratio(convergence_gap_exact(p, family)?);
                rows.push(ConvergenceRow {
                    n,
                    discrete: discrete.to_string(),
                    limit: limit.to_string(),
                    gap: gap.to_string(),
                    gap_decimal: report::significant(gap.to_f64()),
                });
                gaps.push(gap);
            }
            let zero = ExactProb::new(0, 1);
            let decreasing = gaps.iter().all(|g| *g > zero) && gaps.windows(2).all(|w| w[1] < w[0]);
            (
                "convergence".to_string(),
                ReportResult::Convergence(ConvergenceResult {
                    family: name.into(),
                    k,
                    rows,
                    decreasing,
                }),
            )
        }
    };
    Ok(Outcome {
        command,
        params,
        result,
    })
}

/// Parse `argv` (program name first), run the command and write the report.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return 0;
                }
                _ => 2,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };

    let started = Instant::now();
    let outcome = match execute(cli.command, err) {
        Ok(outcome) => outcome,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
            return 2;
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    let report = RunReport {
        command: outcome.command,
        params: outcome.params,
        result: outcome.result,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    };

    let written = match &cli.output {
        Some(path) => File::create(path).and_then(|mut f| report.write(cli.format, &mut f)),
        None => report.write(cli.format, out),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write report: {e}");
        return 1;
    }
    0
}
