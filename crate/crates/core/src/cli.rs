//! Command-line front end. `main` only forwards to [`run`].
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 verification failure,
//! 3 events not ordered.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::chain::{verify_snapshot, ChainId, NetworkSnapshot};
use crate::io::report::{
    to_json, CertificateReport, MetricsReport, OrderBody, OrderReport, VerifyReport,
};
use crate::io::{self, LoadError, LoadOptions};
use crate::order::{
    build_dag, build_dag_unchecked, canonical_order, count_linear_extensions, granularity,
    linear_extensions, mainstream_score, order_certificate, Certificate, Enumeration, EventId,
    HappensBeforeDag, HeightWindow, OrderError, OrderRelation, DEFAULT_COUNT_BOUND,
};
use crate::sim;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_ORDERED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hashorder",
    version,
    about = "Order events across cross-referencing hash chains"
)]
struct Cli {
    /// Override the seed of a simulation config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress and notes on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Skip verification when loading a snapshot.
    #[arg(long, global = true)]
    no_verify: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation and write its snapshot and trace.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_snapshot: PathBuf,
        #[arg(long)]
        out_trace: PathBuf,
    },
    /// Check every hash link and reference in a snapshot.
    Verify { snapshot: PathBuf },
    /// Print admissible total orders of the snapshot's events.
    Order {
        snapshot: PathBuf,
        #[command(flatten)]
        mode: OrderMode,
        /// Maximum number of orders to print with --enumerate.
        #[arg(long, default_value_t = 100, requires = "enumerate")]
        limit: usize,
    },
    /// Granularity, comparability and mainstream scores.
    Metrics {
        snapshot: PathBuf,
        /// Restrict mainstream counting to `chain:start..end` (repeatable).
        #[arg(long = "window", value_name = "CHAIN:START..END")]
        windows: Vec<String>,
    },
    /// Show a reference path proving that one event precedes another.
    Certify {
        snapshot: PathBuf,
        #[arg(long, value_name = "CHAIN:HEIGHT")]
        from: EventId,
        #[arg(long, value_name = "CHAIN:HEIGHT")]
        to: EventId,
    },
    /// Write the happens-before graph in Graphviz format.
    ExportDot {
        snapshot: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(multiple = false)]
struct OrderMode {
    /// The deterministic canonical order (default).
    #[arg(long)]
    canonical: bool,
    /// Every admissible order, up to --limit.
    #[arg(long)]
    enumerate: bool,
    /// The exact number of admissible orders.
    #[arg(long)]
    count: bool,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        let code = match e {
            LoadError::InvalidSnapshot(_) => EXIT_INVALID,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<OrderError> for Failure {
    fn from(e: OrderError) -> Self {
        let code = match e {
            OrderError::InvalidSnapshot(_) | OrderError::CyclicReferences(_) => EXIT_INVALID,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<sim::SimError> for Failure {
    fn from(e: sim::SimError) -> Self {
        Self::usage(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::usage(format!("stdout: {e}")))
}

fn load(cli: &Cli, path: &Path) -> Result<NetworkSnapshot, Failure> {
    let bytes = read(path)?;
    Ok(io::load_snapshot(
        &bytes,
        LoadOptions {
            verify: !cli.no_verify,
        },
    )?)
}

fn load_dag(cli: &Cli, path: &Path) -> Result<(NetworkSnapshot, HappensBeforeDag), Failure> {
    let snapshot = load(cli, path)?;
    let dag = if cli.no_verify {
        build_dag_unchecked(&snapshot)?
    } else {
        build_dag(&snapshot)?
    };
    Ok((snapshot, dag))
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let json = cli.format == Format::Json;
    match &cli.command {
        Command::Simulate {
            config,
            out_snapshot,
            out_trace,
        } => {
            let mut config = io::load_config(&read(config)?)?;
            if let Some(seed) = cli.seed {
                config.seed = seed;
            }
            let ticks = config.ticks;
            let quiet = cli.quiet;
            let (snapshot, trace) = sim::run_with_progress(&config, |tick| {
                if !quiet && (tick + 1) % 100 == 0 {
                    let _ = writeln!(err, "tick {}/{ticks}", tick + 1);
                }
            })?;
            write(out_snapshot, &io::save_snapshot(&snapshot))?;
            write(out_trace, &io::save_trace(&trace))?;
            if !cli.quiet {
                let _ = writeln!(
                    err,
                    "simulated {} chains, {} blocks, {} trace events",
                    snapshot.chains.len(),
                    snapshot.block_count(),
                    trace.0.len()
                );
            }
            Ok(EXIT_OK)
        }
        Command::Verify { snapshot } => {
            let snapshot = io::load_snapshot(&read(snapshot)?, LoadOptions { verify: false })?;
            let violations = verify_snapshot(&snapshot);
            if json {
                emit(out, &to_json(&VerifyReport::new(&violations)))?;
            } else if violations.is_empty() {
                emit(
                    out,
                    &format!("ok: {} blocks verified\n", snapshot.block_count()),
                )?;
            } else {
                let mut text = String::new();
                for v in &violations {
                    text.push_str(&format!("{v}\n"));
                }
                text.push_str(&format!("{} violation(s)\n", violations.len()));
                emit(out, &text)?;
            }
            Ok(if violations.is_empty() {
                EXIT_OK
            } else {
                EXIT_INVALID
            })
        }
        Command::Order {
            snapshot,
            mode,
            limit,
        } => {
            let (_, dag) = load_dag(cli, snapshot)?;
            let body = if mode.enumerate {
                let result = linear_extensions(&dag, *limit);
                let (complete, found) = match &result {
                    Enumeration::Complete(all) => (true, all.len()),
                    Enumeration::Overflow { found, .. } | Enumeration::Cancelled { found, .. } => {
                        (false, *found)
                    }
                };
                if !complete && !cli.quiet {
                    let _ = writeln!(
                        err,
                        "note: more than {limit} orders exist; showing the first {limit}"
                    );
                }
                OrderBody::Enumerate {
                    limit: *limit,
                    complete,
                    found,
                    extensions: result.extensions().to_vec(),
                }
            } else if mode.count {
                OrderBody::Count {
                    count: count_linear_extensions(&dag)?.to_string(),
                }
            } else {
                OrderBody::Canonical {
                    extension: canonical_order(&dag),
                }
            };
            if json {
                emit(out, &to_json(&OrderReport::new(body)))?;
            } else {
                let text = match body {
                    OrderBody::Canonical { extension } => format!("{extension}\n"),
                    OrderBody::Enumerate { extensions, .. } => {
                        extensions.iter().map(|e| format!("{e}\n")).collect()
                    }
                    OrderBody::Count { count } => format!("{count}\n"),
                };
                emit(out, &text)?;
            }
            Ok(EXIT_OK)
        }
        Command::Metrics { snapshot, windows } => {
            let (snapshot, dag) = load_dag(cli, snapshot)?;
            let windows = parse_windows(windows)?;
            let scores = mainstream_score(&dag, windows.as_ref())?;
            let report = granularity(&snapshot, &dag);
            let count = (dag.len() <= DEFAULT_COUNT_BOUND)
                .then(|| count_linear_extensions(&dag).map(|c| c.to_string()))
                .transpose()?;
            let doc = MetricsReport::new(dag.len(), &report, &scores, count);
            if json {
                emit(out, &to_json(&doc))?;
            } else {
                emit(out, &metrics_text(&doc))?;
            }
            Ok(EXIT_OK)
        }
        Command::Certify { snapshot, from, to } => {
            let (_, dag) = load_dag(cli, snapshot)?;
            let relation = dag.precedes(from, to)?;
            let path = match order_certificate(&dag, from, to)? {
                Certificate::Path(p) => Some(p),
                Certificate::NotOrdered => None,
            };
            let ordered = path.is_some();
            if json {
                let doc =
                    CertificateReport::new(from.clone(), to.clone(), relation.to_string(), path);
                emit(out, &to_json(&doc))?;
            } else if let Some(path) = path {
                let hops: Vec<String> = path.iter().map(ToString::to_string).collect();
                emit(out, &format!("{}\n", hops.join(" -> ")))?;
            } else if relation == OrderRelation::Concurrent {
                emit(out, "concurrent\n")?;
            } else {
                emit(out, &format!("not ordered: {from} is {relation} {to}\n"))?;
            }
            Ok(if ordered { EXIT_OK } else { EXIT_NOT_ORDERED })
        }
        Command::ExportDot {
            snapshot,
            out: path,
        } => {
            let (_, dag) = load_dag(cli, snapshot)?;
            write(path, io::export_dot(&dag).as_bytes())?;
            if !cli.quiet {
                let _ = writeln!(err, "wrote {} nodes to {}", dag.len(), path.display());
            }
            Ok(EXIT_OK)
        }
    }
}

fn parse_windows(specs: &[String]) -> Result<Option<BTreeMap<ChainId, HeightWindow>>, Failure> {
    if specs.is_empty() {
        return Ok(None);
    }
    let mut windows = BTreeMap::new();
    for spec in specs {
        let bad = || {
            Failure::usage(format!(
                "invalid window {spec:?}, expected CHAIN:START..END"
            ))
        };
        let (chain, range) = spec.rsplit_once(':').ok_or_else(bad)?;
        let (start, end) = range.split_once("..").ok_or_else(bad)?;
        let chain = ChainId::new(chain).map_err(|_| bad())?;
        let window = HeightWindow {
            start: start.parse().map_err(|_| bad())?,
            end: end.parse().map_err(|_| bad())?,
        };
        if windows.insert(chain, window).is_some() {
            return Err(bad());
        }
    }
    Ok(Some(windows))
}

fn metrics_text(doc: &MetricsReport) -> String {
    let g = &doc.granularity;
    let r = &g.comparability_ratio;
    let mut text = format!(
        "events: {}\ncomparability: {}/{} ({:.4})\n",
        doc.events, r.numerator, r.denominator, r.decimal
    );
    if let Some(count) = &doc.linear_extension_count {
        text.push_str(&format!("admissible orders: {count}\n"));
    }
    text.push_str("chain\tblocks\tmean_interval\tmax_interval\tmainstream\n");
    for (c, s) in g.per_chain.iter().zip(&doc.mainstream) {
        let mean = c
            .mean_interval
            .as_ref()
            .map_or("-".to_owned(), |m| format!("{:.3}", m.decimal));
        let max = c.max_interval.map_or("-".to_owned(), |m| m.to_string());
        text.push_str(&format!(
            "{}\t{}\t{mean}\t{max}\t{}\n",
            c.chain, c.block_count, s.score
        ));
    }
    text
}
