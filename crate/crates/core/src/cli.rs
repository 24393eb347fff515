//! Command-line front end.
//!
//! `divsum sigma|gseq|tk` dump one sequence as `n,value` rows,
//! `divsum verify` checks a recurrence over a range, `divsum scan` checks a
//! congruence, and `divsum bench` times three independent routes to σ at
//! odd arguments.
//!
//! Exit codes: 0 on success, 1 when a verify/scan/bench found a mismatch
//! (the report is still written), 2 on usage or resource errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::congruences::{scan_blocks, ScanKind, ScanReport};
use crate::divisor::SigmaTable;
use crate::qseries::t_k_table;
use crate::recurrences::{sigma_odd_via_div1, Identity, RecurrenceReport, Tables, Verifier};

/// Range length between progress lines on the error stream.
pub const PROGRESS_BLOCK: u64 = 100_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Plain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Task {
    Sigma {
        limit: u64,
    },
    Gseq {
        limit: u64,
    },
    Tk {
        k: u32,
        limit: u64,
    },
    Verify {
        identity: Identity,
        lo: u64,
        hi: u64,
        k: u32,
    },
    Scan {
        kind: ScanKind,
        lo: u64,
        hi: u64,
    },
    Bench {
        limit: u64,
    },
}

/// A validated command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub task: Task,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub threads: usize,
}

#[derive(Debug, Parser)]
#[command(
    name = "divsum",
    version,
    about = "Sum-of-divisors recurrences and congruence scans"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv, global = true)]
    format: OutputFormat,

    /// Write output to PATH instead of stdout
    #[arg(long, value_name = "PATH", global = true)]
    out: Option<PathBuf>,

    /// Worker threads for verify and scan
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..), global = true)]
    threads: u16,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump n, σ(n) for 1 ≤ n ≤ limit
    Sigma {
        #[arg(long)]
        limit: u64,
    },
    /// Dump n, g(n) = σ(n) − 4σ(n/2) for 1 ≤ n ≤ limit
    Gseq {
        #[arg(long)]
        limit: u64,
    },
    /// Dump n, t_k(n) for 0 ≤ n ≤ limit
    Tk {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        #[arg(long)]
        limit: u64,
    },
    /// Check a recurrence at every n in [lo, hi]
    Verify {
        #[arg(long, value_enum)]
        identity: Identity,
        #[arg(long, default_value_t = 1)]
        lo: u64,
        #[arg(long)]
        hi: u64,
        /// Number of triangular summands for `--identity tk`
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
    },
    /// Scan a congruence over [lo, hi]
    Scan {
        #[arg(long, value_enum)]
        kind: ScanKind,
        #[arg(long)]
        lo: Option<u64>,
        #[arg(long)]
        hi: u64,
    },
    /// Time sieve, recurrence and ψ^4 routes to σ(2n+1) for n ≤ limit
    Bench {
        #[arg(long, default_value_t = 10_000)]
        limit: u64,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Includes `--help` and `--version`, which are not failures.
    Clap(clap::Error),
    Invalid(String),
}

impl CliError {
    /// Prints the message and returns the process exit code.
    pub fn report(&self) -> i32 {
        match self {
            CliError::Clap(e) => {
                let _ = e.print();
                if e.use_stderr() {
                    EXIT_ERROR
                } else {
                    EXIT_OK
                }
            }
            CliError::Invalid(msg) => {
                eprintln!("error: {msg}");
                EXIT_ERROR
            }
        }
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    let need_positive = |what: &str, v: u64| {
        if v == 0 {
            Err(CliError::Invalid(format!("--{what} must be at least 1")))
        } else {
            Ok(())
        }
    };
    let check_range = |lo: u64, hi: u64| {
        if lo > hi {
            Err(CliError::Invalid(format!("--lo {lo} exceeds --hi {hi}")))
        } else {
            Ok(())
        }
    };
    let task = match cli.command {
        Command::Sigma { limit } => {
            need_positive("limit", limit)?;
            Task::Sigma { limit }
        }
        Command::Gseq { limit } => {
            need_positive("limit", limit)?;
            Task::Gseq { limit }
        }
        Command::Tk { k, limit } => Task::Tk { k, limit },
        Command::Verify {
            identity,
            lo,
            hi,
            k,
        } => {
            need_positive("lo", lo)?;
            check_range(lo, hi)?;
            Task::Verify {
                identity,
                lo,
                hi,
                k,
            }
        }
        Command::Scan { kind, lo, hi } => {
            let lo = lo.unwrap_or(1);
            if lo < kind.min_n() {
                return Err(CliError::Invalid(format!(
                    "--lo must be at least {} for {kind}",
                    kind.min_n()
                )));
            }
            check_range(lo, hi)?;
            Task::Scan { kind, lo, hi }
        }
        Command::Bench { limit } => {
            need_positive("limit", limit)?;
            Task::Bench { limit }
        }
    };
    Ok(RunConfig {
        task,
        format: cli.format,
        out: cli.out,
        threads: usize::from(cli.threads),
    })
}

type BoxError = Box<dyn std::error::Error>;

fn verdict(passed: bool) -> i32 {
    if passed {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    }
}

/// Runs `config`, writing data to `--out` (or `out`) and diagnostics to `err`.
pub fn run_with(config: &RunConfig, out: &mut dyn Write, err: &mut (dyn Write + Send)) -> i32 {
    let result = match &config.out {
        Some(path) => File::create(path)
            .map_err(|e| format!("cannot create {}: {e}", path.display()).into())
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                let code = dispatch(config, &mut w, err)?;
                w.flush()?;
                Ok(code)
            }),
        None => dispatch(config, out, err).and_then(|code| {
            out.flush()?;
            Ok(code)
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

/// Runs `config` against the process's stdout and stderr.
pub fn run(config: &RunConfig) -> i32 {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut err = io::stderr();
    run_with(config, &mut out, &mut err)
}

fn dispatch(
    config: &RunConfig,
    out: &mut dyn Write,
    err: &mut (dyn Write + Send),
) -> Result<i32, BoxError> {
    match config.task {
        Task::Sigma { limit } => {
            let table = SigmaTable::build(limit)?;
            let rows = (1..=limit).map(|n| (n, table.sigma(n).to_string()));
            write_dump(out, config.format, "sigma", rows)?;
            Ok(EXIT_OK)
        }
        Task::Gseq { limit } => {
            let table = SigmaTable::build(limit)?;
            let rows = (1..=limit).map(|n| (n, table.g(n).to_string()));
            write_dump(out, config.format, "g", rows)?;
            Ok(EXIT_OK)
        }
        Task::Tk { k, limit } => {
            let limit = usize::try_from(limit)?;
            let tk = t_k_table(k, limit)?;
            let rows = tk
                .counts()
                .iter()
                .enumerate()
                .map(|(n, c)| (n as u64, c.to_string()));
            write_dump(out, config.format, &format!("t{k}"), rows)?;
            Ok(EXIT_OK)
        }
        Task::Verify {
            identity,
            lo,
            hi,
            k,
        } => {
            let report = verify(identity, lo, hi, k, config.threads, err)?;
            write_verify(out, config.format, &report)?;
            writeln!(
                err,
                "{}: checked {} values of n in [{}, {}], {} failures",
                report.identity,
                report.checked_count,
                report.lo,
                report.hi,
                report.failures.len()
            )?;
            Ok(verdict(report.passed()))
        }
        Task::Scan { kind, lo, hi } => {
            let table = SigmaTable::build(kind.sigma_limit(hi))?;
            let report = with_progress(err, &format!("scan {kind}"), lo, hi, |progress| {
                scan_blocks(
                    kind,
                    lo,
                    hi,
                    &table,
                    PROGRESS_BLOCK,
                    config.threads,
                    progress,
                )
            })?;
            write_scan(out, config.format, &report)?;
            writeln!(
                err,
                "{}: checked {} values of n in [{}, {}], {} excluded by hypothesis, {} violations, excluded residues {:?}",
                report.kind,
                report.checked,
                report.lo,
                report.hi,
                report.hypothesis_excluded,
                report.violations.len(),
                report.residue_histogram
            )?;
            Ok(verdict(report.passed()))
        }
        Task::Bench { limit } => bench(out, config.format, limit),
    }
}

fn verify(
    identity: Identity,
    lo: u64,
    hi: u64,
    k: u32,
    threads: usize,
    err: &mut (dyn Write + Send),
) -> Result<RecurrenceReport, BoxError> {
    let label = format!("verify {identity}");
    if identity == Identity::TkRec {
        let tk = t_k_table(k, usize::try_from(hi)?)?;
        let verifier = Verifier::new(identity, hi, Tables::Tk(&tk))?;
        return Ok(with_progress(err, &label, lo, hi, |p| {
            verifier.run_blocks(lo, hi, PROGRESS_BLOCK, threads, p)
        })?);
    }
    let table = SigmaTable::build(identity.sigma_limit(hi))?;
    let verifier = Verifier::new(identity, hi, Tables::Sigma(&table))?;
    Ok(with_progress(err, &label, lo, hi, |p| {
        verifier.run_blocks(lo, hi, PROGRESS_BLOCK, threads, p)
    })?)
}

/// Calls `work` with a progress callback that reports finished blocks on
/// `err`, but only when the range spans more than one block.
fn with_progress<R>(
    err: &mut (dyn Write + Send),
    label: &str,
    lo: u64,
    hi: u64,
    work: impl FnOnce(&(dyn Fn(u64) + Sync)) -> R,
) -> R {
    let noisy = hi - lo >= PROGRESS_BLOCK;
    let sink = Mutex::new(err);
    let progress = |done: u64| {
        if noisy {
            if let Ok(mut e) = sink.lock() {
                let _ = writeln!(e, "{label}: finished block ending at n = {done} of {hi}");
            }
        }
    };
    work(&progress)
}

#[derive(Serialize)]
struct DumpRow {
    n: u64,
    value: Box<RawValue>,
}

fn write_dump(
    out: &mut dyn Write,
    format: OutputFormat,
    column: &str,
    rows: impl Iterator<Item = (u64, String)>,
) -> Result<(), BoxError> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["n", column])?;
            for (n, v) in rows {
                w.write_record([n.to_string(), v])?;
            }
            w.flush()?;
        }
        OutputFormat::Plain => {
            for (n, v) in rows {
                writeln!(out, "{n} {v}")?;
            }
        }
        OutputFormat::Json => {
            let rows = rows
                .map(|(n, v)| {
                    Ok(DumpRow {
                        n,
                        value: RawValue::from_string(v)?,
                    })
                })
                .collect::<Result<Vec<_>, serde_json::Error>>()?;
            serde_json::to_writer(&mut *out, &rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn write_verify(
    out: &mut dyn Write,
    format: OutputFormat,
    report: &RecurrenceReport,
) -> Result<(), BoxError> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["identity", "n", "lhs", "rhs", "residual"])?;
            for f in &report.failures {
                w.write_record([
                    report.identity.name().to_string(),
                    f.n.to_string(),
                    f.lhs.to_string(),
                    f.rhs.to_string(),
                    f.residual.to_string(),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)?;
        }
        OutputFormat::Plain => {
            writeln!(
                out,
                "{} n=[{}, {}] checked={} failures={} {}",
                report.identity,
                report.lo,
                report.hi,
                report.checked_count,
                report.failures.len(),
                if report.passed() { "PASS" } else { "FAIL" }
            )?;
            for f in &report.failures {
                writeln!(
                    out,
                    "  n={} lhs={} rhs={} residual={}",
                    f.n, f.lhs, f.rhs, f.residual
                )?;
            }
        }
    }
    Ok(())
}

fn write_scan(
    out: &mut dyn Write,
    format: OutputFormat,
    report: &ScanReport,
) -> Result<(), BoxError> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["kind", "n", "sum", "residue"])?;
            for v in &report.violations {
                w.write_record([
                    report.kind.name().to_string(),
                    v.n.to_string(),
                    v.sum.to_string(),
                    v.residue.to_string(),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)?;
        }
        OutputFormat::Plain => {
            writeln!(
                out,
                "{} n=[{}, {}] checked={} excluded={} violations={} {}",
                report.kind,
                report.lo,
                report.hi,
                report.checked,
                report.hypothesis_excluded,
                report.violations.len(),
                if report.passed() { "PASS" } else { "FAIL" }
            )?;
            for (residue, count) in &report.residue_histogram {
                writeln!(out, "  excluded residue {residue}: {count}")?;
            }
            for v in &report.violations {
                writeln!(out, "  n={} sum={} residue={}", v.n, v.sum, v.residue)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    method: &'static str,
    entries: u64,
    seconds: f64,
    agrees: bool,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

/// Times three routes to σ(2n+1), 0 ≤ n ≤ limit, and checks they agree.
fn bench(out: &mut dyn Write, format: OutputFormat, limit: u64) -> Result<i32, BoxError> {
    let (sieve, sieve_time) = timed(|| {
        SigmaTable::build(2 * limit + 1)
            .map(|t| (0..=limit).map(|n| t.sigma(2 * n + 1)).collect::<Vec<_>>())
    });
    let sieve = sieve?;
    let (recurrence, recurrence_time) = timed(|| sigma_odd_via_div1(limit));
    let recurrence = recurrence?;
    let (theta, theta_time) = timed(|| {
        t_k_table(4, limit as usize).map(|tk| {
            tk.counts()
                .iter()
                .map(|c| u64::try_from(c).unwrap_or(u64::MAX))
                .collect::<Vec<_>>()
        })
    });
    let theta = theta?;

    let entries = limit + 1;
    let rows = [
        BenchRow {
            method: "sieve",
            entries,
            seconds: sieve_time.as_secs_f64(),
            agrees: true,
        },
        BenchRow {
            method: "div1-recurrence",
            entries,
            seconds: recurrence_time.as_secs_f64(),
            agrees: recurrence == sieve,
        },
        BenchRow {
            method: "psi4-coefficients",
            entries,
            seconds: theta_time.as_secs_f64(),
            agrees: theta == sieve,
        },
    ];

    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["method", "entries", "seconds", "agrees"])?;
            for r in &rows {
                w.write_record([
                    r.method.to_string(),
                    r.entries.to_string(),
                    format!("{:.6}", r.seconds),
                    r.agrees.to_string(),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
        OutputFormat::Plain => {
            writeln!(out, "σ(2n+1) for 0 ≤ n ≤ {limit}")?;
            writeln!(
                out,
                "{:<20} {:>10} {:>12} {:>8}",
                "method", "entries", "seconds", "agrees"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{:<20} {:>10} {:>12.6} {:>8}",
                    r.method, r.entries, r.seconds, r.agrees
                )?;
            }
        }
    }
    Ok(verdict(rows.iter().all(|r| r.agrees)))
}
