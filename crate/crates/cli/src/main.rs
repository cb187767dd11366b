// SPDX-License-Identifier: MIT OR Apache-2.0

//! `lmcusum`: test a series for a change in mean, run size/power experiments,
//! and query the limit law.
//!
//! Exit status: 0 ran, 1 output could not be written, 2 usage error, 3 data error.

mod config;
mod input;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lmcusum::montecarlo::{self, ExperimentConfig, SeriesDesign, TableFormat};
use lmcusum::{absolute_transform, compute_returns, lm_test, null_estimates, Series};
use serde::Serialize;

use input::Selector;

/// p-values below this are reported as underflowed.
const P_FLOOR: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Output(_) => 1,
            Self::Usage(_) => 2,
            Self::Data(_) => 3,
        }
    }
}

impl From<lmcusum::Error> for CliError {
    fn from(e: lmcusum::Error) -> Self {
        use lmcusum::Error as E;
        match e {
            E::Domain(_) | E::InvalidSpec(_) | E::InvalidConfig(_) => Self::Usage(e.to_string()),
            E::InsufficientData { .. } | E::NonFinite { .. } | E::NonPositivePrice { .. } | E::DegenerateSeries => {
                Self::Data(e.to_string())
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lmcusum", version, about = "Sup-CUSUM test for a change in the mean of a heteroskedastic series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Prices or other positive levels; log returns are tested.
    Levels,
    /// Values are tested as given.
    Returns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test one column of a delimited text file (`-` reads standard input).
    Test {
        file: PathBuf,
        /// Column name or 1-based position.
        #[arg(long)]
        column: Option<Selector>,
        /// Column echoed next to the break, e.g. dates.
        #[arg(long)]
        date_column: Option<Selector>,
        #[arg(long, value_enum, default_value = "returns")]
        kind: Kind,
        /// Test absolute values.
        #[arg(long = "abs")]
        absolute: bool,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Rejection frequencies over seeded replications.
    Simulate {
        /// Preset designs 1-9, comma separated.
        #[arg(long, value_delimiter = ',')]
        series: Vec<u8>,
        /// All nine presets.
        #[arg(long)]
        all: bool,
        /// Sample sizes [default: 30,100,500,1000].
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Significance levels [default: 0.01,0.05,0.1].
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        /// Replications per cell [default: 1000].
        #[arg(long)]
        reps: Option<usize>,
        /// Master seed [default: 1].
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads [default: available parallelism].
        #[arg(long)]
        workers: Option<usize>,
        /// csv, json or text [default: text].
        #[arg(long)]
        format: Option<TableFormat>,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// TOML file with the same keys; flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Quantile of the limit law.
    Quantile {
        #[arg(allow_hyphen_values = true)]
        p: f64,
    },
    /// Asymptotic p-value of a statistic.
    Pvalue {
        #[arg(allow_hyphen_values = true)]
        z: f64,
    },
}

#[derive(Debug, Serialize)]
struct TestReport {
    column: String,
    kind: &'static str,
    absolute: bool,
    n: usize,
    mu_hat: f64,
    sigma2_hat: f64,
    statistic: f64,
    p_value: f64,
    underflow: bool,
    /// Observations before the estimated break.
    break_index: usize,
    /// Source line of the last observation before the break.
    break_line: u64,
    break_date: Option<String>,
    alpha: f64,
    reject: bool,
}

fn run_test(
    file: &std::path::Path,
    column: Option<&Selector>,
    date_column: Option<&Selector>,
    kind: Kind,
    absolute: bool,
    alpha: f64,
) -> Result<TestReport, CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {alpha}")));
    }
    let text = input::read_source(file)?;
    let col = input::load_column(&text, column, date_column)?;
    let raw = Series::new(col.values.clone())?;
    // observation i of the tested series sits on source row `offset + i`
    let (series, offset) = match kind {
        Kind::Returns => (raw, 0),
        Kind::Levels => match compute_returns(&raw) {
            Ok(r) => (r, 1),
            Err(lmcusum::Error::NonPositivePrice { index, value }) => {
                return Err(CliError::Data(format!(
                    "levels must be positive; line {} of column `{}` holds {value}",
                    col.lines[index], col.name
                )))
            }
            Err(e) => return Err(e.into()),
        },
    };
    let series = if absolute { absolute_transform(&series) } else { series };
    let estimates = null_estimates(&series)?;
    let outcome = lm_test(&series, alpha)?;
    let last_before = (offset + outcome.break_index).saturating_sub(1);
    let underflow = outcome.p_value < P_FLOOR;
    Ok(TestReport {
        column: col.name,
        kind: match kind {
            Kind::Levels => "levels",
            Kind::Returns => "returns",
        },
        absolute,
        n: series.len(),
        mu_hat: estimates.mu_hat,
        sigma2_hat: estimates.sigma2_hat,
        statistic: outcome.statistic,
        p_value: if underflow { 0.0 } else { outcome.p_value },
        underflow,
        break_index: outcome.break_index,
        break_line: col.lines[last_before],
        break_date: col.dates.map(|d| d[last_before].clone()),
        alpha,
        reject: outcome.reject,
    })
}

fn render_test(report: &TestReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Text => {
            let p = if report.underflow {
                format!("< {P_FLOOR:e}")
            } else {
                report.p_value.to_string()
            };
            let series = match (report.kind, report.absolute) {
                ("levels", false) => format!("log returns of `{}`", report.column),
                ("levels", true) => format!("absolute log returns of `{}`", report.column),
                (_, false) => format!("`{}`", report.column),
                (_, true) => format!("absolute values of `{}`", report.column),
            };
            let date = report
                .break_date
                .as_ref()
                .map_or_else(String::new, |d| format!(", {d}"));
            format!(
                "Change-in-mean test on {series}\n\
                 n            {}\n\
                 mean         {}\n\
                 variance     {}\n\
                 statistic    {}\n\
                 p-value      {p}\n\
                 break after  observation {} (line {}{date})\n\
                 decision     {} at alpha = {}\n",
                report.n,
                report.mu_hat,
                report.sigma2_hat,
                report.statistic,
                report.break_index,
                report.break_line,
                if report.reject { "reject constant mean" } else { "do not reject" },
                report.alpha,
            )
        }
    }
}

struct SimulateArgs {
    series: Vec<u8>,
    all: bool,
    n: Vec<usize>,
    alpha: Vec<f64>,
    reps: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    format: Option<TableFormat>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
}

fn or_file<T>(flag: Vec<T>, file: Option<Vec<T>>, default: &[T]) -> Vec<T>
where
    T: Clone,
{
    if !flag.is_empty() {
        flag
    } else {
        file.unwrap_or_else(|| default.to_vec())
    }
}

fn run_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let file = match &args.config {
        Some(path) => config::load(path)?,
        None => config::FileConfig::default(),
    };
    let all = args.all || file.all.unwrap_or(false);
    let mut series: Vec<SeriesDesign> = if all {
        (1..=9).map(SeriesDesign::Preset).collect()
    } else {
        or_file(args.series, file.series, &[])
            .into_iter()
            .map(SeriesDesign::Preset)
            .collect()
    };
    for custom in &file.custom {
        series.push(custom.design()?);
    }
    if series.is_empty() {
        return Err(CliError::Usage(
            "no series selected; use --series, --all or a config file".into(),
        ));
    }
    let format = match (args.format, &file.format) {
        (Some(f), _) => f,
        (None, Some(f)) => f.parse()?,
        (None, None) => TableFormat::Text,
    };
    let experiment = ExperimentConfig {
        series,
        sample_sizes: or_file(args.n, file.n, &montecarlo::PAPER_SAMPLE_SIZES),
        levels: or_file(args.alpha, file.alpha, &montecarlo::PAPER_LEVELS),
        replications: args.reps.or(file.reps).unwrap_or(montecarlo::PAPER_REPLICATIONS),
        master_seed: args.seed.or(file.seed).unwrap_or(1),
        workers: args.workers.or(file.workers).unwrap_or_else(montecarlo::default_workers),
    };
    let table = montecarlo::run_experiment(&experiment)?;
    for cell in table.invalid_cells() {
        eprintln!(
            "warning: series {} n={} alpha={}: {} of {} replications were degenerate; cell is invalid",
            cell.series, cell.n, cell.alpha, cell.degenerate, cell.replications
        );
    }
    let document = montecarlo::emit_table(&table, format);
    match args.out.or(file.out) {
        Some(path) => std::fs::write(&path, document)
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display()))),
        None => write_stdout(&document),
    }
}

fn write_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|e| CliError::Output(format!("cannot write output: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Test {
            file,
            column,
            date_column,
            kind,
            absolute,
            alpha,
            format,
        } => {
            let report = run_test(&file, column.as_ref(), date_column.as_ref(), kind, absolute, alpha)?;
            write_stdout(&render_test(&report, format))
        }
        Command::Simulate {
            series,
            all,
            n,
            alpha,
            reps,
            seed,
            workers,
            format,
            out,
            config,
        } => run_simulate(SimulateArgs {
            series,
            all,
            n,
            alpha,
            reps,
            seed,
            workers,
            format,
            out,
            config,
        }),
        Command::Quantile { p } => {
            let z = lmcusum::bridge_sup_quantile(p)?;
            write_stdout(&format!("{z:.7}\n"))
        }
        Command::Pvalue { z } => {
            let p = lmcusum::p_value(z)?;
            write_stdout(&format!("{p:.7}\n"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lmcusum: {e}");
            ExitCode::from(e.code())
        }
    }
}
