// SPDX-License-Identifier: MIT OR Apache-2.0

//! Size and power experiments.
//!
//! The nine reference designs cross three mean dynamics with three volatility
//! dynamics:
//!
//! | mean \ σ        | constant 1 | step 0.5→1.5 at 2/3 | logistic 0.5→1.5 at 2/3 |
//! |-----------------|-----------:|--------------------:|------------------------:|
//! | constant 1      | 1          | 2                   | 3                       |
//! | step 1→2 at 1/2 | 4          | 5                   | 6                       |
//! | logistic 1→2    | 7          | 8                   | 9                       |
//!
//! All logistic transitions use slope 20.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cusum::{cusum_path, Series};
use crate::dist;
use crate::error::{Error, Result};
use crate::signals::{self, MeanSpec, SigmaSpec, TransitionSpec};

pub const PAPER_SAMPLE_SIZES: [usize; 4] = [30, 100, 500, 1000];
pub const PAPER_LEVELS: [f64; 3] = [0.01, 0.05, 0.10];
pub const PAPER_REPLICATIONS: usize = 1000;

const MEAN_BREAK: f64 = 0.5;
const SIGMA_BREAK: f64 = 2.0 / 3.0;
const SLOPE: f64 = 20.0;

/// Mean and volatility specification of reference design `series_id` (1..=9).
pub fn preset(series_id: u8) -> Result<(MeanSpec, SigmaSpec)> {
    if !(1..=9).contains(&series_id) {
        return Err(Error::InvalidConfig(format!(
            "series preset must be in 1..=9, got {series_id}"
        )));
    }
    let index = series_id - 1;
    let mean = match index / 3 {
        0 => MeanSpec::Constant { mu: 1.0 },
        1 => MeanSpec::Step {
            levels: vec![1.0, 2.0],
            fractions: vec![MEAN_BREAK],
        },
        _ => MeanSpec::Smooth {
            mu1: 1.0,
            mu2: 2.0,
            transition: TransitionSpec::logistic(MEAN_BREAK, SLOPE)?,
        },
    };
    let sigma = match index % 3 {
        0 => SigmaSpec::Constant { sigma: 1.0 },
        1 => SigmaSpec::Step {
            levels: vec![0.5, 1.5],
            fractions: vec![SIGMA_BREAK],
        },
        _ => SigmaSpec::Smooth {
            sigma1: 0.5,
            sigma2: 1.5,
            transition: TransitionSpec::logistic(SIGMA_BREAK, SLOPE)?,
        },
    };
    Ok((mean, sigma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesDesign {
    Preset(u8),
    Custom {
        label: String,
        mean: MeanSpec,
        sigma: SigmaSpec,
    },
}

impl SeriesDesign {
    pub fn label(&self) -> String {
        match self {
            Self::Preset(id) => id.to_string(),
            Self::Custom { label, .. } => label.clone(),
        }
    }

    pub fn specs(&self) -> Result<(MeanSpec, SigmaSpec)> {
        match self {
            Self::Preset(id) => preset(*id),
            Self::Custom { mean, sigma, .. } => Ok((mean.clone(), sigma.clone())),
        }
    }

    fn seed_code(&self, position: usize) -> u64 {
        match self {
            Self::Preset(id) => u64::from(*id),
            Self::Custom { .. } => 1_000 + position as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub series: Vec<SeriesDesign>,
    pub sample_sizes: Vec<usize>,
    pub levels: Vec<f64>,
    pub replications: usize,
    pub master_seed: u64,
    pub workers: usize,
}

impl ExperimentConfig {
    /// The full 9-series grid.
    pub fn paper_grid(master_seed: u64) -> Self {
        Self {
            series: (1..=9).map(SeriesDesign::Preset).collect(),
            sample_sizes: PAPER_SAMPLE_SIZES.to_vec(),
            levels: PAPER_LEVELS.to_vec(),
            replications: PAPER_REPLICATIONS,
            master_seed,
            workers: default_workers(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        if let Some(n) = self.sample_sizes.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidConfig(format!("sample sizes must be at least 2, got {n}")));
        }
        if let Some(a) = self.levels.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::InvalidConfig(format!("levels must lie in (0, 1), got {a}")));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "levels must be strictly ascending, got {:?}",
                self.levels
            )));
        }
        for design in &self.series {
            let (mean, sigma) = design.specs()?;
            mean.validate()?;
            sigma.validate()?;
        }
        Ok(())
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub series: String,
    pub n: usize,
    pub alpha: f64,
    pub rejections: usize,
    pub replications: usize,
    pub frequency: f64,
    /// Replications whose statistic was undefined; a nonzero count invalidates the cell.
    pub degenerate: usize,
}

impl Cell {
    pub fn is_valid(&self) -> bool {
        self.degenerate == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionTable {
    pub master_seed: u64,
    pub replications: usize,
    pub cells: Vec<Cell>,
}

impl RejectionTable {
    pub fn get(&self, series: &str, n: usize, alpha: f64) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.series == series && c.n == n && c.alpha == alpha)
    }

    pub fn invalid_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| !c.is_valid())
    }
}

/// Seed of replication `r` of design `series_code` at sample size `n`.
pub fn replication_seed(master_seed: u64, series_code: u64, n: usize, replication: usize) -> u64 {
    signals::derive_seed(master_seed, &[series_code, n as u64, replication as u64])
}

/// Simulated sup-statistics, `None` where the statistic is undefined.
pub fn simulate_statistics(
    mean: &MeanSpec,
    sigma: &SigmaSpec,
    n: usize,
    replications: usize,
    seed_of: impl Fn(usize) -> u64 + Sync,
) -> Result<Vec<Option<f64>>> {
    let mu = signals::mean_path(mean, n)?;
    let sd = signals::sigma_path(sigma, n)?;
    Ok((0..replications)
        .into_par_iter()
        .map(|r| {
            let y = Series::new(signals::synthesize(&mu, &sd, seed_of(r))).ok()?;
            Some(cusum_path(&y).ok()?.sup_abs().0)
        })
        .collect())
}

/// Asymptotic p-values of simulated series, `None` where the statistic is undefined.
pub fn simulate_p_values(
    mean: &MeanSpec,
    sigma: &SigmaSpec,
    n: usize,
    replications: usize,
    seed_of: impl Fn(usize) -> u64 + Sync,
) -> Result<Vec<Option<f64>>> {
    let stats = simulate_statistics(mean, sigma, n, replications, seed_of)?;
    Ok(stats
        .into_iter()
        .map(|s| s.and_then(|z| dist::p_value(z).ok()))
        .collect())
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RejectionTable> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;

    let mut cells = Vec::with_capacity(config.series.len() * config.sample_sizes.len() * config.levels.len());
    for (position, design) in config.series.iter().enumerate() {
        let (mean, sigma) = design.specs()?;
        let code = design.seed_code(position);
        let label = design.label();
        for &n in &config.sample_sizes {
            let seed_of = |r| replication_seed(config.master_seed, code, n, r);
            let p_values = pool.install(|| simulate_p_values(&mean, &sigma, n, config.replications, seed_of))?;
            let degenerate = p_values.iter().filter(|p| p.is_none()).count();
            for &alpha in &config.levels {
                let rejections = p_values.iter().flatten().filter(|&&p| p < alpha).count();
                cells.push(Cell {
                    series: label.clone(),
                    n,
                    alpha,
                    rejections,
                    replications: config.replications,
                    frequency: rejections as f64 / config.replications as f64,
                    degenerate,
                });
            }
        }
    }
    Ok(RejectionTable {
        master_seed: config.master_seed,
        replications: config.replications,
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Json,
    Text,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "text" | "txt" => Ok(Self::Text),
            other => Err(Error::InvalidConfig(format!("unknown table format `{other}`"))),
        }
    }
}

pub const CSV_HEADER: &str = "series,n,alpha,rejections,replications,frequency";

pub fn emit_table(table: &RejectionTable, format: TableFormat) -> String {
    match format {
        TableFormat::Csv => emit_csv(table),
        TableFormat::Json => {
            let mut s = serde_json::to_string_pretty(table).expect("table serializes");
            s.push('\n');
            s
        }
        TableFormat::Text => emit_text(table),
    }
}

fn emit_csv(table: &RejectionTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in &table.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            c.series, c.n, c.alpha, c.rejections, c.replications, c.frequency
        );
    }
    out
}

fn percent_label(alpha: f64) -> String {
    let pct = alpha * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}%", pct.round())
    } else {
        format!("{}%", (pct * 1e6).round() / 1e6)
    }
}

fn is_size_design(series: &str) -> Option<bool> {
    series.parse::<u8>().ok().filter(|id| (1..=9).contains(id)).map(|id| id <= 3)
}

fn emit_text(table: &RejectionTable) -> String {
    let mut series_order: Vec<&str> = Vec::new();
    for c in &table.cells {
        if !series_order.contains(&c.series.as_str()) {
            series_order.push(&c.series);
        }
    }
    let sizes: Vec<&str> = series_order.iter().copied().filter(|s| is_size_design(s) == Some(true)).collect();
    let powers: Vec<&str> = series_order.iter().copied().filter(|s| is_size_design(s) == Some(false)).collect();
    let custom: Vec<&str> = series_order.iter().copied().filter(|s| is_size_design(s).is_none()).collect();

    let mut out = String::new();
    if table.cells.is_empty() {
        write_block(&mut out, table, "Rejection frequencies (in %)", &[]);
        return out;
    }
    let mut blocks = Vec::new();
    if !sizes.is_empty() {
        blocks.push(("Empirical test sizes (in %)", sizes));
    }
    if !powers.is_empty() {
        blocks.push(("Empirical test powers (in %)", powers));
    }
    if !custom.is_empty() {
        blocks.push(("Rejection frequencies (in %)", custom));
    }
    for (i, (title, members)) in blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_block(&mut out, table, title, members);
    }
    let flagged: Vec<&Cell> = table.invalid_cells().collect();
    if !flagged.is_empty() {
        out.push_str("\n* cell contains degenerate replications:\n");
        for c in flagged {
            let _ = writeln!(
                out,
                "  series {} n={} alpha={}: {} of {}",
                c.series, c.n, c.alpha, c.degenerate, c.replications
            );
        }
    }
    out
}

fn write_block(out: &mut String, table: &RejectionTable, title: &str, members: &[&str]) {
    let cells: Vec<&Cell> = table
        .cells
        .iter()
        .filter(|c| members.contains(&c.series.as_str()))
        .collect();
    let ns: Vec<usize> = cells.iter().map(|c| c.n).collect::<BTreeSet<_>>().into_iter().collect();

    let _ = writeln!(out, "{title}, {} replications", table.replications);
    let mut header = format!("{:<12}{:>6}", "series", "alpha");
    for n in &ns {
        header.push_str(&format!("{:>9}", format!("n={n}")));
    }
    let _ = writeln!(out, "{header}");

    for series in members {
        let mut alphas: Vec<f64> = cells.iter().filter(|c| c.series == *series).map(|c| c.alpha).collect();
        alphas.sort_by(f64::total_cmp);
        alphas.dedup();
        for (row, alpha) in alphas.iter().enumerate() {
            let name = if row == 0 { format!("Series {series}") } else { String::new() };
            let mut line = format!("{:<12}{:>6}", name, percent_label(*alpha));
            for &n in &ns {
                let entry = cells
                    .iter()
                    .find(|c| c.series == *series && c.n == n && c.alpha == *alpha)
                    .map_or_else(
                        || "-".to_string(),
                        |c| {
                            let flag = if c.is_valid() { "" } else { "*" };
                            format!("{:.1}{flag}", c.frequency * 100.0)
                        },
                    );
                line.push_str(&format!("{entry:>9}"));
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
    }
}
