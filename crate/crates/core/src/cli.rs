//! Command-line front end. Usage errors exit with 2 (clap's convention), any
//! failure inside the advisor with 1.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::analyzer::{build_matrix, parse_workload, ExtractionRuleSet};
use crate::catalog::{Catalog, CatalogError};
use crate::genworkload::generate_workload;
use crate::miner::{write_clusters_csv, write_itemsets_csv, DEFAULT_MINSUP, DEFAULT_TAU};
use crate::pipeline::{recommend, Analysis, PipelineError};
use crate::selector::{SelectionParams, Strategy, DEFAULT_ALPHA};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<crate::analyzer::AnalyzeError> for CliError {
    fn from(e: crate::analyzer::AnalyzeError) -> Self {
        CliError::Pipeline(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dwadvisor",
    version,
    about = "Index and materialized view advisor for star-schema warehouses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a workload and print its query-attribute matrix as CSV.
    Analyze {
        #[command(flatten)]
        input: Input,
        /// Write matrix.csv here instead of printing it.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Mine frequent itemsets and query clusters.
    Mine {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        mining: Mining,
        /// Write itemsets.csv and clusters.csv here instead of printing them.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Recommend indexes and materialized views under a storage budget.
    Recommend {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        mining: Mining,
        /// Storage budget in bytes; K, M and G suffixes are powers of 1000.
        #[arg(long, value_parser = parse_budget)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = StrategyArg::Joint)]
        strategy: StrategyArg,
        /// Share of the budget for views under mvfirst and indfirst.
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Also emit the per-round selection trace.
        #[arg(long)]
        trace: bool,
        /// Write report.json, report.txt, recommendation.sql, configuration.txt
        /// and trace.txt here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Cost every query under a configuration given as structure ids.
    Explain {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        mining: Mining,
        /// File with one structure id per line, as in configuration.txt.
        #[arg(long)]
        config: PathBuf,
        /// Write explain.txt and explain.csv here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ExplainFormat::Text)]
        format: ExplainFormat,
    },
    /// Generate a seeded synthetic workload.
    Genworkload {
        #[arg(long)]
        catalog: PathBuf,
        /// Number of queries.
        #[arg(long, short = 'n', value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct Input {
    /// Catalog JSON file.
    #[arg(long)]
    catalog: PathBuf,
    /// Workload SQL file, statements separated by `;`.
    #[arg(long)]
    workload: PathBuf,
}

#[derive(Debug, Args)]
pub struct Mining {
    /// Minimum support for frequent itemsets, in (0, 1].
    #[arg(long, default_value_t = DEFAULT_MINSUP)]
    minsup: f64,
    /// Jaccard similarity threshold for query clustering, in (0, 1].
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Joint,
    Mvfirst,
    Indfirst,
    #[value(name = "views_only", alias = "views-only")]
    ViewsOnly,
    #[value(name = "indexes_only", alias = "indexes-only")]
    IndexesOnly,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Joint => Strategy::Joint,
            StrategyArg::Mvfirst => Strategy::MvFirst,
            StrategyArg::Indfirst => Strategy::IndFirst,
            StrategyArg::ViewsOnly => Strategy::ViewsOnly,
            StrategyArg::IndexesOnly => Strategy::IndexesOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExplainFormat {
    Text,
    Csv,
    Json,
}

/// Parses `1048576`, `512K`, `1M`, `2G` (decimal multiples, optional `B`).
pub fn parse_budget(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let t = t.strip_suffix(['b', 'B']).unwrap_or(t);
    let (digits, mult) = match t.chars().last() {
        Some('k' | 'K') => (&t[..t.len() - 1], 1_000),
        Some('m' | 'M') => (&t[..t.len() - 1], 1_000_000),
        Some('g' | 'G') => (&t[..t.len() - 1], 1_000_000_000),
        _ => (t, 1),
    };
    let n: u64 = digits
        .trim()
        .parse()
        .map_err(|_| format!("invalid budget `{s}`"))?;
    let bytes = n
        .checked_mul(mult)
        .ok_or_else(|| format!("budget `{s}` overflows"))?;
    if bytes == 0 {
        return Err("budget must be positive".into());
    }
    Ok(bytes)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn emit(out_dir: Option<&Path>, name: &str, contents: &[u8]) -> Result<(), CliError> {
    match out_dir {
        Some(dir) => write_atomic(&dir.join(name), contents),
        None => io::stdout()
            .write_all(contents)
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn load(input: &Input) -> Result<(Catalog, String), CliError> {
    Ok((Catalog::load(&input.catalog)?, read(&input.workload)?))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { input, out_dir } => {
            let (catalog, sql) = load(&input)?;
            let workload = parse_workload(&sql, &catalog)?;
            let m = build_matrix(&workload, &ExtractionRuleSet::default())?;
            let mut buf = Vec::new();
            m.write_csv(&mut buf)?;
            emit(out_dir.as_deref(), "matrix.csv", &buf)
        }
        Command::Mine {
            input,
            mining,
            out_dir,
        } => {
            let (catalog, sql) = load(&input)?;
            let a = Analysis::run(&sql, &catalog, mining.minsup, mining.tau)?;
            let mut itemsets = Vec::new();
            write_itemsets_csv(&a.itemsets, &mut itemsets)?;
            let mut clusters = Vec::new();
            write_clusters_csv(&a.clusters, &mut clusters)?;
            match out_dir {
                Some(dir) => {
                    write_atomic(&dir.join("itemsets.csv"), &itemsets)?;
                    write_atomic(&dir.join("clusters.csv"), &clusters)
                }
                None => {
                    itemsets.push(b'\n');
                    itemsets.extend(clusters);
                    emit(None, "", &itemsets)
                }
            }
        }
        Command::Recommend {
            input,
            mining,
            budget,
            strategy,
            alpha,
            trace,
            out_dir,
            format,
        } => {
            let (catalog, sql) = load(&input)?;
            let a = Analysis::run(&sql, &catalog, mining.minsup, mining.tau)?;
            let params = SelectionParams {
                budget_bytes: budget,
                strategy: strategy.into(),
                alpha,
            };
            let rec = recommend(&a, &catalog, mining.minsup, mining.tau, &params)?;
            let mut json = serde_json::to_string_pretty(&rec)?;
            json.push('\n');
            let text = rec.to_text();
            if let Some(dir) = &out_dir {
                write_atomic(&dir.join("report.json"), json.as_bytes())?;
                write_atomic(&dir.join("report.txt"), text.as_bytes())?;
                write_atomic(&dir.join("recommendation.sql"), rec.ddl_text().as_bytes())?;
                write_atomic(
                    &dir.join("configuration.txt"),
                    rec.configuration_text().as_bytes(),
                )?;
                if trace {
                    write_atomic(&dir.join("trace.txt"), rec.trace_text().as_bytes())?;
                }
            }
            let mut stdout = match format {
                Format::Text => text,
                Format::Json => json,
            };
            if trace && out_dir.is_none() {
                stdout.push_str("\ntrace:\n");
                stdout.push_str(&rec.trace_text());
            }
            emit(None, "", stdout.as_bytes())
        }
        Command::Explain {
            input,
            mining,
            config,
            out_dir,
            format,
        } => {
            let (catalog, sql) = load(&input)?;
            let ids: Vec<String> = read(&config)?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from)
                .collect();
            let a = Analysis::run(&sql, &catalog, mining.minsup, mining.tau)?;
            let configuration = a.configuration_from_ids(&ids)?;
            let breakdown = a.explain(&configuration, &catalog)?;
            let text = breakdown.to_text();
            let mut csv = Vec::new();
            breakdown.write_csv(&mut csv)?;
            if let Some(dir) = &out_dir {
                write_atomic(&dir.join("explain.txt"), text.as_bytes())?;
                write_atomic(&dir.join("explain.csv"), &csv)?;
            }
            match format {
                ExplainFormat::Text => emit(None, "", text.as_bytes()),
                ExplainFormat::Csv => emit(None, "", &csv),
                ExplainFormat::Json => {
                    let mut json = serde_json::to_string_pretty(&breakdown)?;
                    json.push('\n');
                    emit(None, "", json.as_bytes())
                }
            }
        }
        Command::Genworkload {
            catalog,
            n,
            seed,
            output,
        } => {
            let catalog = Catalog::load(&catalog)?;
            let text = generate_workload(&catalog, n as usize, seed);
            match output {
                Some(path) => write_atomic(&path, text.as_bytes()),
                None => emit(None, "", text.as_bytes()),
            }
        }
    }
}

/// Parses arguments, runs, and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = format!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                let s_text = s.to_string();
                if !msg.contains(&s_text) {
                    msg.push_str(&format!(": {s_text}"));
                }
                src = s.source();
            }
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
