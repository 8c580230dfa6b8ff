//! `sqltm` — templatize SQL queries, profile their structure, and analyze
//! workload-level template statistics.
//!
//! Subcommands:
//! - `templatize` / `profile` / `match`: single-query operations against one
//!   database catalog.
//! - `ingest`: build hard/soft template inventories from a JSONL corpus.
//! - `analyze`: full pipeline — ingest plus every corpus statistic, written
//!   as CSV/JSON artifacts.
//! - `coverage` / `fit`: statistics over a saved inventory.
//! - `convert`: map Spider-style datasets into this tool's formats.
//!
//! Every flag with an `SQLTM_*` environment variable listed in `--help` can
//! be set through it; the flag wins when both are given. Exit codes are
//! stable for scripting: 0 success, 1 usage error, 2 data error, 3 internal
//! error.

mod convert;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sqltm::complexity;
use sqltm::corpus::{self, CorpusError};
use sqltm::lexer::LexError;
use sqltm::report::{self, AnalysisConfig};
use sqltm::schema::{CatalogSet, SchemaCatalog, SchemaError};
use sqltm::stats::{self, FitAxes, GofReport, PowerLawFit, StatsError};
use sqltm::template::{templatize, TemplateError, TemplateLevel};

#[derive(Parser)]
#[command(
    name = "sqltm",
    version,
    about = "SQL template mining: hard/soft templatization, complexity proxies, and workload statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a query's hard and soft templates, one per line.
    Templatize(TemplatizeArgs),
    /// Print a query's six structural complexity proxies as JSON.
    Profile(ProfileArgs),
    /// Build hard and soft template inventories from a JSONL corpus.
    Ingest(IngestArgs),
    /// Ingest a corpus and write the full statistical report.
    Analyze(AnalyzeArgs),
    /// Print the coverage table for a saved inventory.
    Coverage(CoverageArgs),
    /// Fit a log-log line to a saved inventory's frequency spectrum.
    Fit(FitArgs),
    /// Look a query's template up in a saved inventory.
    Match(MatchArgs),
    /// Convert Spider-style tables.json + query files into JSONL + catalogs.
    Convert(convert::ConvertArgs),
}

/// SQL given inline or as a file; exactly one source is required.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct QueryInput {
    /// SQL text to process.
    #[arg(long)]
    sql: Option<String>,
    /// Path to a file containing the SQL text.
    #[arg(long)]
    file: Option<PathBuf>,
}

impl QueryInput {
    fn read(&self) -> Result<String, CliError> {
        match (&self.sql, &self.file) {
            (Some(sql), None) => Ok(sql.clone()),
            (None, Some(path)) => std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display()))),
            _ => Err(CliError::Usage("give exactly one of --sql or --file".into())),
        }
    }
}

#[derive(Args)]
struct CatalogArgs {
    /// Catalog JSON file (one object or an array) or a directory of *.json.
    #[arg(long, env = "SQLTM_CATALOG")]
    catalog: PathBuf,
    /// Which database to resolve against when the catalog holds several.
    #[arg(long, env = "SQLTM_DB")]
    db: Option<String>,
}

impl CatalogArgs {
    fn load_one(&self) -> Result<SchemaCatalog, CliError> {
        let set = CatalogSet::load(&self.catalog)?;
        let catalog = match &self.db {
            Some(id) => set
                .get(id)
                .ok_or_else(|| CliError::Data(format!("no catalog for db_id '{id}'")))?,
            None if set.len() == 1 => set.iter().next().expect("len checked"),
            None => {
                return Err(CliError::Usage(format!(
                    "--db is required: the catalog file holds {} databases",
                    set.len()
                )))
            }
        };
        Ok(catalog.clone())
    }
}

#[derive(Args)]
struct TemplatizeArgs {
    #[command(flatten)]
    query: QueryInput,
    #[command(flatten)]
    catalog: CatalogArgs,
    /// Print only one template level instead of both.
    #[arg(long, env = "SQLTM_LEVEL")]
    level: Option<TemplateLevel>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    query: QueryInput,
    #[command(flatten)]
    catalog: CatalogArgs,
}

#[derive(Args)]
struct IngestArgs {
    /// JSONL corpus: one {"db_id","sql",...} record per line.
    #[arg(long, env = "SQLTM_RECORDS")]
    records: PathBuf,
    /// Catalog JSON file or directory covering the corpus's databases.
    #[arg(long, env = "SQLTM_CATALOG")]
    catalog: PathBuf,
    /// Drop duplicate (db_id, sql) records before templatizing.
    #[arg(long, env = "SQLTM_DEDUP")]
    dedup: bool,
    /// Directory for inventory_hard.json, inventory_soft.json, failures.jsonl.
    #[arg(long, env = "SQLTM_OUT")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// JSONL corpus: one {"db_id","sql",...} record per line.
    #[arg(long, env = "SQLTM_RECORDS")]
    records: PathBuf,
    /// Catalog JSON file or directory covering the corpus's databases.
    #[arg(long, env = "SQLTM_CATALOG")]
    catalog: PathBuf,
    /// Drop duplicate (db_id, sql) records before templatizing.
    #[arg(long, env = "SQLTM_DEDUP")]
    dedup: bool,
    /// Moving-average window over per-table-count means.
    #[arg(long, env = "SQLTM_WINDOW", default_value_t = 15)]
    window: usize,
    /// Coverage targets as percentages.
    #[arg(
        long,
        env = "SQLTM_TARGETS",
        value_delimiter = ',',
        default_value = "10,30,50,70,90,100"
    )]
    targets: Vec<f64>,
    /// Seed for the bootstrap goodness-of-fit resampler.
    #[arg(long, env = "SQLTM_SEED", default_value_t = 42)]
    seed: u64,
    /// Bootstrap resamples for the goodness-of-fit test; 0 skips it.
    #[arg(long, env = "SQLTM_RESAMPLES", default_value_t = 1000)]
    resamples: usize,
    /// Points the log-log line is fitted through.
    #[arg(long, env = "SQLTM_FIT_AXES", value_parser = parse_fit_axes,
          default_value = "rank-frequency")]
    fit_axes: FitAxes,
    /// Output directory for the report artifacts.
    #[arg(long, env = "SQLTM_OUT")]
    out: PathBuf,
}

#[derive(Args)]
struct CoverageArgs {
    /// Saved inventory JSON (from `ingest`).
    #[arg(long, env = "SQLTM_INVENTORY")]
    inventory: PathBuf,
    /// Coverage targets as percentages.
    #[arg(
        long,
        env = "SQLTM_TARGETS",
        value_delimiter = ',',
        default_value = "10,30,50,70,90,100"
    )]
    targets: Vec<f64>,
    /// Write CSV here instead of stdout.
    #[arg(long, env = "SQLTM_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Saved inventory JSON (from `ingest`).
    #[arg(long, env = "SQLTM_INVENTORY")]
    inventory: PathBuf,
    /// Bootstrap resamples for the goodness-of-fit test; 0 skips it.
    #[arg(long, env = "SQLTM_RESAMPLES", default_value_t = 0)]
    resamples: usize,
    /// Seed for the bootstrap goodness-of-fit resampler.
    #[arg(long, env = "SQLTM_SEED", default_value_t = 42)]
    seed: u64,
    /// Points the log-log line is fitted through.
    #[arg(long, env = "SQLTM_FIT_AXES", value_parser = parse_fit_axes,
          default_value = "rank-frequency")]
    fit_axes: FitAxes,
    /// Write JSON here instead of stdout.
    #[arg(long, env = "SQLTM_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    query: QueryInput,
    #[command(flatten)]
    catalog: CatalogArgs,
    /// Saved inventory JSON (from `ingest`); its level decides which
    /// template is looked up.
    #[arg(long, env = "SQLTM_INVENTORY")]
    inventory: PathBuf,
}

fn parse_fit_axes(s: &str) -> Result<FitAxes, String> {
    match s.replace('_', "-").to_ascii_lowercase().as_str() {
        "rank-frequency" => Ok(FitAxes::RankFrequency),
        "frequency-of-frequency" => Ok(FitAxes::FrequencyOfFrequency),
        other => Err(format!(
            "unknown fit axes '{other}' (expected rank-frequency or frequency-of-frequency)"
        )),
    }
}

/// Failure classification behind the stable exit-code contract.
#[derive(Debug)]
enum CliError {
    /// Bad flags or flag values: exit 1.
    Usage(String),
    /// Bad input data or filesystem trouble: exit 2.
    Data(String),
    /// A bug on this side of the contract: exit 3.
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Data(msg) => write!(f, "{msg}"),
            CliError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl From<LexError> for CliError {
    fn from(e: LexError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TemplateError> for CliError {
    fn from(e: TemplateError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::BadTarget(_) | StatsError::BadWindow | StatsError::ZeroResamples => {
                CliError::Usage(e.to_string())
            }
            StatsError::UnknownProxy(_) => CliError::Internal(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<report::ReportError> for CliError {
    fn from(e: report::ReportError) -> Self {
        match e {
            report::ReportError::Json(inner) => CliError::Internal(inner.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sqltm: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Templatize(args) => cmd_templatize(args),
        Command::Profile(args) => cmd_profile(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Coverage(args) => cmd_coverage(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Match(args) => cmd_match(args),
        Command::Convert(args) => convert::cmd_convert(args),
    }
}

fn cmd_templatize(args: TemplatizeArgs) -> Result<(), CliError> {
    let sql = args.query.read()?;
    let catalog = args.catalog.load_one()?;
    let (hard, soft) = templatize(&sql, &catalog)?;
    for warning in hard.warnings.iter().chain(&soft.warnings) {
        eprintln!("warning: {warning}");
    }
    match args.level {
        None => {
            println!("{}", hard.canonical());
            println!("{}", soft.canonical());
        }
        Some(TemplateLevel::Hard) => println!("{}", hard.canonical()),
        Some(TemplateLevel::Soft) => println!("{}", soft.canonical()),
    }
    Ok(())
}

fn cmd_profile(args: ProfileArgs) -> Result<(), CliError> {
    let sql = args.query.read()?;
    let catalog = args.catalog.load_one()?;
    let profile = complexity::profile(&sql, &catalog)?;
    let json = serde_json::to_string(&profile)
        .map_err(|e| CliError::Internal(format!("profile serialization: {e}")))?;
    println!("{json}");
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> Result<(), CliError> {
    let outcome = corpus::ingest(&args.records, &args.catalog, args.dedup)?;
    std::fs::create_dir_all(&args.out)?;
    let hard_path = args.out.join("inventory_hard.json");
    let soft_path = args.out.join("inventory_soft.json");
    corpus::save_inventory(&outcome.hard, &hard_path)?;
    if let Err(e) = corpus::save_inventory(&outcome.soft, &soft_path) {
        let _ = std::fs::remove_file(&hard_path);
        return Err(e.into());
    }
    if !outcome.failures.is_empty() {
        let mut lines = String::new();
        for failure in &outcome.failures {
            lines.push_str(
                &serde_json::to_string(failure)
                    .map_err(|e| CliError::Internal(format!("failure serialization: {e}")))?,
            );
            lines.push('\n');
        }
        std::fs::write(args.out.join("failures.jsonl"), lines)?;
    }
    println!(
        "queries: {}, failures: {}, hard templates: {}, soft templates: {}",
        outcome.hard.total_queries,
        outcome.failures.len(),
        outcome.hard.len(),
        outcome.soft.len()
    );
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let catalogs = CatalogSet::load(&args.catalog)?;
    let outcome = corpus::ingest_with_catalogs(&args.records, &catalogs, args.dedup)?;
    let config = AnalysisConfig {
        window: args.window,
        targets: args.targets,
        seed: args.seed,
        resamples: args.resamples,
        dedup: args.dedup,
        fit_axes: args.fit_axes,
    };
    let report = report::analyze(&outcome, &catalogs.table_counts(), &config)?;
    report::write_report(&report, &args.out)?;
    println!(
        "queries: {}, failures: {}, hard templates: {}, soft templates: {}, report: {}",
        report.records_ingested,
        report.failures.len(),
        report.hard.spectrum.total_templates,
        report.soft.spectrum.total_templates,
        args.out.display()
    );
    Ok(())
}

fn cmd_coverage(args: CoverageArgs) -> Result<(), CliError> {
    let inventory = corpus::load_inventory(&args.inventory)?;
    let table = stats::coverage_table(&inventory, &args.targets)?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["target_pct", "templates_needed", "template_pct", "queries_covered"])
        .and_then(|_| {
            table.iter().try_for_each(|point| {
                writer.write_record([
                    point.target_pct.to_string(),
                    point.templates_needed.to_string(),
                    point.template_pct.to_string(),
                    point.queries_covered.to_string(),
                ])
            })
        })
        .map_err(|e| CliError::Internal(format!("coverage CSV: {e}")))?;
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Internal(format!("coverage CSV: {e}")))?;
    write_text_output(args.out.as_deref(), &bytes)
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct FitOutput {
        axes: FitAxes,
        fit: PowerLawFit,
        gof: Option<GofReport>,
    }

    let inventory = corpus::load_inventory(&args.inventory)?;
    let spectrum = stats::spectrum(&inventory)?;
    let mut fit = stats::fit_loglog_axes(&spectrum, args.fit_axes)?;
    let gof = if args.resamples > 0 {
        let report = stats::gof_bootstrap(&spectrum, args.resamples, args.seed)?;
        fit.gof_p_value = Some(report.p_value);
        fit.bootstrap_n = Some(report.resamples);
        Some(report)
    } else {
        None
    };
    let doc = FitOutput { axes: args.fit_axes, fit, gof };
    let mut json = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Internal(format!("fit serialization: {e}")))?;
    json.push('\n');
    write_text_output(args.out.as_deref(), json.as_bytes())
}

fn cmd_match(args: MatchArgs) -> Result<(), CliError> {
    let sql = args.query.read()?;
    let catalog = args.catalog.load_one()?;
    let inventory = corpus::load_inventory(&args.inventory)?;
    let result = corpus::match_query(&sql, &catalog, &inventory)?;
    let json = serde_json::to_string(&result)
        .map_err(|e| CliError::Internal(format!("match serialization: {e}")))?;
    println!("{json}");
    Ok(())
}

fn write_text_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}
