//! Analysis orchestration and artifact emission.
//!
//! [`analyze`] bundles every corpus statistic into one [`AnalysisReport`];
//! [`write_report`] lays it out as fixed-schema CSV files plus `fit.json`
//! and `summary.json` in an output directory. Output is deterministic:
//! the same ingest outcome, configuration, and seed serialize to identical
//! bytes. On a write failure every file created by the failed run is
//! removed, so downstream consumers never see a half-written report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::complexity::ComplexityProfile;
use crate::corpus::{IngestFailure, IngestOutcome};
use crate::stats::{
    self, CoveragePoint, FitAxes, FrequencySpectrum, GofReport, MovingAverageCurve, PowerLawFit,
    ProxyGroupRow, SpearmanResult, StatsError, SummaryRow,
};
use crate::template::TemplateLevel;

/// Bumped whenever an artifact's columns change.
pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub window: usize,
    pub targets: Vec<f64>,
    pub seed: u64,
    pub resamples: usize,
    pub dedup: bool,
    pub fit_axes: FitAxes,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            window: 15,
            targets: vec![10.0, 30.0, 50.0, 70.0, 90.0, 100.0],
            seed: 42,
            resamples: 1000,
            dedup: false,
            fit_axes: FitAxes::RankFrequency,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub level: TemplateLevel,
    pub spectrum: FrequencySpectrum,
    pub coverage: Vec<CoveragePoint>,
    /// None when the spectrum is too small to fit.
    pub fit: Option<PowerLawFit>,
    pub gof: Option<GofReport>,
    pub proxy_by_group: Vec<ProxyGroupRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub config: AnalysisConfig,
    pub records_ingested: u64,
    pub failures: Vec<IngestFailure>,
    pub hard: LevelReport,
    pub soft: LevelReport,
    /// One Spearman test per proxy over (table count, mean proxy) pairs.
    pub spearman: Vec<(String, Option<SpearmanResult>)>,
    pub moving_averages: Vec<MovingAverageCurve>,
    pub summary: Vec<SummaryRow>,
}

fn level_report(
    level: TemplateLevel,
    inventory: &crate::corpus::TemplateInventory,
    config: &AnalysisConfig,
) -> Result<LevelReport, StatsError> {
    let spectrum = stats::spectrum(inventory)?;
    let coverage = stats::coverage_table(inventory, &config.targets)?;
    let fit = match stats::fit_loglog_axes(&spectrum, config.fit_axes) {
        Ok(fit) => Some(fit),
        Err(StatsError::DegenerateSpectrum) => None,
        Err(e) => return Err(e),
    };
    let gof = if config.resamples > 0 {
        match stats::gof_bootstrap(&spectrum, config.resamples, config.seed) {
            Ok(report) => Some(report),
            Err(StatsError::DegenerateSpectrum) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let fit = fit.map(|mut f| {
        if let Some(g) = &gof {
            f.gof_p_value = Some(g.p_value);
            f.bootstrap_n = Some(g.resamples);
        }
        f
    });
    let proxy_by_group = stats::proxy_by_group(inventory)?;
    Ok(LevelReport { level, spectrum, coverage, fit, gof, proxy_by_group })
}

/// Compute every corpus statistic from an ingest outcome.
pub fn analyze(
    outcome: &IngestOutcome,
    table_counts: &BTreeMap<String, u32>,
    config: &AnalysisConfig,
) -> Result<AnalysisReport, StatsError> {
    let hard = level_report(TemplateLevel::Hard, &outcome.hard, config)?;
    let soft = level_report(TemplateLevel::Soft, &outcome.soft, config)?;

    let mut spearman = Vec::with_capacity(6);
    let mut moving_averages = Vec::with_capacity(6);
    for proxy in ComplexityProfile::FIELD_NAMES {
        let curve = match stats::moving_average(&outcome.profiles, table_counts, proxy, config.window)
        {
            Ok(curve) => curve,
            Err(StatsError::EmptyInput) => continue,
            Err(e) => return Err(e),
        };
        let pairs: Vec<(f64, f64)> = curve
            .x
            .iter()
            .zip(&curve.y_raw)
            .map(|(&x, &y)| (x as f64, y))
            .collect();
        let result = match stats::spearman(&pairs) {
            Ok(r) => Some(r),
            Err(StatsError::TooFewPairs) | Err(StatsError::EmptyInput) => None,
            Err(e) => return Err(e),
        };
        spearman.push((proxy.to_string(), result));
        moving_averages.push(curve);
    }

    let profiles: Vec<ComplexityProfile> = outcome.profiles.iter().map(|p| p.profile).collect();
    let summary = stats::summary_stats(&profiles)?;

    Ok(AnalysisReport {
        config: config.clone(),
        records_ingested: outcome.profiles.len() as u64,
        failures: outcome.failures.clone(),
        hard,
        soft,
        spearman,
        moving_averages,
        summary,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Fixed column orders for every CSV artifact, recorded in summary.json.
fn csv_headers() -> BTreeMap<&'static str, Vec<&'static str>> {
    let mut headers = BTreeMap::new();
    headers.insert(
        "spectrum.csv",
        vec!["level", "group", "templates", "template_pct", "queries"],
    );
    headers.insert(
        "coverage.csv",
        vec!["level", "target_pct", "templates_needed", "template_pct", "queries_covered"],
    );
    headers.insert("loglog.csv", vec!["level", "rank", "count"]);
    headers.insert("spearman.csv", vec!["proxy", "n", "rho", "p_value"]);
    headers.insert(
        "moving_avg_<proxy>.csv",
        vec!["table_count", "y_raw", "y_smooth"],
    );
    let mut group_cols = vec!["level", "group", "queries"];
    group_cols.extend(ComplexityProfile::FIELD_NAMES);
    headers.insert("proxy_by_group.csv", group_cols);
    headers
}

struct ArtifactWriter {
    out_dir: PathBuf,
    created: Vec<PathBuf>,
}

impl ArtifactWriter {
    fn new(out_dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(out_dir)?;
        Ok(ArtifactWriter { out_dir: out_dir.to_path_buf(), created: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let path = self.out_dir.join(name);
        self.created.push(path.clone());
        path
    }

    fn cleanup(&self) {
        for path in &self.created {
            let _ = std::fs::remove_file(path);
        }
    }
}

/// Write all report artifacts into `out_dir`. Any error removes the files
/// this call created.
pub fn write_report(report: &AnalysisReport, out_dir: &Path) -> Result<(), ReportError> {
    let mut writer = ArtifactWriter::new(out_dir)?;
    match write_report_inner(report, &mut writer) {
        Ok(()) => Ok(()),
        Err(e) => {
            writer.cleanup();
            Err(e)
        }
    }
}

fn write_report_inner(
    report: &AnalysisReport,
    files: &mut ArtifactWriter,
) -> Result<(), ReportError> {
    // spectrum.csv
    let mut w = csv::Writer::from_path(files.path("spectrum.csv"))?;
    w.write_record(csv_headers()["spectrum.csv"].iter())?;
    for level in [&report.hard, &report.soft] {
        for g in &level.spectrum.groups {
            w.write_record([
                level.level.as_str().to_string(),
                g.group.label().to_string(),
                g.templates.to_string(),
                g.template_pct.to_string(),
                g.queries.to_string(),
            ])?;
        }
    }
    w.flush()?;

    // coverage.csv
    let mut w = csv::Writer::from_path(files.path("coverage.csv"))?;
    w.write_record(csv_headers()["coverage.csv"].iter())?;
    for level in [&report.hard, &report.soft] {
        for c in &level.coverage {
            w.write_record([
                level.level.as_str().to_string(),
                c.target_pct.to_string(),
                c.templates_needed.to_string(),
                c.template_pct.to_string(),
                c.queries_covered.to_string(),
            ])?;
        }
    }
    w.flush()?;

    // loglog.csv — the rank/frequency points both fits run over
    let mut w = csv::Writer::from_path(files.path("loglog.csv"))?;
    w.write_record(csv_headers()["loglog.csv"].iter())?;
    for level in [&report.hard, &report.soft] {
        for (i, &count) in level.spectrum.sorted_counts.iter().enumerate() {
            w.write_record([
                level.level.as_str().to_string(),
                (i + 1).to_string(),
                count.to_string(),
            ])?;
        }
    }
    w.flush()?;

    // fit.json
    #[derive(Serialize)]
    struct FitDoc<'a> {
        axes: FitAxes,
        hard: &'a Option<PowerLawFit>,
        soft: &'a Option<PowerLawFit>,
        hard_gof: &'a Option<GofReport>,
        soft_gof: &'a Option<GofReport>,
    }
    let fit_doc = FitDoc {
        axes: report.config.fit_axes,
        hard: &report.hard.fit,
        soft: &report.soft.fit,
        hard_gof: &report.hard.gof,
        soft_gof: &report.soft.gof,
    };
    std::fs::write(
        files.path("fit.json"),
        format!("{}\n", serde_json::to_string_pretty(&fit_doc)?),
    )?;

    // spearman.csv
    let mut w = csv::Writer::from_path(files.path("spearman.csv"))?;
    w.write_record(csv_headers()["spearman.csv"].iter())?;
    for (proxy, result) in &report.spearman {
        match result {
            Some(r) => w.write_record([
                proxy.clone(),
                r.n.to_string(),
                r.rho.to_string(),
                r.p_value.to_string(),
            ])?,
            None => w.write_record([proxy.clone(), String::new(), String::new(), String::new()])?,
        }
    }
    w.flush()?;

    // moving_avg_<proxy>.csv
    for curve in &report.moving_averages {
        let mut w = csv::Writer::from_path(files.path(&format!("moving_avg_{}.csv", curve.proxy)))?;
        w.write_record(csv_headers()["moving_avg_<proxy>.csv"].iter())?;
        for i in 0..curve.x.len() {
            w.write_record([
                curve.x[i].to_string(),
                curve.y_raw[i].to_string(),
                curve.y_smooth[i].to_string(),
            ])?;
        }
        w.flush()?;
    }

    // proxy_by_group.csv
    let mut w = csv::Writer::from_path(files.path("proxy_by_group.csv"))?;
    w.write_record(csv_headers()["proxy_by_group.csv"].iter())?;
    for level in [&report.hard, &report.soft] {
        for row in &level.proxy_by_group {
            let mut record = vec![
                level.level.as_str().to_string(),
                row.group.label().to_string(),
                row.queries.to_string(),
            ];
            record.extend(
                row.means.iter().map(|m| m.map(|v| v.to_string()).unwrap_or_default()),
            );
            w.write_record(record)?;
        }
    }
    w.flush()?;

    // failures.jsonl (only when something failed)
    if !report.failures.is_empty() {
        let mut lines = String::new();
        for failure in &report.failures {
            lines.push_str(&serde_json::to_string(failure)?);
            lines.push('\n');
        }
        std::fs::write(files.path("failures.jsonl"), lines)?;
    }

    // summary.json
    #[derive(Serialize)]
    struct SummaryDoc<'a> {
        format_version: u32,
        config: &'a AnalysisConfig,
        records_ingested: u64,
        failure_count: usize,
        hard_templates: u64,
        soft_templates: u64,
        total_queries: u64,
        summary_stats: &'a [SummaryRow],
        breaking_points: Vec<(String, u32, f64)>,
        csv_headers: BTreeMap<&'static str, Vec<&'static str>>,
    }
    let summary_doc = SummaryDoc {
        format_version: REPORT_FORMAT_VERSION,
        config: &report.config,
        records_ingested: report.records_ingested,
        failure_count: report.failures.len(),
        hard_templates: report.hard.spectrum.total_templates,
        soft_templates: report.soft.spectrum.total_templates,
        total_queries: report.hard.spectrum.total_queries,
        summary_stats: &report.summary,
        breaking_points: report
            .moving_averages
            .iter()
            .map(|c| (c.proxy.clone(), c.breaking_point, c.peak_value))
            .collect(),
        csv_headers: csv_headers(),
    };
    std::fs::write(
        files.path("summary.json"),
        format!("{}\n", serde_json::to_string_pretty(&summary_doc)?),
    )?;

    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest_records, QueryRecord};
    use crate::schema::{CatalogSet, SchemaCatalog};

    fn corpus() -> (IngestOutcome, BTreeMap<String, u32>) {
        let tables: indexmap::IndexMap<String, Vec<String>> = [
            ("employees", vec!["id", "name", "salary", "dept_id"]),
            ("departments", vec!["id", "name"]),
        ]
        .into_iter()
        .map(|(t, cols)| (t.to_string(), cols.into_iter().map(String::from).collect()))
        .collect();
        let mut set = CatalogSet::new();
        set.insert(SchemaCatalog::new("hr", tables).unwrap());

        let sqls = [
            "SELECT COUNT(*) FROM employees",
            "SELECT COUNT(*) FROM departments",
            "SELECT name FROM employees",
            "SELECT name FROM employees WHERE salary > 10",
            "SELECT name FROM employees WHERE salary > 20",
            "SELECT e.name FROM employees e JOIN departments d ON e.dept_id = d.id",
            "SELECT dept_id, COUNT(*) FROM employees GROUP BY dept_id",
        ];
        let records: Vec<QueryRecord> = sqls
            .iter()
            .map(|sql| QueryRecord {
                db_id: "hr".into(),
                nlq: String::new(),
                sql: sql.to_string(),
                source: "fixture".into(),
                difficulty: None,
            })
            .collect();
        let outcome = ingest_records(records, &set, false).unwrap();
        (outcome, set.table_counts())
    }

    fn small_config() -> AnalysisConfig {
        AnalysisConfig { resamples: 0, ..Default::default() }
    }

    #[test]
    fn analyze_produces_all_sections() {
        let (outcome, table_counts) = corpus();
        let report = analyze(&outcome, &table_counts, &small_config()).unwrap();
        assert_eq!(report.records_ingested, 7);
        assert_eq!(report.summary.len(), 6);
        assert_eq!(report.hard.spectrum.total_queries, 7);
        assert!(report.hard.spectrum.total_templates >= report.soft.spectrum.total_templates);
        // single table-count group → no spearman, but curves exist
        assert_eq!(report.moving_averages.len(), 6);
        assert!(report.spearman.iter().all(|(_, r)| r.is_none()));
    }

    #[test]
    fn written_artifacts_exist_and_parse() {
        let (outcome, table_counts) = corpus();
        let report = analyze(&outcome, &table_counts, &small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_report(&report, dir.path()).unwrap();

        for name in ["spectrum.csv", "coverage.csv", "loglog.csv", "spearman.csv", "proxy_by_group.csv"]
        {
            let path = dir.path().join(name);
            assert!(path.exists(), "{name} missing");
            let mut reader = csv::Reader::from_path(&path).unwrap();
            assert!(reader.records().all(|r| r.is_ok()), "{name} unparseable");
        }
        for proxy in ComplexityProfile::FIELD_NAMES {
            assert!(dir.path().join(format!("moving_avg_{proxy}.csv")).exists());
        }
        let fit: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit.json")).unwrap())
                .unwrap();
        assert!(fit.get("axes").is_some());
        let summary: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("summary.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(summary["format_version"], 1);
        assert_eq!(summary["records_ingested"], 7);
        // no failures → no failures.jsonl
        assert!(!dir.path().join("failures.jsonl").exists());
    }

    #[test]
    fn repeated_runs_are_byte_identical() {
        let (outcome, table_counts) = corpus();
        let config = small_config();
        let report = analyze(&outcome, &table_counts, &config).unwrap();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        write_report(&report, dir_a.path()).unwrap();
        let report_again = analyze(&outcome, &table_counts, &config).unwrap();
        write_report(&report_again, dir_b.path()).unwrap();

        let mut names: Vec<_> = std::fs::read_dir(dir_a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let a = std::fs::read(dir_a.path().join(&name)).unwrap();
            let b = std::fs::read(dir_b.path().join(&name)).unwrap();
            assert_eq!(a, b, "artifact {name:?} differs between runs");
        }
    }

    #[test]
    fn failures_artifact_written() {
        let (mut outcome, table_counts) = corpus();
        outcome.failures.push(IngestFailure {
            line: 9,
            db_id: Some("hr".into()),
            reason: "lex error: synthetic".into(),
        });
        let report = analyze(&outcome, &table_counts, &small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_report(&report, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("failures.jsonl")).unwrap();
        assert_eq!(text.lines().count(), 1);
        let parsed: IngestFailure = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(parsed.line, 9);
    }
}
