//! Corpus ingestion: run the templatize+profile pipeline over NLQ–SQL
//! record files and accumulate per-level template inventories.
//!
//! Records are JSONL, one object per line with keys `db_id`, `sql`, and
//! optionally `nlq`, `source`, `difficulty`. Bad rows are skipped and
//! recorded as failures; a run only fails outright when I/O breaks or every
//! row is bad. Inventories persist as a single JSON document with entries
//! sorted by descending count then canonical string, so identical corpora
//! ingested in any order serialize to identical bytes.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::classify;
use crate::complexity::{profile_classified, ComplexityProfile};
use crate::lexer::lex;
use crate::schema::CatalogSet;
use crate::template::{
    hard_template_classified, soft_template, templatize, TemplateError, TemplateLevel,
};

/// Maximum example query ids kept per inventory entry.
const MAX_EXAMPLES: usize = 5;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct QueryRecord {
    pub db_id: String,
    #[serde(default)]
    pub nlq: String,
    pub sql: String,
    #[serde(default)]
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InventoryEntry {
    pub count: u64,
    /// Per-proxy sums over all queries mapping to this template, in
    /// [`ComplexityProfile::FIELD_NAMES`] order.
    pub proxy_sums: [u64; 6],
    /// Stable content-hash ids of up to five example queries.
    pub examples: Vec<String>,
}

impl InventoryEntry {
    fn absorb(&mut self, other: &InventoryEntry) {
        self.count += other.count;
        for (a, b) in self.proxy_sums.iter_mut().zip(other.proxy_sums) {
            *a += b;
        }
        self.examples.extend(other.examples.iter().cloned());
        self.examples.sort();
        self.examples.dedup();
        self.examples.truncate(MAX_EXAMPLES);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateInventory {
    pub level: TemplateLevel,
    pub entries: std::collections::BTreeMap<String, InventoryEntry>,
    pub total_queries: u64,
}

impl TemplateInventory {
    pub fn new(level: TemplateLevel) -> Self {
        TemplateInventory { level, entries: Default::default(), total_queries: 0 }
    }

    pub fn add(&mut self, canonical: String, profile: &ComplexityProfile, example_id: &str) {
        let entry = self.entries.entry(canonical).or_default();
        entry.count += 1;
        for (sum, v) in entry.proxy_sums.iter_mut().zip(profile.as_array()) {
            *sum += v as u64;
        }
        if entry.examples.len() < MAX_EXAMPLES
            || entry.examples.last().is_some_and(|last| example_id < last.as_str())
        {
            entry.examples.push(example_id.to_string());
            entry.examples.sort();
            entry.examples.dedup();
            entry.examples.truncate(MAX_EXAMPLES);
        }
        self.total_queries += 1;
    }

    /// Counts in descending order (the frequency spectrum's raw input).
    pub fn sorted_counts(&self) -> Vec<u64> {
        let mut counts: Vec<u64> = self.entries.values().map(|e| e.count).collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        counts
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct IngestFailure {
    /// 1-based line number in the records file.
    pub line: usize,
    pub db_id: Option<String>,
    pub reason: String,
}

/// Per-record pipeline output retained for corpus-level statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordProfile {
    pub db_id: String,
    pub profile: ComplexityProfile,
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub hard: TemplateInventory,
    pub soft: TemplateInventory,
    pub profiles: Vec<RecordProfile>,
    pub failures: Vec<IngestFailure>,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("no schema catalog for db_id '{0}'")]
    MissingCatalog(String),
    #[error("inventories have different template levels")]
    LevelMismatch,
    #[error("every record failed to ingest")]
    AllRecordsFailed,
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// Stable id for a query: hex prefix of SHA-256 over db_id and SQL text.
pub fn example_id(db_id: &str, sql: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(db_id.as_bytes());
    hasher.update([0u8]);
    hasher.update(sql.as_bytes());
    let digest = hasher.finalize();
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}

struct PipelineHit {
    db_id: String,
    hard: String,
    soft: String,
    profile: ComplexityProfile,
    id: String,
}

fn run_record(line: usize, record: &QueryRecord, catalogs: &CatalogSet) -> Result<PipelineHit, IngestFailure> {
    let fail = |reason: String| IngestFailure {
        line,
        db_id: Some(record.db_id.clone()),
        reason,
    };
    let catalog = catalogs
        .get(&record.db_id)
        .ok_or_else(|| fail(format!("no schema catalog for db_id '{}'", record.db_id)))?;
    let stream = lex(&record.sql).map_err(|e| fail(format!("lex error: {e}")))?;
    let classified = classify(&stream);
    let hard = hard_template_classified(&stream, &classified, catalog);
    let soft = soft_template(&hard).map_err(|e| fail(format!("template error: {e}")))?;
    let profile = profile_classified(&stream, &classified);
    Ok(PipelineHit {
        db_id: record.db_id.clone(),
        hard: hard.canonical(),
        soft: soft.canonical(),
        profile,
        id: example_id(&record.db_id, &record.sql),
    })
}

fn ingest_indexed(
    records: Vec<(usize, QueryRecord)>,
    catalogs: &CatalogSet,
    dedup: bool,
    mut failures: Vec<IngestFailure>,
) -> Result<IngestOutcome, CorpusError> {
    let records = if dedup {
        let mut seen = BTreeSet::new();
        records
            .into_iter()
            .filter(|(_, r)| seen.insert((r.db_id.clone(), r.sql.clone())))
            .collect()
    } else {
        records
    };

    #[cfg(feature = "parallel")]
    let results: Vec<Result<PipelineHit, IngestFailure>> = {
        use rayon::prelude::*;
        records
            .par_iter()
            .map(|(line, record)| run_record(*line, record, catalogs))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<PipelineHit, IngestFailure>> = records
        .iter()
        .map(|(line, record)| run_record(*line, record, catalogs))
        .collect();

    let mut hard = TemplateInventory::new(TemplateLevel::Hard);
    let mut soft = TemplateInventory::new(TemplateLevel::Soft);
    let mut profiles = Vec::new();
    for result in results {
        match result {
            Ok(hit) => {
                hard.add(hit.hard, &hit.profile, &hit.id);
                soft.add(hit.soft, &hit.profile, &hit.id);
                profiles.push(RecordProfile { db_id: hit.db_id, profile: hit.profile });
            }
            Err(failure) => failures.push(failure),
        }
    }
    failures.sort_by_key(|f| f.line);

    if profiles.is_empty() {
        return Err(CorpusError::AllRecordsFailed);
    }
    Ok(IngestOutcome { hard, soft, profiles, failures })
}

/// Ingest an in-memory record list (line numbers are list positions).
pub fn ingest_records(
    records: Vec<QueryRecord>,
    catalogs: &CatalogSet,
    dedup: bool,
) -> Result<IngestOutcome, CorpusError> {
    let indexed = records.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect();
    ingest_indexed(indexed, catalogs, dedup, Vec::new())
}

/// Ingest a JSONL records file against a catalog file or directory.
pub fn ingest(
    records_path: impl AsRef<Path>,
    catalogs_path: impl AsRef<Path>,
    dedup: bool,
) -> Result<IngestOutcome, CorpusError> {
    let catalogs = CatalogSet::load(catalogs_path)
        .map_err(|e| CorpusError::Format(format!("catalog load failed: {e}")))?;
    ingest_with_catalogs(records_path, &catalogs, dedup)
}

/// Ingest a JSONL records file against an already-loaded catalog set.
pub fn ingest_with_catalogs(
    records_path: impl AsRef<Path>,
    catalogs: &CatalogSet,
    dedup: bool,
) -> Result<IngestOutcome, CorpusError> {
    let text = std::fs::read_to_string(records_path)?;
    ingest_jsonl_str(&text, catalogs, dedup)
}

/// Ingest JSONL text held in memory; blank lines are skipped, malformed
/// lines become per-line failures.
pub fn ingest_jsonl_str(
    jsonl: &str,
    catalogs: &CatalogSet,
    dedup: bool,
) -> Result<IngestOutcome, CorpusError> {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (i, text) in jsonl.lines().enumerate() {
        let line_no = i + 1;
        if text.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<QueryRecord>(text) {
            Ok(record) => records.push((line_no, record)),
            Err(e) => failures.push(IngestFailure {
                line: line_no,
                db_id: None,
                reason: format!("malformed JSONL: {e}"),
            }),
        }
    }
    ingest_indexed(records, catalogs, dedup, failures)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchResult {
    pub hit: bool,
    /// Dense rank by descending count; ties share a rank; 1 = most frequent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<u64>,
    pub template: String,
}

/// Templatize `sql` at the inventory's level and report membership.
pub fn match_query(
    sql: &str,
    catalog: &crate::schema::SchemaCatalog,
    inventory: &TemplateInventory,
) -> Result<MatchResult, TemplateError> {
    let (hard, soft) = templatize(sql, catalog)?;
    let canonical = match inventory.level {
        TemplateLevel::Hard => hard.canonical(),
        TemplateLevel::Soft => soft.canonical(),
    };
    match inventory.entries.get(&canonical) {
        Some(entry) => {
            let higher: BTreeSet<u64> = inventory
                .entries
                .values()
                .map(|e| e.count)
                .filter(|&c| c > entry.count)
                .collect();
            Ok(MatchResult {
                hit: true,
                rank: Some(higher.len() as u64 + 1),
                frequency: Some(entry.count),
                template: canonical,
            })
        }
        None => Ok(MatchResult { hit: false, rank: None, frequency: None, template: canonical }),
    }
}

#[derive(Serialize, Deserialize)]
struct InventoryDoc {
    level: TemplateLevel,
    total_queries: u64,
    entries: Vec<InventoryDocEntry>,
}

#[derive(Serialize, Deserialize)]
struct InventoryDocEntry {
    template: String,
    count: u64,
    proxy_sums: [u64; 6],
    examples: Vec<String>,
}

/// Serialize an inventory deterministically: entries sorted by descending
/// count, then lexicographic template string.
pub fn save_inventory(inv: &TemplateInventory, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let mut entries: Vec<InventoryDocEntry> = inv
        .entries
        .iter()
        .map(|(template, e)| InventoryDocEntry {
            template: template.clone(),
            count: e.count,
            proxy_sums: e.proxy_sums,
            examples: e.examples.clone(),
        })
        .collect();
    entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.template.cmp(&b.template)));
    let doc = InventoryDoc { level: inv.level, total_queries: inv.total_queries, entries };
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, &doc)
        .map_err(|e| CorpusError::Format(e.to_string()))?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn load_inventory(path: impl AsRef<Path>) -> Result<TemplateInventory, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    let doc: InventoryDoc =
        serde_json::from_str(&text).map_err(|e| CorpusError::Format(e.to_string()))?;
    let mut inv = TemplateInventory::new(doc.level);
    inv.total_queries = doc.total_queries;
    for entry in doc.entries {
        let clash = inv
            .entries
            .insert(
                entry.template.clone(),
                InventoryEntry {
                    count: entry.count,
                    proxy_sums: entry.proxy_sums,
                    examples: entry.examples,
                },
            )
            .is_some();
        if clash {
            return Err(CorpusError::Format(format!(
                "duplicate template entry: {}",
                entry.template
            )));
        }
    }
    let sum: u64 = inv.entries.values().map(|e| e.count).sum();
    if sum != inv.total_queries {
        return Err(CorpusError::Format(format!(
            "entry counts sum to {sum} but total_queries is {}",
            inv.total_queries
        )));
    }
    Ok(inv)
}

/// Combine two inventories of the same level; counts and proxy sums add.
pub fn merge(
    a: &TemplateInventory,
    b: &TemplateInventory,
) -> Result<TemplateInventory, CorpusError> {
    if a.level != b.level {
        return Err(CorpusError::LevelMismatch);
    }
    let mut out = a.clone();
    for (template, entry) in &b.entries {
        out.entries.entry(template.clone()).or_default().absorb(entry);
    }
    out.total_queries += b.total_queries;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::SchemaCatalog;
    use crate::template::template_tokens;

    fn catalogs() -> CatalogSet {
        let tables: indexmap::IndexMap<String, Vec<String>> = [
            ("employees", vec!["id", "name", "salary", "dept_id"]),
            ("departments", vec!["id", "name", "location"]),
        ]
        .into_iter()
        .map(|(t, cols)| (t.to_string(), cols.into_iter().map(String::from).collect()))
        .collect();
        let mut set = CatalogSet::new();
        set.insert(SchemaCatalog::new("hr", tables).unwrap());
        set
    }

    fn record(sql: &str) -> QueryRecord {
        QueryRecord {
            db_id: "hr".into(),
            nlq: String::new(),
            sql: sql.into(),
            source: "test".into(),
            difficulty: None,
        }
    }

    #[test]
    fn shared_soft_templates_counted() {
        let records = vec![
            record("SELECT name FROM employees WHERE salary > 10"),
            record("SELECT location FROM departments WHERE id > 99"),
            record("SELECT COUNT(*) FROM employees"),
        ];
        let outcome = ingest_records(records, &catalogs(), false).unwrap();
        assert_eq!(outcome.soft.len(), 2);
        assert_eq!(outcome.hard.len(), 2);
        let mut counts = outcome.soft.sorted_counts();
        counts.sort_unstable();
        assert_eq!(counts, vec![1, 2]);
        assert_eq!(outcome.soft.total_queries, 3);
        assert!(outcome.failures.is_empty());
    }

    #[test]
    fn top_paper_templates_appear() {
        let records = vec![
            record("SELECT name FROM employees WHERE name = 'Bob'"),
            record("SELECT COUNT(*) FROM departments"),
        ];
        let outcome = ingest_records(records, &catalogs(), false).unwrap();
        let expected = [
            "SELECT variable FROM variable WHERE variable = string",
            "SELECT COUNT(*) FROM variable",
        ];
        for want in expected {
            assert!(
                outcome
                    .soft
                    .entries
                    .keys()
                    .any(|k| template_tokens(k) == template_tokens(want)),
                "missing soft template: {want}"
            );
        }
    }

    #[test]
    fn missing_catalog_recorded() {
        let mut bad = record("SELECT 1");
        bad.db_id = "nowhere".into();
        let records = vec![record("SELECT COUNT(*) FROM employees"), bad];
        let outcome = ingest_records(records, &catalogs(), false).unwrap();
        assert_eq!(outcome.failures.len(), 1);
        assert_eq!(outcome.failures[0].line, 2);
        assert!(outcome.failures[0].reason.contains("nowhere"));
        assert_eq!(outcome.profiles.len(), 1);
    }

    #[test]
    fn all_failed_is_fatal() {
        let mut bad = record("SELECT 1");
        bad.db_id = "nowhere".into();
        let err = ingest_records(vec![bad], &catalogs(), false).unwrap_err();
        assert!(matches!(err, CorpusError::AllRecordsFailed));
    }

    #[test]
    fn order_independence() {
        let records = vec![
            record("SELECT name FROM employees"),
            record("SELECT COUNT(*) FROM employees"),
            record("SELECT name FROM employees WHERE salary > 10"),
            record("SELECT location FROM departments WHERE id = 3"),
        ];
        let forward = ingest_records(records.clone(), &catalogs(), false).unwrap();
        let mut reversed = records;
        reversed.reverse();
        let backward = ingest_records(reversed, &catalogs(), false).unwrap();
        assert_eq!(forward.hard, backward.hard);
        assert_eq!(forward.soft, backward.soft);
    }

    #[test]
    fn additivity_matches_merge() {
        let a = vec![
            record("SELECT name FROM employees"),
            record("SELECT COUNT(*) FROM employees"),
        ];
        let b = vec![
            record("SELECT name FROM departments"),
            record("SELECT COUNT(*) FROM departments"),
        ];
        let all: Vec<_> = a.iter().chain(b.iter()).cloned().collect();
        let whole = ingest_records(all, &catalogs(), false).unwrap();
        let part_a = ingest_records(a, &catalogs(), false).unwrap();
        let part_b = ingest_records(b, &catalogs(), false).unwrap();
        let merged = merge(&part_a.soft, &part_b.soft).unwrap();
        assert_eq!(whole.soft, merged);
    }

    #[test]
    fn soft_never_exceeds_hard() {
        let records = vec![
            record("SELECT name FROM employees WHERE salary > 10"),
            record("SELECT location FROM departments WHERE id > 5"),
            record("SELECT e.name FROM employees e"),
            record("SELECT d.name FROM departments d"),
        ];
        let outcome = ingest_records(records, &catalogs(), false).unwrap();
        assert!(outcome.soft.len() <= outcome.hard.len());
    }

    #[test]
    fn dedup_flag() {
        let records = vec![
            record("SELECT COUNT(*) FROM employees"),
            record("SELECT COUNT(*) FROM employees"),
        ];
        let raw = ingest_records(records.clone(), &catalogs(), false).unwrap();
        assert_eq!(raw.soft.total_queries, 2);
        let deduped = ingest_records(records, &catalogs(), true).unwrap();
        assert_eq!(deduped.soft.total_queries, 1);
    }

    #[test]
    fn inventory_round_trip() {
        let records = vec![
            record("SELECT name FROM employees"),
            record("SELECT COUNT(*) FROM employees"),
            record("SELECT name FROM employees WHERE salary > 10"),
        ];
        let outcome = ingest_records(records, &catalogs(), false).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inv.json");
        save_inventory(&outcome.soft, &path).unwrap();
        let loaded = load_inventory(&path).unwrap();
        assert_eq!(loaded, outcome.soft);
    }

    #[test]
    fn corrupted_inventory_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{ not json").unwrap();
        assert!(matches!(load_inventory(&path), Err(CorpusError::Format(_))));
        std::fs::write(
            &path,
            r#"{"level":"soft","total_queries":99,"entries":[{"template":"SELECT num","count":1,"proxy_sums":[0,0,0,0,0,0],"examples":[]}]}"#,
        )
        .unwrap();
        assert!(matches!(load_inventory(&path), Err(CorpusError::Format(_))));
    }

    #[test]
    fn merge_level_mismatch() {
        let hard = TemplateInventory::new(TemplateLevel::Hard);
        let soft = TemplateInventory::new(TemplateLevel::Soft);
        assert!(matches!(merge(&hard, &soft), Err(CorpusError::LevelMismatch)));
    }

    #[test]
    fn match_hit_rank_and_ties() {
        let records = vec![
            record("SELECT COUNT(*) FROM employees"),
            record("SELECT COUNT(*) FROM departments"),
            record("SELECT name FROM employees"),
            record("SELECT location FROM departments"),
            record("SELECT name FROM employees WHERE salary > 10"),
        ];
        let outcome = ingest_records(records, &catalogs(), false).unwrap();
        let catalog_set = catalogs();
        let catalog = catalog_set.get("hr").unwrap();

        // COUNT(*) template has count 2 → rank 1
        let top = match_query("SELECT COUNT(*) FROM employees", catalog, &outcome.soft).unwrap();
        assert!(top.hit);
        assert_eq!(top.rank, Some(1));
        assert_eq!(top.frequency, Some(2));

        // the two count-2 templates tie at rank 1; count-1 template ranks 2
        let tied = match_query("SELECT name FROM departments", catalog, &outcome.soft).unwrap();
        assert_eq!(tied.rank, Some(1));
        let lower =
            match_query("SELECT name FROM employees WHERE salary > 99", catalog, &outcome.soft)
                .unwrap();
        assert_eq!(lower.rank, Some(2));

        let miss = match_query(
            "SELECT COUNT(*) FROM employees GROUP BY dept_id",
            catalog,
            &outcome.soft,
        )
        .unwrap();
        assert!(!miss.hit);
        assert_eq!(miss.rank, None);
    }

    #[test]
    fn match_against_empty_inventory() {
        let inv = TemplateInventory::new(TemplateLevel::Soft);
        let catalog_set = catalogs();
        let catalog = catalog_set.get("hr").unwrap();
        let result = match_query("SELECT 1", catalog, &inv).unwrap();
        assert!(!result.hit);
        assert_eq!(result.frequency, None);
    }

    #[test]
    fn jsonl_file_ingest_with_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let records_path = dir.path().join("records.jsonl");
        let catalog_path = dir.path().join("hr.json");
        std::fs::write(
            &catalog_path,
            r#"{"db_id":"hr","tables":{"employees":["id","name","salary"]}}"#,
        )
        .unwrap();
        std::fs::write(
            &records_path,
            concat!(
                r#"{"db_id":"hr","sql":"SELECT COUNT(*) FROM employees"}"#,
                "\n",
                "not json at all\n",
                "\n",
                r#"{"db_id":"hr","sql":"SELECT name FROM employees"}"#,
                "\n",
            ),
        )
        .unwrap();
        let outcome = ingest(&records_path, &catalog_path, false).unwrap();
        assert_eq!(outcome.profiles.len(), 2);
        assert_eq!(outcome.failures.len(), 1);
        assert_eq!(outcome.failures[0].line, 2);
    }

    #[test]
    fn example_ids_stable_and_bounded() {
        let id1 = example_id("hr", "SELECT 1");
        let id2 = example_id("hr", "SELECT 1");
        assert_eq!(id1, id2);
        assert_eq!(id1.len(), 12);

        let records: Vec<QueryRecord> = (0..10)
            .map(|i| record(&format!("SELECT name FROM employees WHERE salary > {i}")))
            .collect();
        let outcome = ingest_records(records, &catalogs(), false).unwrap();
        let entry = outcome.soft.entries.values().next().unwrap();
        assert_eq!(entry.count, 10);
        assert_eq!(entry.examples.len(), MAX_EXAMPLES);
    }
}
