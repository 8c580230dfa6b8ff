//! Spider-style dataset conversion.
//!
//! Reads the benchmark's `tables.json` (schemas) and one or more query files
//! (arrays of `{"db_id","question","query"}` objects) and writes this tool's
//! interchange formats: `catalogs.json` plus `records.jsonl`. Databases whose
//! schema cannot form a valid catalog (for example case-colliding table
//! names) are skipped with a warning; their queries stay in the records file
//! and surface later as per-record ingest failures.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use indexmap::IndexMap;
use serde::Deserialize;

use sqltm::corpus::QueryRecord;
use sqltm::schema::SchemaCatalog;

use crate::CliError;

#[derive(Args)]
pub struct ConvertArgs {
    /// Spider-style tables.json describing every database schema.
    #[arg(long)]
    pub tables: PathBuf,
    /// Query files, each a JSON array of {"db_id","question","query"}.
    #[arg(long, required = true, num_args = 1..)]
    pub queries: Vec<PathBuf>,
    /// Directory for catalogs.json and records.jsonl.
    #[arg(long, env = "SQLTM_OUT")]
    pub out: PathBuf,
}

#[derive(Deserialize)]
struct SpiderSchema {
    db_id: String,
    table_names_original: Vec<String>,
    /// Pairs of (table index, column name); index -1 marks the synthetic `*`.
    column_names_original: Vec<(i64, String)>,
}

#[derive(Deserialize)]
struct SpiderExample {
    db_id: String,
    #[serde(default)]
    question: String,
    query: String,
}

pub fn cmd_convert(args: ConvertArgs) -> Result<(), CliError> {
    let tables_text = std::fs::read_to_string(&args.tables)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", args.tables.display())))?;
    let schemas: Vec<SpiderSchema> = serde_json::from_str(&tables_text)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.tables.display())))?;

    let mut catalogs: BTreeMap<String, SchemaCatalog> = BTreeMap::new();
    let mut skipped_schemas = 0usize;
    for schema in schemas {
        match build_catalog(&schema) {
            Ok(catalog) => {
                if catalogs.insert(schema.db_id.clone(), catalog).is_some() {
                    eprintln!("warning: duplicate schema for '{}', keeping the last", schema.db_id);
                }
            }
            Err(reason) => {
                skipped_schemas += 1;
                eprintln!("warning: skipping schema '{}': {reason}", schema.db_id);
            }
        }
    }
    if catalogs.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no usable database schemas",
            args.tables.display()
        )));
    }

    let mut records: Vec<QueryRecord> = Vec::new();
    let mut missing_catalog = 0usize;
    for path in &args.queries {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        let examples: Vec<SpiderExample> = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let source = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "queries".to_string());
        for example in examples {
            if !catalogs.contains_key(&example.db_id) {
                missing_catalog += 1;
            }
            records.push(QueryRecord {
                db_id: example.db_id,
                nlq: example.question,
                sql: example.query,
                source: source.clone(),
                difficulty: None,
            });
        }
    }

    std::fs::create_dir_all(&args.out)?;
    let catalog_list: Vec<&SchemaCatalog> = catalogs.values().collect();
    let mut catalogs_json = serde_json::to_string_pretty(&catalog_list)
        .map_err(|e| CliError::Internal(format!("catalog serialization: {e}")))?;
    catalogs_json.push('\n');
    std::fs::write(args.out.join("catalogs.json"), catalogs_json)?;

    let mut jsonl = Vec::new();
    for record in &records {
        serde_json::to_writer(&mut jsonl, record)
            .map_err(|e| CliError::Internal(format!("record serialization: {e}")))?;
        jsonl.push(b'\n');
    }
    let records_path = args.out.join("records.jsonl");
    if let Err(e) = std::fs::File::create(&records_path).and_then(|mut f| f.write_all(&jsonl)) {
        let _ = std::fs::remove_file(args.out.join("catalogs.json"));
        return Err(e.into());
    }

    println!(
        "records: {}, databases: {}, skipped schemas: {}, records without catalog: {}, out: {}",
        records.len(),
        catalogs.len(),
        skipped_schemas,
        missing_catalog,
        args.out.display()
    );
    Ok(())
}

fn build_catalog(schema: &SpiderSchema) -> Result<SchemaCatalog, String> {
    let mut tables: IndexMap<String, Vec<String>> = schema
        .table_names_original
        .iter()
        .map(|name| (name.clone(), Vec::new()))
        .collect();
    for (index, column) in &schema.column_names_original {
        if *index < 0 {
            continue; // the synthetic "*" entry
        }
        let Some(table) = schema.table_names_original.get(*index as usize) else {
            return Err(format!("column '{column}' references table index {index} out of range"));
        };
        tables
            .get_mut(table)
            .expect("tables built from the same list")
            .push(column.clone());
    }
    SchemaCatalog::new(&schema.db_id, tables).map_err(|e| e.to_string())
}
