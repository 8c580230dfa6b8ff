//! Browser-facing bindings. Every function takes and returns JSON strings so
//! the page needs no generated TypeScript: results arrive as
//! `{"ok":true,...}` and failures as `{"ok":false,"error":"..."}`, never as
//! a thrown exception. The crate also compiles natively, which is how its
//! tests run.

use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use sqltm::corpus::{self, TemplateInventory};
use sqltm::schema::{CatalogSet, SchemaCatalog};
use sqltm::stats;
use sqltm::template::templatize;

fn envelope(result: Result<Value, String>) -> String {
    match result {
        Ok(Value::Object(mut map)) => {
            map.insert("ok".into(), Value::Bool(true));
            Value::Object(map).to_string()
        }
        Ok(other) => json!({ "ok": true, "value": other }).to_string(),
        Err(error) => json!({ "ok": false, "error": error }).to_string(),
    }
}

/// Hard and soft templates for one query.
/// `catalog_json` is a single `{"db_id","tables"}` object.
#[wasm_bindgen]
pub fn templatize_query(sql: &str, catalog_json: &str) -> String {
    envelope((|| {
        let catalog = SchemaCatalog::from_json(catalog_json).map_err(|e| e.to_string())?;
        let (hard, soft) = templatize(sql, &catalog).map_err(|e| e.to_string())?;
        let warnings: Vec<&String> = hard.warnings.iter().chain(&soft.warnings).collect();
        Ok(json!({
            "hard": hard.canonical(),
            "soft": soft.canonical(),
            "warnings": warnings,
        }))
    })())
}

/// The six structural complexity proxies for one query.
#[wasm_bindgen]
pub fn profile_query(sql: &str, catalog_json: &str) -> String {
    envelope((|| {
        let catalog = SchemaCatalog::from_json(catalog_json).map_err(|e| e.to_string())?;
        let profile = sqltm::complexity::profile(sql, &catalog).map_err(|e| e.to_string())?;
        Ok(json!({ "profile": profile }))
    })())
}

#[derive(Deserialize)]
#[serde(default)]
struct AnalyzeOptions {
    targets: Vec<f64>,
    resamples: usize,
    seed: u64,
    dedup: bool,
    /// Longest prefix of the descending count list returned for plotting.
    max_points: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            targets: vec![10.0, 30.0, 50.0, 70.0, 90.0, 100.0],
            resamples: 0,
            seed: 42,
            dedup: false,
            max_points: 2000,
        }
    }
}

fn level_summary(inventory: &TemplateInventory, options: &AnalyzeOptions) -> Result<Value, String> {
    let spectrum = stats::spectrum(inventory).map_err(|e| e.to_string())?;
    let coverage = stats::coverage_table(inventory, &options.targets).map_err(|e| e.to_string())?;
    let fit = match stats::fit_loglog(&spectrum) {
        Ok(mut fit) => {
            if options.resamples > 0 {
                if let Ok(gof) = stats::gof_bootstrap(&spectrum, options.resamples, options.seed) {
                    fit.gof_p_value = Some(gof.p_value);
                    fit.bootstrap_n = Some(gof.resamples);
                }
            }
            json!(fit)
        }
        Err(stats::StatsError::DegenerateSpectrum) => Value::Null,
        Err(e) => return Err(e.to_string()),
    };

    let mut top: Vec<(&String, u64)> =
        inventory.entries.iter().map(|(t, e)| (t, e.count)).collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    top.truncate(10);

    let counts: Vec<u64> =
        spectrum.sorted_counts.iter().take(options.max_points).copied().collect();
    Ok(json!({
        "templates": spectrum.total_templates,
        "groups": spectrum.groups,
        "coverage": coverage,
        "counts": counts,
        "fit": fit,
        "top": top,
    }))
}

/// Corpus statistics over JSONL records and a catalog set, both as text.
/// `options_json` may be empty; see [`AnalyzeOptions`] for the knobs.
#[wasm_bindgen]
pub fn analyze_corpus(records_jsonl: &str, catalogs_json: &str, options_json: &str) -> String {
    envelope((|| {
        let options: AnalyzeOptions = if options_json.trim().is_empty() {
            AnalyzeOptions::default()
        } else {
            serde_json::from_str(options_json).map_err(|e| format!("options: {e}"))?
        };
        let catalogs = CatalogSet::from_json(catalogs_json).map_err(|e| e.to_string())?;
        let outcome = corpus::ingest_jsonl_str(records_jsonl, &catalogs, options.dedup)
            .map_err(|e| e.to_string())?;
        Ok(json!({
            "total_queries": outcome.hard.total_queries,
            "failures": outcome.failures,
            "hard": level_summary(&outcome.hard, &options)?,
            "soft": level_summary(&outcome.soft, &options)?,
        }))
    })())
}
