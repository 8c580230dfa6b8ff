//! Complexity counters checked against hand-enumerated expected values,
//! and profile stability under template abstraction.

use serde::Deserialize;
use sqltm::complexity::{profile, ComplexityProfile};
use sqltm::SchemaCatalog;

#[derive(Deserialize)]
struct Fixture {
    catalog: serde_json::Value,
    cases: Vec<Case>,
}

#[derive(Deserialize)]
struct Case {
    name: String,
    sql: String,
    expected: [u32; 6],
}

fn load() -> (SchemaCatalog, Vec<Case>) {
    let raw = include_str!("fixtures/proxy_oracle.json");
    let fixture: Fixture = serde_json::from_str(raw).expect("fixture parses");
    let catalog = SchemaCatalog::from_json(&fixture.catalog.to_string()).expect("catalog loads");
    (catalog, fixture.cases)
}

#[test]
fn profiles_match_manual_enumeration() {
    let (catalog, cases) = load();
    for case in &cases {
        let got = profile(&case.sql, &catalog).expect("profile").as_array();
        assert_eq!(got, case.expected, "proxy mismatch for case {}", case.name);
    }
}

#[test]
fn keyword_counters_survive_hard_templating() {
    // Re-lexing a hard template must preserve every proxy except
    // num_tables (distinct table names all collapse to `table_name`,
    // so that count can only shrink toward 1).
    let (catalog, cases) = load();
    for case in &cases {
        let original = profile(&case.sql, &catalog).expect("profile");
        let (hard, _) = sqltm::templatize(&case.sql, &catalog).expect("templatize");
        let templated = profile(&hard.canonical(), &catalog).expect("template profile");
        let expect = ComplexityProfile { num_tables: templated.num_tables, ..original };
        assert_eq!(templated, expect, "profile drifted for case {}", case.name);
        assert!(templated.num_tables <= original.num_tables);
        assert!(templated.num_tables >= original.num_tables.min(1));
    }
}
