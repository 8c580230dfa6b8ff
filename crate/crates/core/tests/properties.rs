//! Randomized invariants over the lexer, templatizer, proxies, and stats.

use proptest::prelude::*;

use sqltm::complexity;
use sqltm::corpus::{InventoryEntry, TemplateInventory};
use sqltm::lexer;
use sqltm::powerlaw;
use sqltm::schema::SchemaCatalog;
use sqltm::stats;
use sqltm::template::{templatize, TemplateLevel};

fn catalog() -> SchemaCatalog {
    let tables: indexmap::IndexMap<String, Vec<String>> = [
        ("users", vec!["id", "name", "age"]),
        ("orders", vec!["id", "user_id", "total"]),
    ]
    .into_iter()
    .map(|(t, cols)| (t.to_string(), cols.into_iter().map(String::from).collect()))
    .collect();
    SchemaCatalog::new("prop", tables).unwrap()
}

/// A generator for plausible single-statement SQL built from schema names,
/// unknown identifiers, literals, and operators. Everything it emits lexes.
fn sql_strategy() -> impl Strategy<Value = String> {
    let table = prop_oneof![Just("users"), Just("orders"), Just("mystery")];
    let column = prop_oneof![
        Just("id".to_string()),
        Just("name".to_string()),
        Just("total".to_string()),
        Just("ghost".to_string()),
        "[a-z]{1,6}".prop_map(|s| s),
    ];
    let literal = prop_oneof![
        (0u32..1000).prop_map(|n| n.to_string()),
        (0u32..100).prop_map(|n| format!("'v{n}'")),
        Just("1.5".to_string()),
        Just("NULL".to_string()),
    ];
    let op = prop_oneof![Just("="), Just(">"), Just("<"), Just(">="), Just("<>")];
    (table, column.clone(), column, literal, op, any::<bool>(), 1u32..5).prop_map(
        |(t, c1, c2, lit, op, agg, limit)| {
            let select = if agg { format!("COUNT({c1})") } else { c1.clone() };
            format!("SELECT {select}, {c2} FROM {t} WHERE {c2} {op} {lit} LIMIT {limit}")
        },
    )
}

proptest! {
    #[test]
    fn lexer_never_panics(input in ".{0,200}") {
        let _ = lexer::lex(&input);
    }

    #[test]
    fn lex_render_round_trip(sql in sql_strategy()) {
        let stream = lexer::lex(&sql).unwrap();
        let rendered = stream.render();
        let again = lexer::lex(&rendered).unwrap();
        let kinds: Vec<_> = stream.tokens.iter().map(|t| (t.kind, t.upper())).collect();
        let kinds_again: Vec<_> = again.tokens.iter().map(|t| (t.kind, t.upper())).collect();
        prop_assert_eq!(kinds, kinds_again);
    }

    #[test]
    fn templatize_is_deterministic_and_canonical(sql in sql_strategy()) {
        let catalog = catalog();
        let (hard_a, soft_a) = templatize(&sql, &catalog).unwrap();
        let (hard_b, soft_b) = templatize(&sql, &catalog).unwrap();
        prop_assert_eq!(hard_a.canonical(), hard_b.canonical());
        prop_assert_eq!(soft_a.canonical(), soft_b.canonical());
        // canonical strings re-lex cleanly
        prop_assert!(lexer::lex(&hard_a.canonical()).is_ok());
        prop_assert!(lexer::lex(&soft_a.canonical()).is_ok());
        // no raw literal values survive
        prop_assert!(!hard_a.canonical().contains('\''));
    }

    #[test]
    fn soft_never_finer_than_hard(a in sql_strategy(), b in sql_strategy()) {
        // equal hard templates force equal soft templates
        let catalog = catalog();
        let (hard_a, soft_a) = templatize(&a, &catalog).unwrap();
        let (hard_b, soft_b) = templatize(&b, &catalog).unwrap();
        if hard_a.canonical() == hard_b.canonical() {
            prop_assert_eq!(soft_a.canonical(), soft_b.canonical());
        }
    }

    #[test]
    fn depth_never_exceeds_subquery_count(sql in sql_strategy()) {
        let catalog = catalog();
        let profile = complexity::profile(&sql, &catalog).unwrap();
        prop_assert!(profile.max_nesting_depth <= profile.num_subqueries);
    }

    #[test]
    fn literal_values_never_change_proxies(sql in sql_strategy(), k in 0u32..9999) {
        let catalog = catalog();
        let base = complexity::profile(&sql, &catalog).unwrap();
        let renumbered = sql
            .split(' ')
            .map(|tok| {
                if tok.chars().all(|c| c.is_ascii_digit()) { k.to_string() } else { tok.to_string() }
            })
            .collect::<Vec<_>>()
            .join(" ");
        let redone = complexity::profile(&renumbered, &catalog).unwrap();
        prop_assert_eq!(base, redone);
    }

    #[test]
    fn spearman_is_bounded_and_permutation_invariant(
        mut pairs in proptest::collection::vec((0u32..50, 0u32..50), 4..60),
        seed in any::<u64>(),
    ) {
        let as_f64: Vec<(f64, f64)> =
            pairs.iter().map(|&(x, y)| (x as f64, y as f64)).collect();
        let Ok(result) = stats::spearman(&as_f64) else { return Ok(()); };
        prop_assert!((-1.0..=1.0).contains(&result.rho));
        prop_assert!((0.0..=1.0).contains(&result.p_value));

        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        pairs.shuffle(&mut rand_chacha::ChaCha12Rng::seed_from_u64(seed));
        let shuffled: Vec<(f64, f64)> =
            pairs.iter().map(|&(x, y)| (x as f64, y as f64)).collect();
        let again = stats::spearman(&shuffled).unwrap();
        prop_assert!((result.rho - again.rho).abs() < 1e-12);
    }

    #[test]
    fn coverage_is_monotone_in_target(counts in proptest::collection::vec(1u64..500, 1..300)) {
        let mut inv = TemplateInventory::new(TemplateLevel::Soft);
        for (i, &c) in counts.iter().enumerate() {
            inv.entries.insert(
                format!("T{i}"),
                InventoryEntry { count: c, proxy_sums: [0; 6], examples: vec![] },
            );
            inv.total_queries += c;
        }
        let targets: Vec<f64> = (1..=10).map(|i| i as f64 * 10.0).collect();
        let table = stats::coverage_table(&inv, &targets).unwrap();
        for window in table.windows(2) {
            prop_assert!(window[0].templates_needed <= window[1].templates_needed);
            prop_assert!(window[0].queries_covered <= window[1].queries_covered);
        }
        // 100% target always covers every query
        prop_assert_eq!(table.last().unwrap().queries_covered, inv.total_queries);
    }

    #[test]
    fn survival_stays_in_unit_interval(
        alpha in 1.2f64..6.0,
        x_min in 1u64..20,
        step in 0u64..200,
    ) {
        let s = powerlaw::survival(x_min + step, alpha, x_min);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&s));
        let next = powerlaw::survival(x_min + step + 1, alpha, x_min);
        prop_assert!(next <= s + 1e-12);
    }
}
