//! Six structural complexity proxies computed per query.
//!
//! All counters run off the shallow classification in [`crate::classify`],
//! so they agree token-for-token with the templatizer:
//!
//! * `num_tables` — distinct base tables referenced in FROM/JOIN positions
//!   (CTE references excluded, self-joins count once)
//! * `num_joins` — JOIN keywords plus implicit comma-joins in FROM lists
//! * `num_subqueries` — SELECT keywords beyond the outermost (CTE bodies count)
//! * `max_nesting_depth` — deepest SELECT embedding, outermost = 0
//! * `num_aggs_plus_group_by` — aggregate function calls plus GROUP BY clauses
//! * `advanced_feature_count` — window OVER clauses, FILTER clauses, set
//!   operations, CTE definitions, and percentile-family calls

use crate::classify::{classify, ClassifiedQuery, RelationCtx, Role};
use crate::lexer::{lex, LexError, TokenStream};
use crate::schema::SchemaCatalog;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub num_tables: u32,
    pub num_joins: u32,
    pub num_subqueries: u32,
    pub max_nesting_depth: u32,
    pub num_aggs_plus_group_by: u32,
    pub advanced_feature_count: u32,
}

impl ComplexityProfile {
    /// The six proxies in documented order, for tabular output.
    pub fn as_array(&self) -> [u32; 6] {
        [
            self.num_tables,
            self.num_joins,
            self.num_subqueries,
            self.max_nesting_depth,
            self.num_aggs_plus_group_by,
            self.advanced_feature_count,
        ]
    }

    pub const FIELD_NAMES: [&'static str; 6] = [
        "num_tables",
        "num_joins",
        "num_subqueries",
        "max_nesting_depth",
        "num_aggs_plus_group_by",
        "advanced_feature_count",
    ];
}

/// Compute the full profile from an existing classification.
///
/// Shared with corpus ingestion, which lexes and classifies each query once
/// for both templates and proxies.
pub fn profile_classified(stream: &TokenStream, classified: &ClassifiedQuery) -> ComplexityProfile {
    ComplexityProfile {
        num_tables: distinct_base_tables(stream, classified),
        num_joins: classified.join_keywords + classified.from_commas,
        num_subqueries: classified.select_count.saturating_sub(1),
        max_nesting_depth: classified.max_select_depth,
        num_aggs_plus_group_by: classified.agg_calls + classified.group_by_clauses,
        advanced_feature_count: classified.over_clauses
            + classified.filter_clauses
            + classified.set_operations
            + classified.cte_names.len() as u32
            + classified.percentile_calls,
    }
}

fn distinct_base_tables(stream: &TokenStream, classified: &ClassifiedQuery) -> u32 {
    let mut seen: Vec<String> = Vec::new();
    for (token, role) in stream.tokens.iter().zip(&classified.roles) {
        if matches!(role, Role::Relation(RelationCtx::FromJoin)) && !classified.is_cte(&token.text)
        {
            let lowered = token.text.to_lowercase();
            if !seen.contains(&lowered) {
                seen.push(lowered);
            }
        }
    }
    seen.len() as u32
}

/// Distinct base tables in FROM/JOIN positions. The catalog parameter is
/// unused by the count itself (unknown names still reference a table) but
/// kept so the call shape matches `profile`.
pub fn count_tables(stream: &TokenStream, _catalog: &SchemaCatalog) -> u32 {
    let classified = classify(stream);
    distinct_base_tables(stream, &classified)
}

/// JOIN keywords of any flavor plus (k−1) implicit joins per k-relation
/// comma-separated FROM list.
pub fn count_joins(stream: &TokenStream) -> u32 {
    let classified = classify(stream);
    classified.join_keywords + classified.from_commas
}

/// SELECT keywords beyond the outermost one; CTE bodies count.
pub fn count_subqueries(stream: &TokenStream) -> u32 {
    let classified = classify(stream);
    classified.select_count.saturating_sub(1)
}

/// Deepest SELECT embedding; the outermost query sits at depth 0.
pub fn max_nesting_depth(stream: &TokenStream) -> u32 {
    classify(stream).max_select_depth
}

/// Aggregate function calls (COUNT, SUM, AVG, MIN, MAX, TOTAL,
/// GROUP_CONCAT) plus GROUP BY clauses.
pub fn count_aggs_group_by(stream: &TokenStream) -> u32 {
    let classified = classify(stream);
    classified.agg_calls + classified.group_by_clauses
}

/// Advanced constructs: OVER, FILTER, set operations (UNION [ALL],
/// INTERSECT, EXCEPT), named CTE definitions, percentile-family calls.
pub fn count_advanced(stream: &TokenStream) -> u32 {
    let classified = classify(stream);
    classified.over_clauses
        + classified.filter_clauses
        + classified.set_operations
        + classified.cte_names.len() as u32
        + classified.percentile_calls
}

/// Lex `sql` and compute all six proxies.
pub fn profile(sql: &str, catalog: &SchemaCatalog) -> Result<ComplexityProfile, LexError> {
    let stream = lex(sql)?;
    let _ = catalog; // identifier resolution does not change any count
    let classified = classify(&stream);
    Ok(profile_classified(&stream, &classified))
}
