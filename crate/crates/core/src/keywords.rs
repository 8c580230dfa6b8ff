//! The fixed keyword vocabulary used by the lexer.
//!
//! Two lists make up the vocabulary:
//!
//! * [`RESERVED`] — the SQLite keyword list (the full set recognized by the
//!   SQLite parser, e.g. `SELECT`, `FROM`, `FILTER`, `OVER`).
//! * [`FUNCTIONS`] — names of SQLite built-in functions (aggregate, window,
//!   date/time, scalar, math). These are not reserved words in SQLite, but
//!   they are treated as keywords here so that calls like `COUNT(*)` or
//!   `AVG(x)` survive templatization verbatim instead of being abstracted
//!   like column names.
//!
//! A bare word is a keyword iff its uppercase form appears in one of the two
//! lists; everything else lexes as an identifier.

/// SQLite keywords, as listed in the SQLite documentation.
pub const RESERVED: &[&str] = &[
    "ABORT",
    "ACTION",
    "ADD",
    "AFTER",
    "ALL",
    "ALTER",
    "ALWAYS",
    "ANALYZE",
    "AND",
    "AS",
    "ASC",
    "ATTACH",
    "AUTOINCREMENT",
    "BEFORE",
    "BEGIN",
    "BETWEEN",
    "BY",
    "CASCADE",
    "CASE",
    "CAST",
    "CHECK",
    "COLLATE",
    "COLUMN",
    "COMMIT",
    "CONFLICT",
    "CONSTRAINT",
    "CREATE",
    "CROSS",
    "CURRENT",
    "CURRENT_DATE",
    "CURRENT_TIME",
    "CURRENT_TIMESTAMP",
    "DATABASE",
    "DEFAULT",
    "DEFERRABLE",
    "DEFERRED",
    "DELETE",
    "DESC",
    "DETACH",
    "DISTINCT",
    "DO",
    "DROP",
    "EACH",
    "ELSE",
    "END",
    "ESCAPE",
    "EXCEPT",
    "EXCLUDE",
    "EXCLUSIVE",
    "EXISTS",
    "EXPLAIN",
    "FAIL",
    "FILTER",
    "FIRST",
    "FOLLOWING",
    "FOR",
    "FOREIGN",
    "FROM",
    "FULL",
    "GENERATED",
    "GLOB",
    "GROUP",
    "GROUPS",
    "HAVING",
    "IF",
    "IGNORE",
    "IMMEDIATE",
    "IN",
    "INDEX",
    "INDEXED",
    "INITIALLY",
    "INNER",
    "INSERT",
    "INSTEAD",
    "INTERSECT",
    "INTO",
    "IS",
    "ISNULL",
    "JOIN",
    "KEY",
    "LAST",
    "LEFT",
    "LIKE",
    "LIMIT",
    "MATCH",
    "MATERIALIZED",
    "NATURAL",
    "NO",
    "NOT",
    "NOTHING",
    "NOTNULL",
    "NULLS",
    "OF",
    "OFFSET",
    "ON",
    "OR",
    "ORDER",
    "OTHERS",
    "OUTER",
    "OVER",
    "PARTITION",
    "PLAN",
    "PRAGMA",
    "PRECEDING",
    "PRIMARY",
    "QUERY",
    "RAISE",
    "RANGE",
    "RECURSIVE",
    "REFERENCES",
    "REGEXP",
    "REINDEX",
    "RELEASE",
    "RENAME",
    "REPLACE",
    "RESTRICT",
    "RETURNING",
    "RIGHT",
    "ROLLBACK",
    "ROW",
    "ROWS",
    "SAVEPOINT",
    "SELECT",
    "SET",
    "TABLE",
    "TEMP",
    "TEMPORARY",
    "THEN",
    "TIES",
    "TO",
    "TRANSACTION",
    "TRIGGER",
    "UNBOUNDED",
    "UNION",
    "UNIQUE",
    "UPDATE",
    "USING",
    "VACUUM",
    "VALUES",
    "VIEW",
    "VIRTUAL",
    "WHEN",
    "WHERE",
    "WINDOW",
    "WITH",
    "WITHOUT",
];

/// SQLite built-in function names treated as keywords by the lexer.
pub const FUNCTIONS: &[&str] = &[
    // aggregate
    "AVG",
    "COUNT",
    "GROUP_CONCAT",
    "MAX",
    "MIN",
    "STRING_AGG",
    "SUM",
    "TOTAL",
    // window
    "CUME_DIST",
    "DENSE_RANK",
    "FIRST_VALUE",
    "LAG",
    "LAST_VALUE",
    "LEAD",
    "NTH_VALUE",
    "NTILE",
    "PERCENT_RANK",
    "RANK",
    "ROW_NUMBER",
    // date and time
    "DATE",
    "DATETIME",
    "JULIANDAY",
    "STRFTIME",
    "TIME",
    "TIMEDIFF",
    "UNIXEPOCH",
    // scalar
    "ABS",
    "CHAR",
    "COALESCE",
    "CONCAT",
    "CONCAT_WS",
    "FORMAT",
    "HEX",
    "IFNULL",
    "IIF",
    "INSTR",
    "LENGTH",
    "LOWER",
    "LTRIM",
    "NULLIF",
    "PRINTF",
    "QUOTE",
    "RANDOM",
    "ROUND",
    "RTRIM",
    "SIGN",
    "SUBSTR",
    "SUBSTRING",
    "TRIM",
    "TYPEOF",
    "UNICODE",
    "UPPER",
    // math
    "CEIL",
    "CEILING",
    "EXP",
    "FLOOR",
    "LN",
    "LOG",
    "LOG10",
    "LOG2",
    "MOD",
    "PI",
    "POW",
    "POWER",
    "SQRT",
];

/// Aggregate functions counted by the `num_aggs_plus_group_by` proxy.
pub const AGGREGATES: &[&str] = &[
    "AVG",
    "COUNT",
    "GROUP_CONCAT",
    "MAX",
    "MIN",
    "SUM",
    "TOTAL",
];

/// Percentile-family window functions counted as advanced features.
pub const PERCENTILE_FUNCTIONS: &[&str] = &["CUME_DIST", "NTILE", "PERCENT_RANK"];

fn vocabulary() -> &'static std::collections::HashSet<&'static str> {
    static SET: std::sync::OnceLock<std::collections::HashSet<&'static str>> =
        std::sync::OnceLock::new();
    SET.get_or_init(|| RESERVED.iter().chain(FUNCTIONS).copied().collect())
}

/// True if `upper` (an already-uppercased word) is in the keyword vocabulary.
pub fn is_keyword(upper: &str) -> bool {
    vocabulary().contains(upper)
}

pub fn is_aggregate(upper: &str) -> bool {
    AGGREGATES.contains(&upper)
}

pub fn is_percentile_function(upper: &str) -> bool {
    PERCENTILE_FUNCTIONS.contains(&upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_duplicates_across_lists() {
        let all: Vec<&str> = RESERVED.iter().chain(FUNCTIONS).copied().collect();
        let set: std::collections::HashSet<&str> = all.iter().copied().collect();
        assert_eq!(all.len(), set.len());
    }

    #[test]
    fn core_words_present() {
        for w in ["SELECT", "FROM", "WHERE", "JOIN", "OVER", "FILTER", "WITH"] {
            assert!(is_keyword(w), "{w} missing");
        }
        for w in ["AVG", "COUNT", "GROUP_CONCAT", "NTILE"] {
            assert!(is_keyword(w), "{w} missing");
        }
        assert!(!is_keyword("EMPLOYEES"));
        assert!(!is_keyword("TRUE"));
        assert!(!is_keyword("FALSE"));
    }

    #[test]
    fn aggregates_are_keywords() {
        for w in AGGREGATES {
            assert!(is_keyword(w));
        }
        for w in PERCENTILE_FUNCTIONS {
            assert!(is_keyword(w));
        }
    }
}
