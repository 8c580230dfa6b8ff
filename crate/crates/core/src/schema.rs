//! Database catalogs for schema-aware identifier replacement.
//!
//! A catalog is the set of table names and per-table column names for one
//! database. Catalogs load from a JSON sidecar format or from SQLite
//! `CREATE TABLE` DDL, and answer case-insensitive name lookups.
//!
//! JSON catalog format: a top-level object with `"db_id"` (string) and
//! `"tables"` (object mapping table name to an array of column-name
//! strings). Unknown keys are ignored.

use crate::lexer::{self, TokenKind, TokenStream};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaCatalog {
    pub db_id: String,
    /// Table name -> ordered column names, in declaration order.
    pub tables: IndexMap<String, Vec<String>>,
    #[serde(skip)]
    lowered_tables: HashSet<String>,
    #[serde(skip)]
    lowered_columns: HashSet<String>,
}

/// Where an identifier sits when it is looked up; decides whether table or
/// column classification wins on a name that is both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseContext {
    /// FROM/JOIN targets and other relation positions: table wins.
    FromJoin,
    /// The `x` of a qualified `x.y` reference: table wins.
    Qualifier,
    /// Everything else (SELECT list, WHERE, GROUP BY, ...): column wins.
    Expression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NameClass {
    Table,
    Column,
    Unknown,
}

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("catalog parse error: {0}")]
    Parse(String),
    #[error("duplicate table name (case-insensitive): {0}")]
    DuplicateTable(String),
    #[error("catalog has no tables")]
    EmptyCatalog,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Deserialize)]
struct CatalogDoc {
    db_id: String,
    tables: IndexMap<String, Vec<String>>,
}

impl SchemaCatalog {
    pub fn new(
        db_id: impl Into<String>,
        tables: IndexMap<String, Vec<String>>,
    ) -> Result<Self, SchemaError> {
        if tables.is_empty() {
            return Err(SchemaError::EmptyCatalog);
        }
        let mut lowered_tables = HashSet::new();
        let mut lowered_columns = HashSet::new();
        for (table, columns) in &tables {
            if !lowered_tables.insert(table.to_lowercase()) {
                return Err(SchemaError::DuplicateTable(table.clone()));
            }
            for column in columns {
                lowered_columns.insert(column.to_lowercase());
            }
        }
        Ok(SchemaCatalog {
            db_id: db_id.into(),
            tables,
            lowered_tables,
            lowered_columns,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let doc: CatalogDoc =
            serde_json::from_str(text).map_err(|e| SchemaError::Parse(e.to_string()))?;
        SchemaCatalog::new(doc.db_id, doc.tables)
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self, SchemaError> {
        SchemaCatalog::from_json(&std::fs::read_to_string(path)?)
    }

    /// Build a catalog from a script of SQLite `CREATE TABLE` statements.
    /// Column types and table constraints are ignored; only names are kept.
    pub fn from_ddl(db_id: impl Into<String>, ddl_text: &str) -> Result<Self, SchemaError> {
        let statements =
            lexer::lex_script(ddl_text).map_err(|e| SchemaError::Parse(e.to_string()))?;
        let mut tables = IndexMap::new();
        for stmt in &statements {
            if let Some((name, columns)) = parse_create_table(stmt)? {
                if tables.insert(name.clone(), columns).is_some() {
                    return Err(SchemaError::DuplicateTable(name));
                }
            }
        }
        SchemaCatalog::new(db_id, tables)
    }

    pub fn table_count(&self) -> usize {
        self.tables.len()
    }

    pub fn has_table(&self, name: &str) -> bool {
        self.lowered_tables.contains(&name.to_lowercase())
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.lowered_columns.contains(&name.to_lowercase())
    }

    /// Classify `name` as table, column, or unknown. Lookup is
    /// case-insensitive; `position` breaks ties for names that are both.
    pub fn lookup(&self, name: &str, position: ClauseContext) -> NameClass {
        let is_table = self.has_table(name);
        let is_column = self.has_column(name);
        match position {
            ClauseContext::FromJoin | ClauseContext::Qualifier => {
                if is_table {
                    NameClass::Table
                } else if is_column {
                    NameClass::Column
                } else {
                    NameClass::Unknown
                }
            }
            ClauseContext::Expression => {
                if is_column {
                    NameClass::Column
                } else if is_table {
                    NameClass::Table
                } else {
                    NameClass::Unknown
                }
            }
        }
    }
}

/// Extract `(table_name, column_names)` from one statement, or `None` if the
/// statement is not a `CREATE TABLE`.
fn parse_create_table(stmt: &TokenStream) -> Result<Option<(String, Vec<String>)>, SchemaError> {
    let tokens = &stmt.tokens;
    if !tokens.first().is_some_and(|t| t.is_keyword("CREATE")) {
        return Ok(None);
    }
    // CREATE [TEMP|TEMPORARY] TABLE [IF NOT EXISTS] name ...
    let mut i = 1;
    while i < tokens.len() && (tokens[i].is_keyword("TEMP") || tokens[i].is_keyword("TEMPORARY")) {
        i += 1;
    }
    if !tokens.get(i).is_some_and(|t| t.is_keyword("TABLE")) {
        return Ok(None); // CREATE INDEX / VIEW / TRIGGER: not catalog material
    }
    i += 1;
    if tokens.get(i).is_some_and(|t| t.is_keyword("IF")) {
        i += 3; // IF NOT EXISTS
    }
    // schema-qualified names: keep the last identifier before '(' or AS
    let mut name: Option<String> = None;
    while let Some(t) = tokens.get(i) {
        match t.kind {
            TokenKind::Identifier | TokenKind::Keyword => {
                if t.is_keyword("AS") {
                    break;
                }
                name = Some(t.text.clone());
                i += 1;
            }
            TokenKind::Punct if t.is_punct('.') => i += 1,
            _ => break,
        }
    }
    let name = name.ok_or_else(|| {
        SchemaError::Parse(format!("CREATE TABLE without a table name: {}", stmt.render()))
    })?;
    // CREATE TABLE ... AS SELECT has no declared column list
    let Some(open) = tokens.get(i) else {
        return Ok(Some((name, Vec::new())));
    };
    if open.is_keyword("AS") {
        return Ok(Some((name, Vec::new())));
    }
    if !open.is_punct('(') {
        return Err(SchemaError::Parse(format!(
            "expected '(' after table name in: {}",
            stmt.render()
        )));
    }
    i += 1;
    let mut columns = Vec::new();
    let mut depth = 1usize;
    let mut item_start = true;
    while let Some(t) = tokens.get(i) {
        if t.is_punct('(') {
            depth += 1;
        } else if t.is_punct(')') {
            depth -= 1;
            if depth == 0 {
                return Ok(Some((name, columns)));
            }
        } else if t.is_punct(',') && depth == 1 {
            item_start = true;
            i += 1;
            continue;
        } else if item_start && depth == 1 {
            // a definition item is a column unless it opens with a constraint
            match t.kind {
                TokenKind::Identifier => columns.push(t.text.clone()),
                TokenKind::Keyword
                    if !matches!(
                        t.upper().as_str(),
                        "PRIMARY" | "FOREIGN" | "UNIQUE" | "CHECK" | "CONSTRAINT"
                    ) =>
                {
                    // non-reserved function words can be used as column names
                    columns.push(t.text.clone());
                }
                _ => {}
            }
            item_start = false;
        }
        i += 1;
    }
    Err(SchemaError::Parse(format!(
        "unbalanced parentheses in: {}",
        stmt.render()
    )))
}

/// A set of catalogs keyed by `db_id`, as loaded for a corpus run.
#[derive(Debug, Clone, Default)]
pub struct CatalogSet {
    by_id: BTreeMap<String, SchemaCatalog>,
}

impl CatalogSet {
    pub fn new() -> Self {
        CatalogSet::default()
    }

    pub fn insert(&mut self, catalog: SchemaCatalog) {
        self.by_id.insert(catalog.db_id.clone(), catalog);
    }

    pub fn get(&self, db_id: &str) -> Option<&SchemaCatalog> {
        self.by_id.get(db_id)
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SchemaCatalog> {
        self.by_id.values()
    }

    /// db_id → number of tables, the x-axis of the moving-average curves.
    pub fn table_counts(&self) -> BTreeMap<String, u32> {
        self.by_id
            .iter()
            .map(|(id, catalog)| (id.clone(), catalog.table_count() as u32))
            .collect()
    }

    /// Parse a catalog set from JSON text holding either one catalog object
    /// or an array of catalog objects.
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let mut set = CatalogSet::new();
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SchemaError::Parse(e.to_string()))?;
        match value {
            serde_json::Value::Array(items) => {
                for item in items {
                    let doc: CatalogDoc = serde_json::from_value(item)
                        .map_err(|e| SchemaError::Parse(e.to_string()))?;
                    set.insert(SchemaCatalog::new(doc.db_id, doc.tables)?);
                }
            }
            _ => set.insert(SchemaCatalog::from_json(text)?),
        }
        Ok(set)
    }

    /// Load catalogs from a path: either a directory of `*.json` catalog
    /// files or a single JSON file holding one catalog object or an array
    /// of catalog objects.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SchemaError> {
        let path = path.as_ref();
        if path.is_dir() {
            let mut set = CatalogSet::new();
            let mut files: Vec<_> = std::fs::read_dir(path)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "json"))
                .collect();
            files.sort();
            for file in files {
                set.insert(SchemaCatalog::load_json(&file)?);
            }
            Ok(set)
        } else {
            CatalogSet::from_json(&std::fs::read_to_string(path)?)
        }
    }
}
