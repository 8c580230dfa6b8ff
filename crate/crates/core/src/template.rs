//! Staged query abstraction: SQL → hard template → soft template.
//!
//! A *hard* template replaces literals with typed placeholders (`num`,
//! `string`, `date`, `boolean`, `others`), schema names with `table_name` /
//! `col_name`, unknown identifiers with `new_table` / `new_view` /
//! `new_column`, aliases with `table_aliasN` / `column_aliasN` in
//! first-appearance order, and CTE names with `CTEn`. A *soft* template
//! further collapses every identifier placeholder to the single token
//! `variable`; a qualified pair such as `table_alias0.col_name` becomes one
//! `variable`. Literals, keywords, operators, and structure survive both
//! levels.
//!
//! Template identity is string equality on [`Template::canonical`]: keywords
//! uppercased, every token separated by a single space, no trailing
//! semicolon.

use crate::classify::{classify, ClassifiedQuery, RelationCtx, Role};
use crate::lexer::{lex, LexError, LiteralKind, TokenKind, TokenStream};
use crate::schema::{ClauseContext, NameClass, SchemaCatalog};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateLevel {
    Hard,
    Soft,
}

impl TemplateLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            TemplateLevel::Hard => "hard",
            TemplateLevel::Soft => "soft",
        }
    }
}

impl std::str::FromStr for TemplateLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hard" => Ok(TemplateLevel::Hard),
            "soft" => Ok(TemplateLevel::Soft),
            other => Err(format!("unknown template level: {other}")),
        }
    }
}

/// Identifier placeholders a hard template may contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placeholder {
    TableName,
    ColName,
    NewTable,
    NewView,
    NewColumn,
    TableAlias(u32),
    ColumnAlias(u32),
    Cte(u32),
}

impl std::fmt::Display for Placeholder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Placeholder::TableName => f.write_str("table_name"),
            Placeholder::ColName => f.write_str("col_name"),
            Placeholder::NewTable => f.write_str("new_table"),
            Placeholder::NewView => f.write_str("new_view"),
            Placeholder::NewColumn => f.write_str("new_column"),
            Placeholder::TableAlias(n) => write!(f, "table_alias{n}"),
            Placeholder::ColumnAlias(n) => write!(f, "column_alias{n}"),
            Placeholder::Cte(n) => write!(f, "CTE{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateToken {
    Keyword(String),
    Placeholder(Placeholder),
    Literal(LiteralKind),
    Operator(String),
    Punct(char),
    Star,
    /// Soft-level collapse of any identifier placeholder (or qualified chain).
    Variable,
}

impl TemplateToken {
    fn render(&self) -> String {
        match self {
            TemplateToken::Keyword(word) => word.clone(),
            TemplateToken::Placeholder(p) => p.to_string(),
            TemplateToken::Literal(kind) => kind.placeholder().to_string(),
            TemplateToken::Operator(op) => op.clone(),
            TemplateToken::Punct(ch) => ch.to_string(),
            TemplateToken::Star => "*".to_string(),
            TemplateToken::Variable => "variable".to_string(),
        }
    }
}

/// Alias and CTE names in first-appearance order of their definitions;
/// the index of a name is the N in its `table_aliasN` / `column_aliasN` /
/// `CTEn` placeholder.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliasEnvironment {
    pub table_aliases: Vec<String>,
    pub column_aliases: Vec<String>,
    pub ctes: Vec<String>,
}

impl From<&ClassifiedQuery> for AliasEnvironment {
    fn from(c: &ClassifiedQuery) -> Self {
        AliasEnvironment {
            table_aliases: c.table_aliases.clone(),
            column_aliases: c.column_aliases.clone(),
            ctes: c.cte_names.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub level: TemplateLevel,
    pub tokens: Vec<TemplateToken>,
    /// Non-fatal abstraction notes, e.g. a qualifier that resolved to
    /// nothing and was downgraded to `new_table`.
    pub warnings: Vec<String>,
}

impl Template {
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (i, token) in self.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&token.render());
        }
        out
    }
}

impl std::fmt::Display for Template {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.canonical())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("soft_template expects a hard template as input")]
    WrongLevel,
}

/// Build the hard template for an already-lexed and classified query.
///
/// Exposed so callers that also need complexity counts can classify once
/// and share the result; [`hard_template`] wraps it for the common case.
pub fn hard_template_classified(
    stream: &TokenStream,
    classified: &ClassifiedQuery,
    catalog: &SchemaCatalog,
) -> Template {
    debug_assert_eq!(stream.tokens.len(), classified.roles.len());
    let mut tokens = Vec::with_capacity(stream.tokens.len() + 4);
    let mut warnings = Vec::new();

    for (i, token) in stream.tokens.iter().enumerate() {
        match classified.roles[i] {
            Role::Plain => match token.kind {
                TokenKind::Keyword => tokens.push(TemplateToken::Keyword(token.upper())),
                TokenKind::Operator => tokens.push(TemplateToken::Operator(token.text.clone())),
                TokenKind::Punct => {
                    tokens.push(TemplateToken::Punct(token.text.chars().next().unwrap_or('?')))
                }
                TokenKind::Star => tokens.push(TemplateToken::Star),
                _ => tokens.push(TemplateToken::Literal(
                    token.literal_kind().unwrap_or(LiteralKind::Others),
                )),
            },
            Role::TypeName => tokens.push(TemplateToken::Keyword(token.upper())),
            Role::Relation(ctx) => {
                tokens.push(TemplateToken::Placeholder(resolve_relation(
                    &token.text,
                    ctx,
                    classified,
                    catalog,
                )));
            }
            Role::TableAliasDef { explicit_as } => {
                if !explicit_as {
                    tokens.push(TemplateToken::Keyword("AS".to_string()));
                }
                let idx = classified
                    .table_alias_index(&token.text)
                    .expect("defined alias is recorded") as u32;
                tokens.push(TemplateToken::Placeholder(Placeholder::TableAlias(idx)));
            }
            Role::ColumnAliasDef => {
                let idx = classified
                    .column_alias_index(&token.text)
                    .expect("defined alias is recorded") as u32;
                tokens.push(TemplateToken::Placeholder(Placeholder::ColumnAlias(idx)));
            }
            Role::CteDef => {
                let idx = classified.cte_index(&token.text).expect("defined CTE is recorded");
                tokens.push(TemplateToken::Placeholder(Placeholder::Cte(idx as u32)));
            }
            Role::CteColumnDecl => {
                let placeholder = if catalog.has_column(&token.text) {
                    Placeholder::ColName
                } else {
                    Placeholder::NewColumn
                };
                tokens.push(TemplateToken::Placeholder(placeholder));
            }
            Role::Qualifier => {
                tokens.push(TemplateToken::Placeholder(resolve_qualifier(
                    &token.text,
                    classified,
                    catalog,
                    &mut warnings,
                )));
            }
            Role::QualifiedColumn => {
                let placeholder = if let Some(idx) = classified.column_alias_index(&token.text) {
                    Placeholder::ColumnAlias(idx as u32)
                } else if catalog.has_column(&token.text) {
                    Placeholder::ColName
                } else {
                    Placeholder::NewColumn
                };
                tokens.push(TemplateToken::Placeholder(placeholder));
            }
            Role::ColumnExpr => {
                tokens.push(TemplateToken::Placeholder(resolve_column_expr(
                    &token.text,
                    classified,
                    catalog,
                )));
            }
        }
    }

    Template { level: TemplateLevel::Hard, tokens, warnings }
}

fn resolve_relation(
    name: &str,
    ctx: RelationCtx,
    classified: &ClassifiedQuery,
    catalog: &SchemaCatalog,
) -> Placeholder {
    if ctx == RelationCtx::FromJoin {
        if let Some(idx) = classified.cte_index(name) {
            return Placeholder::Cte(idx as u32);
        }
    }
    match catalog.lookup(name, ClauseContext::FromJoin) {
        NameClass::Table => Placeholder::TableName,
        NameClass::Column => Placeholder::ColName,
        NameClass::Unknown => match ctx {
            RelationCtx::CreateView => Placeholder::NewView,
            _ => Placeholder::NewTable,
        },
    }
}

fn resolve_qualifier(
    name: &str,
    classified: &ClassifiedQuery,
    catalog: &SchemaCatalog,
    warnings: &mut Vec<String>,
) -> Placeholder {
    if let Some(idx) = classified.table_alias_index(name) {
        return Placeholder::TableAlias(idx as u32);
    }
    if let Some(idx) = classified.cte_index(name) {
        return Placeholder::Cte(idx as u32);
    }
    match catalog.lookup(name, ClauseContext::Qualifier) {
        NameClass::Table => Placeholder::TableName,
        NameClass::Column => Placeholder::ColName,
        NameClass::Unknown => {
            warnings.push(format!("unresolved qualifier '{name}' mapped to new_table"));
            Placeholder::NewTable
        }
    }
}

fn resolve_column_expr(
    name: &str,
    classified: &ClassifiedQuery,
    catalog: &SchemaCatalog,
) -> Placeholder {
    if let Some(idx) = classified.column_alias_index(name) {
        return Placeholder::ColumnAlias(idx as u32);
    }
    if catalog.has_column(name) {
        return Placeholder::ColName;
    }
    if let Some(idx) = classified.table_alias_index(name) {
        return Placeholder::TableAlias(idx as u32);
    }
    if catalog.has_table(name) {
        return Placeholder::TableName;
    }
    if let Some(idx) = classified.cte_index(name) {
        return Placeholder::Cte(idx as u32);
    }
    Placeholder::NewColumn
}

/// Build the hard template for a lexed query against its schema.
pub fn hard_template(stream: &TokenStream, catalog: &SchemaCatalog) -> Template {
    let classified = classify(stream);
    hard_template_classified(stream, &classified, catalog)
}

/// Collapse a hard template's identifier placeholders to `variable`.
///
/// A qualified chain `P.P` (any identifier placeholders joined by dots)
/// collapses to a single `variable`; literal placeholders, keywords,
/// operators, and punctuation pass through unchanged.
pub fn soft_template(hard: &Template) -> Result<Template, TemplateError> {
    if hard.level != TemplateLevel::Hard {
        return Err(TemplateError::WrongLevel);
    }
    let mut tokens = Vec::with_capacity(hard.tokens.len());
    let mut i = 0;
    while i < hard.tokens.len() {
        match &hard.tokens[i] {
            TemplateToken::Placeholder(_) => {
                // swallow any `.placeholder` continuations of the chain
                while i + 2 < hard.tokens.len()
                    && hard.tokens[i + 1] == TemplateToken::Punct('.')
                    && matches!(hard.tokens[i + 2], TemplateToken::Placeholder(_))
                {
                    i += 2;
                }
                tokens.push(TemplateToken::Variable);
            }
            other => tokens.push(other.clone()),
        }
        i += 1;
    }
    Ok(Template {
        level: TemplateLevel::Soft,
        tokens,
        warnings: hard.warnings.clone(),
    })
}

/// Full pipeline: lex `sql`, then derive the hard and soft templates.
pub fn templatize(
    sql: &str,
    catalog: &SchemaCatalog,
) -> Result<(Template, Template), TemplateError> {
    let stream = lex(sql)?;
    let hard = hard_template(&stream, catalog);
    let soft = soft_template(&hard)?;
    Ok((hard, soft))
}

/// Split a printed template into its token sequence, ignoring whitespace
/// differences and treating `( ) , .` as standalone tokens. Two templates
/// are equivalent iff their token sequences match; printed references
/// break lines and space punctuation inconsistently.
pub fn template_tokens(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for ch in template.chars() {
        if ch.is_whitespace() || matches!(ch, '(' | ')' | ',' | '.') {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if !ch.is_whitespace() {
                out.push(ch.to_string());
            }
        } else {
            word.push(ch);
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}
