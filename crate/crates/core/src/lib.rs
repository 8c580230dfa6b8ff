//! SQL template mining for SQLite-dialect query workloads.
//!
//! The pipeline runs in stages: lex a query ([`lexer`]), resolve identifiers
//! against a database catalog ([`schema`]), abstract it into a hard template
//! and then a soft template ([`template`]), count structural complexity
//! proxies ([`complexity`]), aggregate a corpus into template inventories
//! ([`corpus`]), and compute workload statistics over the result ([`stats`]).

pub mod classify;
pub mod complexity;
pub mod corpus;
pub mod keywords;
pub mod lexer;
pub mod powerlaw;
pub mod report;
pub mod schema;
pub mod stats;
pub mod template;



pub use complexity::ComplexityProfile;
pub use corpus::{CorpusError, IngestOutcome, QueryRecord, TemplateInventory};
pub use lexer::{lex, LexError, LiteralKind, Token, TokenKind, TokenStream};
pub use report::{analyze, write_report, AnalysisConfig, AnalysisReport, ReportError};
pub use schema::{CatalogSet, SchemaCatalog, SchemaError};
pub use template::{
    soft_template, templatize, AliasEnvironment, Template, TemplateError, TemplateLevel,
};


