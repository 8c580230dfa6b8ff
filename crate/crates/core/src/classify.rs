//! Shallow structural classification of a lexed statement.
//!
//! One forward pass assigns every token a [`Role`] (relation reference,
//! alias definition, qualified column, plain expression identifier, ...)
//! and collects the alias environment: CTE names, table aliases, and column
//! aliases in first-appearance order of their definitions. Both the
//! templatizer and the complexity counters run off this classification, so
//! abstraction and counting always agree on what each token is.
//!
//! This is a clause-tracking state machine over the token stream, not a
//! grammar. It follows SELECT/FROM/JOIN/ON/WHERE/GROUP BY/ORDER BY/WITH
//! transitions, keeps a frame per parenthesis group, and treats any group
//! whose first token is `SELECT` as a nested query.

use crate::lexer::{Token, TokenKind, TokenStream};
use crate::keywords;

/// What kind of statement position introduced a relation name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationCtx {
    /// FROM/JOIN/INTO/UPDATE targets.
    FromJoin,
    /// Target of CREATE TABLE (or CREATE INDEX/TRIGGER).
    CreateTable,
    /// Target of CREATE VIEW.
    CreateView,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Keywords, operators, punctuation, literals, parameters, `*`.
    Plain,
    /// Identifier naming a relation (base table, view, or CTE reference).
    Relation(RelationCtx),
    /// Identifier defining a table alias; `explicit_as` records whether the
    /// source used the AS keyword.
    TableAliasDef { explicit_as: bool },
    /// Identifier defining a column alias via AS.
    ColumnAliasDef,
    /// CTE name at its definition site in a WITH clause.
    CteDef,
    /// Column name declared in a `WITH name (col, ...)` list.
    CteColumnDecl,
    /// The `x` of a qualified reference `x.y`.
    Qualifier,
    /// The `y` of a qualified reference `x.y`.
    QualifiedColumn,
    /// Type name after AS inside a CAST.
    TypeName,
    /// Any other identifier: a column or bare name in expression position.
    ColumnExpr,
}

/// The classified statement: one role per token plus the alias environment
/// and the structural counters the complexity proxies are built from.
#[derive(Debug, Clone)]
pub struct ClassifiedQuery {
    pub roles: Vec<Role>,
    /// CTE names in definition order (lowercased key, original spelling).
    pub cte_names: Vec<String>,
    pub table_aliases: Vec<String>,
    pub column_aliases: Vec<String>,
    pub join_keywords: u32,
    /// Commas separating relations in a FROM list (implicit joins).
    pub from_commas: u32,
    pub select_count: u32,
    pub max_select_depth: u32,
    pub agg_calls: u32,
    pub group_by_clauses: u32,
    pub over_clauses: u32,
    pub filter_clauses: u32,
    pub set_operations: u32,
    pub percentile_calls: u32,
}

impl ClassifiedQuery {
    pub fn is_cte(&self, name: &str) -> bool {
        self.cte_names.iter().any(|c| c.eq_ignore_ascii_case(name))
    }

    pub fn cte_index(&self, name: &str) -> Option<usize> {
        self.cte_names.iter().position(|c| c.eq_ignore_ascii_case(name))
    }

    pub fn table_alias_index(&self, name: &str) -> Option<usize> {
        self.table_aliases.iter().position(|a| a.eq_ignore_ascii_case(name))
    }

    pub fn column_alias_index(&self, name: &str) -> Option<usize> {
        self.column_aliases.iter().position(|a| a.eq_ignore_ascii_case(name))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Clause {
    None,
    WithHeader,
    Select,
    From,
    On,
    Using,
    Where,
    GroupBy,
    Having,
    OrderBy,
    Limit,
    Set,
    Values,
    Window,
    CreateTarget(RelationCtx),
}

#[derive(Debug, Clone)]
struct Frame {
    clause: Clause,
    relation_expected: bool,
    alias_possible: bool,
    is_query_group: bool,
    saw_any_token: bool,
    /// Pushed as a FROM-item (subquery or parenthesized join); completing
    /// it re-opens alias position in the parent.
    closes_relation: bool,
    cte_decl_list: bool,
    cast_frame: bool,
    after_cast_as: bool,
    with_expect_name: bool,
    with_after_name: bool,
    with_body_expected: bool,
    window_expect_name: bool,
    create_pending: bool,
}

impl Frame {
    fn new(clause: Clause) -> Self {
        Frame {
            clause,
            relation_expected: false,
            alias_possible: false,
            is_query_group: false,
            saw_any_token: false,
            closes_relation: false,
            cte_decl_list: false,
            cast_frame: false,
            after_cast_as: false,
            with_expect_name: false,
            with_after_name: false,
            with_body_expected: false,
            window_expect_name: false,
            create_pending: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PendingAlias {
    Table,
    Column,
}

/// Classify every token of `stream`.
pub fn classify(stream: &TokenStream) -> ClassifiedQuery {
    let tokens = &stream.tokens;
    let mut out = ClassifiedQuery {
        roles: Vec::with_capacity(tokens.len()),
        cte_names: Vec::new(),
        table_aliases: Vec::new(),
        column_aliases: Vec::new(),
        join_keywords: 0,
        from_commas: 0,
        select_count: 0,
        max_select_depth: 0,
        agg_calls: 0,
        group_by_clauses: 0,
        over_clauses: 0,
        filter_clauses: 0,
        set_operations: 0,
        percentile_calls: 0,
    };
    let mut frames = vec![Frame::new(Clause::None)];
    let mut expecting_alias: Option<PendingAlias> = None;
    let mut pending_qualified = false;

    let next_is = |i: usize, pred: &dyn Fn(&Token) -> bool| tokens.get(i + 1).is_some_and(pred);

    for i in 0..tokens.len() {
        let token = &tokens[i];
        let first_in_frame = !frames.last().expect("frame").saw_any_token;
        frames.last_mut().expect("frame").saw_any_token = true;

        let role = match token.kind {
            TokenKind::Keyword => {
                let upper = token.upper();
                let frame = frames.last_mut().expect("frame");
                expecting_alias = None;
                pending_qualified = false;
                match upper.as_str() {
                    "WITH" => {
                        frame.clause = Clause::WithHeader;
                        frame.with_expect_name = true;
                        frame.with_after_name = false;
                    }
                    "RECURSIVE" => {}
                    "SELECT" => {
                        frame.clause = Clause::Select;
                        frame.relation_expected = false;
                        frame.alias_possible = false;
                        if first_in_frame {
                            frame.is_query_group = true;
                        }
                        out.select_count += 1;
                        let depth =
                            frames.iter().skip(1).filter(|f| f.is_query_group).count() as u32;
                        out.max_select_depth = out.max_select_depth.max(depth);
                    }
                    "FROM" => {
                        frame.clause = Clause::From;
                        frame.relation_expected = true;
                        frame.alias_possible = false;
                    }
                    "JOIN" => {
                        frame.clause = Clause::From;
                        frame.relation_expected = true;
                        frame.alias_possible = false;
                        out.join_keywords += 1;
                    }
                    "INTO" | "UPDATE" => {
                        frame.clause = Clause::From;
                        frame.relation_expected = true;
                        frame.alias_possible = false;
                    }
                    "CREATE" => frame.create_pending = true,
                    "TABLE" | "INDEX" | "TRIGGER" if frame.create_pending => {
                        frame.clause = Clause::CreateTarget(RelationCtx::CreateTable);
                        frame.relation_expected = true;
                        frame.create_pending = false;
                    }
                    "VIEW" if frame.create_pending => {
                        frame.clause = Clause::CreateTarget(RelationCtx::CreateView);
                        frame.relation_expected = true;
                        frame.create_pending = false;
                    }
                    "AS" => {
                        if frame.clause == Clause::WithHeader && frame.with_after_name {
                            frame.with_body_expected = true;
                        } else if frame.cast_frame {
                            frame.after_cast_as = true;
                        } else if matches!(frame.clause, Clause::From | Clause::CreateTarget(_)) {
                            expecting_alias = Some(PendingAlias::Table);
                        } else {
                            expecting_alias = Some(PendingAlias::Column);
                        }
                    }
                    "ON" => {
                        if matches!(frame.clause, Clause::CreateTarget(_)) {
                            frame.relation_expected = true;
                        } else {
                            frame.clause = Clause::On;
                            frame.alias_possible = false;
                        }
                    }
                    "USING" => {
                        frame.clause = Clause::Using;
                        frame.alias_possible = false;
                    }
                    "WHERE" => frame.clause = Clause::Where,
                    "HAVING" => frame.clause = Clause::Having,
                    "LIMIT" | "OFFSET" => frame.clause = Clause::Limit,
                    "SET" => frame.clause = Clause::Set,
                    "VALUES" => frame.clause = Clause::Values,
                    "WINDOW" => {
                        frame.clause = Clause::Window;
                        frame.window_expect_name = true;
                    }
                    "GROUP" => {
                        if next_is(i, &|t| t.is_keyword("BY")) {
                            frame.clause = Clause::GroupBy;
                            out.group_by_clauses += 1;
                        }
                    }
                    "ORDER" => {
                        if next_is(i, &|t| t.is_keyword("BY")) {
                            frame.clause = Clause::OrderBy;
                        }
                    }
                    "UNION" | "INTERSECT" | "EXCEPT" => {
                        frame.clause = Clause::None;
                        frame.relation_expected = false;
                        frame.alias_possible = false;
                        out.set_operations += 1;
                    }
                    "OVER" => out.over_clauses += 1,
                    "FILTER" => {
                        if next_is(i, &|t| t.is_punct('(')) {
                            out.filter_clauses += 1;
                        }
                    }
                    _ => {
                        if next_is(i, &|t| t.is_punct('(')) {
                            if keywords::is_aggregate(&upper) {
                                out.agg_calls += 1;
                            }
                            if keywords::is_percentile_function(&upper) {
                                out.percentile_calls += 1;
                            }
                        }
                    }
                }
                Role::Plain
            }
            TokenKind::Identifier => {
                let frame = frames.last_mut().expect("frame");
                if pending_qualified {
                    pending_qualified = false;
                    expecting_alias = None;
                    Role::QualifiedColumn
                } else if next_is(i, &|t| t.is_punct('.')) {
                    expecting_alias = None;
                    Role::Qualifier
                } else if let Some(kind) = expecting_alias.take() {
                    match kind {
                        PendingAlias::Table => {
                            record_name(&mut out.table_aliases, &token.text);
                            frame.alias_possible = false;
                            Role::TableAliasDef { explicit_as: true }
                        }
                        PendingAlias::Column => {
                            record_name(&mut out.column_aliases, &token.text);
                            Role::ColumnAliasDef
                        }
                    }
                } else if frame.clause == Clause::WithHeader && frame.with_expect_name {
                    frame.with_expect_name = false;
                    frame.with_after_name = true;
                    record_name(&mut out.cte_names, &token.text);
                    Role::CteDef
                } else if frame.relation_expected {
                    frame.relation_expected = false;
                    frame.alias_possible = frame.clause == Clause::From;
                    let ctx = match frame.clause {
                        Clause::CreateTarget(ctx) => ctx,
                        _ => RelationCtx::FromJoin,
                    };
                    Role::Relation(ctx)
                } else if frame.alias_possible && frame.clause == Clause::From {
                    frame.alias_possible = false;
                    record_name(&mut out.table_aliases, &token.text);
                    Role::TableAliasDef { explicit_as: false }
                } else if frame.cte_decl_list {
                    Role::CteColumnDecl
                } else if frame.clause == Clause::Window && frame.window_expect_name {
                    frame.window_expect_name = false;
                    record_name(&mut out.column_aliases, &token.text);
                    Role::ColumnAliasDef
                } else if frame.after_cast_as {
                    frame.after_cast_as = false;
                    Role::TypeName
                } else {
                    Role::ColumnExpr
                }
            }
            TokenKind::Punct => {
                let ch = token.text.chars().next().unwrap_or('\0');
                match ch {
                    '(' => {
                        let parent = frames.last_mut().expect("frame");
                        let mut pushed;
                        if parent.clause == Clause::WithHeader && parent.with_body_expected {
                            parent.with_body_expected = false;
                            pushed = Frame::new(Clause::None);
                        } else if parent.clause == Clause::WithHeader && parent.with_after_name {
                            pushed = Frame::new(Clause::None);
                            pushed.cte_decl_list = true;
                        } else if parent.relation_expected {
                            parent.relation_expected = false;
                            pushed = Frame::new(Clause::From);
                            pushed.relation_expected = true;
                            pushed.closes_relation = true;
                        } else {
                            pushed = Frame::new(expression_clause(parent.clause));
                            pushed.cast_frame =
                                i > 0 && tokens[i - 1].is_keyword("CAST");
                        }
                        expecting_alias = None;
                        frames.push(pushed);
                    }
                    ')' => {
                        expecting_alias = None;
                        pending_qualified = false;
                        if frames.len() > 1 {
                            let closed = frames.pop().expect("frame");
                            let parent = frames.last_mut().expect("frame");
                            if closed.closes_relation {
                                parent.alias_possible = parent.clause == Clause::From;
                            }
                        }
                    }
                    ',' => {
                        expecting_alias = None;
                        pending_qualified = false;
                        let frame = frames.last_mut().expect("frame");
                        match frame.clause {
                            Clause::From if !frame.relation_expected => {
                                frame.relation_expected = true;
                                frame.alias_possible = false;
                                out.from_commas += 1;
                            }
                            Clause::WithHeader => {
                                frame.with_expect_name = true;
                                frame.with_after_name = false;
                            }
                            Clause::Window => frame.window_expect_name = true,
                            _ => {}
                        }
                    }
                    '.' => {
                        pending_qualified = true;
                    }
                    _ => {}
                }
                Role::Plain
            }
            _ => {
                // literals, operators, params, star
                expecting_alias = None;
                pending_qualified = false;
                Role::Plain
            }
        };
        out.roles.push(role);
    }
    out
}

fn expression_clause(parent: Clause) -> Clause {
    match parent {
        Clause::WithHeader | Clause::CreateTarget(_) => Clause::None,
        other => other,
    }
}

fn record_name(env: &mut Vec<String>, name: &str) {
    if !env.iter().any(|n| n.eq_ignore_ascii_case(name)) {
        env.push(name.to_string());
    }
}
