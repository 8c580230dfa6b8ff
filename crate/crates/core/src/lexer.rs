//! SQLite-dialect tokenizer.
//!
//! Splits a single SQL statement into classified tokens, stripping comments
//! and typing literals. This is a tokenizer plus shallow structure, not a
//! conformance parser: it never validates grammar, only lexical shape.
//!
//! Classification rules:
//! * bare words are keywords iff they appear in the documented vocabulary
//!   ([`crate::keywords`]); anything else is an identifier
//! * `TRUE`/`FALSE` lex as boolean literals and `NULL` as a null literal,
//!   so the abstraction layer can map them to their typed placeholders
//! * double-quoted, backtick-quoted, and `[bracketed]` names are identifiers
//! * a single-quoted literal shaped like `YYYY-MM-DD`, optionally followed
//!   by ` HH:MM` or ` HH:MM:SS`, is a date literal; other quoted text is a
//!   plain string literal
//! * `*` is its own token kind so `COUNT(*)` survives templatization

use crate::keywords;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Keyword,
    Identifier,
    NumberLiteral,
    StringLiteral,
    DateLiteral,
    BooleanLiteral,
    NullLiteral,
    Operator,
    Punct,
    Star,
    Param,
}

/// Typed literal categories used for placeholder abstraction.
///
/// `Jsonb` is reserved in the placeholder vocabulary but never produced by
/// this lexer; no SQLite literal maps to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LiteralKind {
    Num,
    Str,
    Date,
    Boolean,
    Jsonb,
    Others,
}

impl LiteralKind {
    /// The placeholder word this literal kind renders as in templates.
    pub fn placeholder(self) -> &'static str {
        match self {
            LiteralKind::Num => "num",
            LiteralKind::Str => "string",
            LiteralKind::Date => "date",
            LiteralKind::Boolean => "boolean",
            LiteralKind::Jsonb => "jsonb",
            LiteralKind::Others => "others",
        }
    }
}

/// One lexical unit. `text` holds the semantic content: string literals have
/// their quotes stripped, quoted identifiers hold the inner name. `quoted`
/// remembers that an identifier was quoted so [`Token::render`] can
/// reconstruct a form that re-lexes identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub quoted: bool,
}

impl Token {
    fn new(kind: TokenKind, text: impl Into<String>) -> Self {
        Token {
            kind,
            text: text.into(),
            quoted: false,
        }
    }

    /// Uppercase form, the comparison key for keywords.
    pub fn upper(&self) -> String {
        self.text.to_ascii_uppercase()
    }

    pub fn is_keyword(&self, word: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text.eq_ignore_ascii_case(word)
    }

    pub fn is_punct(&self, ch: char) -> bool {
        self.kind == TokenKind::Punct && self.text.len() == 1 && self.text.starts_with(ch)
    }

    /// Literal category for literal tokens, `None` otherwise.
    pub fn literal_kind(&self) -> Option<LiteralKind> {
        match self.kind {
            TokenKind::NumberLiteral => Some(LiteralKind::Num),
            TokenKind::StringLiteral => Some(LiteralKind::Str),
            TokenKind::DateLiteral => Some(LiteralKind::Date),
            TokenKind::BooleanLiteral => Some(LiteralKind::Boolean),
            TokenKind::NullLiteral => Some(LiteralKind::Others),
            _ => None,
        }
    }

    /// A source form that re-lexes to the same kind and text.
    pub fn render(&self) -> String {
        match self.kind {
            TokenKind::StringLiteral | TokenKind::DateLiteral => {
                format!("'{}'", self.text.replace('\'', "''"))
            }
            TokenKind::Identifier => {
                if self.quoted || needs_quoting(&self.text) {
                    format!("\"{}\"", self.text.replace('"', "\"\""))
                } else {
                    self.text.clone()
                }
            }
            _ => self.text.clone(),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn needs_quoting(name: &str) -> bool {
    let mut chars = name.chars();
    let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    let rest_ok = name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$');
    let upper = name.to_ascii_uppercase();
    !head_ok
        || !rest_ok
        || keywords::is_keyword(&upper)
        || matches!(upper.as_str(), "TRUE" | "FALSE" | "NULL")
}

/// Byte offsets of a token in the original text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

/// A lexed statement: tokens plus their byte spans in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    pub spans: Vec<Span>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Single-line source reconstruction; re-lexing it yields the same
    /// kind-and-text sequence.
    pub fn render(&self) -> String {
        self.tokens
            .iter()
            .map(Token::render)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexError {
    #[error("unterminated string starting at byte {0}")]
    UnterminatedString(usize),
    #[error("unterminated block comment starting at byte {0}")]
    UnterminatedComment(usize),
    #[error("no tokens after stripping comments and whitespace")]
    EmptyInput,
    #[error("multiple statements in input; only one statement is supported")]
    MultipleStatements,
    #[error("unexpected character {0:?} at byte {1}")]
    UnexpectedChar(char, usize),
}

/// Lex a single SQL statement. A trailing semicolon is accepted and dropped;
/// any content after it is an error.
pub fn lex(sql_text: &str) -> Result<TokenStream, LexError> {
    let mut statements = lex_script(sql_text)?;
    match statements.len() {
        0 => Err(LexError::EmptyInput),
        1 => Ok(statements.pop().expect("one statement")),
        _ => Err(LexError::MultipleStatements),
    }
}

/// Lex a script of semicolon-separated statements (used for DDL ingestion).
/// Empty statements between semicolons are skipped.
pub fn lex_script(sql_text: &str) -> Result<Vec<TokenStream>, LexError> {
    let mut out = Vec::new();
    let mut current = TokenStream {
        tokens: Vec::new(),
        spans: Vec::new(),
    };
    let mut lexer = RawLexer::new(sql_text);
    while let Some((token, span)) = lexer.next_token()? {
        if token.is_punct(';') {
            if !current.is_empty() {
                out.push(std::mem::replace(
                    &mut current,
                    TokenStream {
                        tokens: Vec::new(),
                        spans: Vec::new(),
                    },
                ));
            }
        } else {
            current.tokens.push(token);
            current.spans.push(span);
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    Ok(out)
}

/// Classify a raw literal lexeme into its typed placeholder category.
/// Quoted text classifies as date or string by shape; bare words map
/// `TRUE`/`FALSE` to boolean and `NULL` to others; numerics map to num.
pub fn classify_literal(token_text: &str) -> LiteralKind {
    let t = token_text.trim();
    if t.len() >= 2 && t.starts_with('\'') && t.ends_with('\'') {
        let inner = &t[1..t.len() - 1];
        return if is_date_shaped(inner) {
            LiteralKind::Date
        } else {
            LiteralKind::Str
        };
    }
    if t.eq_ignore_ascii_case("true") || t.eq_ignore_ascii_case("false") {
        return LiteralKind::Boolean;
    }
    if t.eq_ignore_ascii_case("null") {
        return LiteralKind::Others;
    }
    if t.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '.') {
        return LiteralKind::Num;
    }
    if is_date_shaped(t) {
        return LiteralKind::Date;
    }
    LiteralKind::Str
}

/// `YYYY-MM-DD`, optionally followed by ` HH:MM` or ` HH:MM:SS`.
pub fn is_date_shaped(s: &str) -> bool {
    let bytes = s.as_bytes();
    let digits = |mut range: std::ops::Range<usize>| range.all(|i| bytes[i].is_ascii_digit());
    if bytes.len() < 10 || !digits(0..4) || bytes[4] != b'-' || !digits(5..7) || bytes[7] != b'-' || !digits(8..10) {
        return false;
    }
    match bytes.len() {
        10 => true,
        16 => bytes[10] == b' ' && digits(11..13) && bytes[13] == b':' && digits(14..16),
        19 => {
            bytes[10] == b' '
                && digits(11..13)
                && bytes[13] == b':'
                && digits(14..16)
                && bytes[16] == b':'
                && digits(17..19)
        }
        _ => false,
    }
}

struct RawLexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> RawLexer<'a> {
    fn new(src: &'a str) -> Self {
        RawLexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.bytes.get(self.pos + offset).copied()
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'-') if self.peek_at(1) == Some(b'-') => {
                    while let Some(b) = self.peek() {
                        self.pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(b'/') if self.peek_at(1) == Some(b'*') => {
                    let start = self.pos;
                    self.pos += 2;
                    loop {
                        match self.peek() {
                            Some(b'*') if self.peek_at(1) == Some(b'/') => {
                                self.pos += 2;
                                break;
                            }
                            Some(_) => self.pos += 1,
                            None => return Err(LexError::UnterminatedComment(start)),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<(Token, Span)>, LexError> {
        self.skip_trivia()?;
        let start = self.pos;
        let Some(b) = self.peek() else {
            return Ok(None);
        };
        let token = match b {
            b'\'' => self.quoted_literal()?,
            b'"' => self.quoted_identifier(b'"', b'"')?,
            b'`' => self.quoted_identifier(b'`', b'`')?,
            b'[' => self.quoted_identifier(b'[', b']')?,
            b'0'..=b'9' => self.number(),
            b'.' if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => self.number(),
            b'x' | b'X' if self.peek_at(1) == Some(b'\'') => {
                self.pos += 1;
                let mut tok = self.quoted_literal()?;
                tok.kind = TokenKind::StringLiteral;
                tok
            }
            b'*' => {
                self.pos += 1;
                Token::new(TokenKind::Star, "*")
            }
            b'(' | b')' | b',' | b'.' | b';' => {
                self.pos += 1;
                Token::new(TokenKind::Punct, (b as char).to_string())
            }
            b'?' => {
                self.pos += 1;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                Token::new(TokenKind::Param, &self.src[start..self.pos])
            }
            b':' | b'@' | b'$' if self.peek_at(1).is_some_and(is_word_byte) => {
                self.pos += 1;
                self.word_run();
                Token::new(TokenKind::Param, &self.src[start..self.pos])
            }
            _ if is_word_start(b) => self.word(),
            _ => self.operator()?,
        };
        Ok(Some((
            token,
            Span {
                start,
                end: self.pos,
            },
        )))
    }

    fn quoted_literal(&mut self) -> Result<Token, LexError> {
        let start = self.pos;
        self.pos += 1; // opening quote
        let mut text = String::new();
        loop {
            match self.peek() {
                Some(b'\'') if self.peek_at(1) == Some(b'\'') => {
                    text.push('\'');
                    self.pos += 2;
                }
                Some(b'\'') => {
                    self.pos += 1;
                    let kind = if is_date_shaped(&text) {
                        TokenKind::DateLiteral
                    } else {
                        TokenKind::StringLiteral
                    };
                    return Ok(Token::new(kind, text));
                }
                Some(_) => {
                    let ch_start = self.pos;
                    let mut end = ch_start + 1;
                    while end < self.bytes.len() && !self.src.is_char_boundary(end) {
                        end += 1;
                    }
                    text.push_str(&self.src[ch_start..end]);
                    self.pos = end;
                }
                None => return Err(LexError::UnterminatedString(start)),
            }
        }
    }

    fn quoted_identifier(&mut self, open: u8, close: u8) -> Result<Token, LexError> {
        let start = self.pos;
        self.pos += 1;
        let mut text = String::new();
        loop {
            match self.peek() {
                Some(b) if b == close && open == close && self.peek_at(1) == Some(close) => {
                    text.push(close as char);
                    self.pos += 2;
                }
                Some(b) if b == close => {
                    self.pos += 1;
                    let mut tok = Token::new(TokenKind::Identifier, text);
                    tok.quoted = true;
                    return Ok(tok);
                }
                Some(_) => {
                    let ch_start = self.pos;
                    let mut end = ch_start + 1;
                    while end < self.bytes.len() && !self.src.is_char_boundary(end) {
                        end += 1;
                    }
                    text.push_str(&self.src[ch_start..end]);
                    self.pos = end;
                }
                None => return Err(LexError::UnterminatedString(start)),
            }
        }
    }

    fn number(&mut self) -> Token {
        let start = self.pos;
        if self.peek() == Some(b'0') && matches!(self.peek_at(1), Some(b'x') | Some(b'X')) {
            self.pos += 2;
            while self.peek().is_some_and(|c| c.is_ascii_hexdigit()) {
                self.pos += 1;
            }
            return Token::new(TokenKind::NumberLiteral, &self.src[start..self.pos]);
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') && self.peek_at(1).map_or(true, |c| c != b'.') {
            // a digit run followed by '.' only stays numeric when the dot is
            // a decimal point, not a qualified-name separator: 1.5 vs t.c
            let after = self.peek_at(1);
            if after.is_none() || after.is_some_and(|c| !is_word_start(c)) {
                self.pos += 1;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mut look = self.pos + 1;
            if matches!(self.bytes.get(look), Some(b'+') | Some(b'-')) {
                look += 1;
            }
            if self.bytes.get(look).is_some_and(|c| c.is_ascii_digit()) {
                self.pos = look;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        Token::new(TokenKind::NumberLiteral, &self.src[start..self.pos])
    }

    fn word_run(&mut self) {
        while self.peek().is_some_and(is_word_byte) {
            self.pos += 1;
        }
    }

    fn word(&mut self) -> Token {
        let start = self.pos;
        self.word_run();
        let text = &self.src[start..self.pos];
        let upper = text.to_ascii_uppercase();
        let kind = match upper.as_str() {
            "TRUE" | "FALSE" => TokenKind::BooleanLiteral,
            "NULL" => TokenKind::NullLiteral,
            _ if keywords::is_keyword(&upper) => TokenKind::Keyword,
            _ => TokenKind::Identifier,
        };
        Token::new(kind, text)
    }

    fn operator(&mut self) -> Result<Token, LexError> {
        let start = self.pos;
        let two = self.src.get(start..start + 2);
        let op2 = matches!(
            two,
            Some("||" | "<<" | ">>" | "<=" | ">=" | "<>" | "!=" | "==" | "->")
        );
        if op2 {
            if two == Some("->") && self.peek_at(2) == Some(b'>') {
                self.pos += 3;
            } else {
                self.pos += 2;
            }
            return Ok(Token::new(TokenKind::Operator, &self.src[start..self.pos]));
        }
        let b = self.bytes[start];
        if matches!(b, b'=' | b'<' | b'>' | b'+' | b'-' | b'/' | b'%' | b'&' | b'|' | b'~') {
            self.pos += 1;
            return Ok(Token::new(TokenKind::Operator, &self.src[start..self.pos]));
        }
        let ch = self.src[start..].chars().next().unwrap_or('\u{fffd}');
        Err(LexError::UnexpectedChar(ch, start))
    }
}

fn is_word_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b >= 0x80
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$' || b >= 0x80
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(sql: &str) -> Vec<TokenKind> {
        lex(sql).unwrap().tokens.iter().map(|t| t.kind).collect()
    }

    fn texts(sql: &str) -> Vec<String> {
        lex(sql)
            .unwrap()
            .tokens
            .iter()
            .map(|t| t.text.clone())
            .collect()
    }

    #[test]
    fn simple_selection() {
        use TokenKind::*;
        assert_eq!(
            kinds("SELECT name FROM employees WHERE salary > 50000"),
            vec![
                Keyword, Identifier, Keyword, Identifier, Keyword, Identifier, Operator,
                NumberLiteral
            ]
        );
    }

    #[test]
    fn comments_are_stripped() {
        let stream = lex("SELECT 1 -- comment").unwrap();
        assert_eq!(stream.len(), 2);
        assert_eq!(stream.tokens[0].upper(), "SELECT");
        assert_eq!(stream.tokens[1].kind, TokenKind::NumberLiteral);

        let stream = lex("SELECT /* a\nb */ 2").unwrap();
        assert_eq!(stream.len(), 2);
        for t in &stream.tokens {
            assert!(!t.text.contains("--") && !t.text.contains("/*"));
        }
    }

    #[test]
    fn string_literal_quotes_stripped() {
        let stream = lex("WHERE location = 'NY'").unwrap();
        let last = stream.tokens.last().unwrap();
        assert_eq!(last.kind, TokenKind::StringLiteral);
        assert_eq!(last.text, "NY");
        assert_eq!(last.render(), "'NY'");
    }

    #[test]
    fn escaped_quote_inside_string() {
        let stream = lex("SELECT 'it''s'").unwrap();
        assert_eq!(stream.tokens[1].text, "it's");
        assert_eq!(stream.tokens[1].render(), "'it''s'");
    }

    #[test]
    fn quoted_names_are_identifiers() {
        for sql in ["SELECT \"order\" FROM t", "SELECT `order` FROM t", "SELECT [order] FROM t"] {
            let stream = lex(sql).unwrap();
            assert_eq!(stream.tokens[1].kind, TokenKind::Identifier, "{sql}");
            assert_eq!(stream.tokens[1].text, "order");
        }
    }

    #[test]
    fn date_shaped_strings() {
        assert!(is_date_shaped("2021-03-04"));
        assert!(is_date_shaped("2021-03-04 10:00"));
        assert!(is_date_shaped("2021-03-04 10:00:00"));
        assert!(!is_date_shaped("2021-3-4"));
        assert!(!is_date_shaped("hello"));
        assert!(!is_date_shaped("2021-03-04T10:00:00"));
        assert_eq!(kinds("SELECT '2021-03-04'")[1], TokenKind::DateLiteral);
        assert_eq!(kinds("SELECT '2021-03-04 10:00:00'")[1], TokenKind::DateLiteral);
        assert_eq!(kinds("SELECT 'NY'")[1], TokenKind::StringLiteral);
    }

    #[test]
    fn literal_like_keywords() {
        use TokenKind::*;
        assert_eq!(kinds("SELECT TRUE, false, NULL"), vec![
            Keyword, BooleanLiteral, Punct, BooleanLiteral, Punct, NullLiteral
        ]);
    }

    #[test]
    fn classify_literal_table() {
        assert_eq!(classify_literal("50000"), LiteralKind::Num);
        assert_eq!(classify_literal("3.14"), LiteralKind::Num);
        assert_eq!(classify_literal("NULL"), LiteralKind::Others);
        assert_eq!(classify_literal("TRUE"), LiteralKind::Boolean);
        assert_eq!(classify_literal("'2021-03-04'"), LiteralKind::Date);
        assert_eq!(classify_literal("'NY'"), LiteralKind::Str);
    }

    #[test]
    fn star_is_its_own_token() {
        let stream = lex("SELECT COUNT(*) FROM subscribers").unwrap();
        assert_eq!(stream.tokens[2].kind, TokenKind::Punct);
        assert_eq!(stream.tokens[3].kind, TokenKind::Star);
    }

    #[test]
    fn params() {
        use TokenKind::*;
        assert_eq!(kinds("WHERE a = ? AND b = ?2 AND c = :name AND d = @x"), vec![
            Keyword, Identifier, Operator, Param, Keyword, Identifier, Operator, Param, Keyword,
            Identifier, Operator, Param, Keyword, Identifier, Operator, Param
        ]);
    }

    #[test]
    fn numbers() {
        assert_eq!(texts("SELECT 1, 1.5, .5, 1e10, 1.5E-3, 0xFF"), vec![
            "SELECT", "1", ",", "1.5", ",", ".5", ",", "1e10", ",", "1.5E-3", ",", "0xFF"
        ]);
        // qualified name after a digit run must not eat the dot
        assert_eq!(texts("SELECT t1.c FROM t1")[1..4], ["t1", ".", "c"]);
    }

    #[test]
    fn trailing_semicolon_ok_multiple_statements_err() {
        assert!(lex("SELECT 1;").is_ok());
        assert!(lex("SELECT 1 ; ").is_ok());
        assert_eq!(lex("SELECT 1; SELECT 2"), Err(LexError::MultipleStatements));
    }

    #[test]
    fn error_cases() {
        assert_eq!(lex("SELECT 'oops"), Err(LexError::UnterminatedString(7)));
        assert_eq!(lex("SELECT /* x"), Err(LexError::UnterminatedComment(7)));
        assert_eq!(lex("  -- nothing\n"), Err(LexError::EmptyInput));
        assert_eq!(lex(""), Err(LexError::EmptyInput));
    }

    #[test]
    fn render_relex_idempotent() {
        let samples = [
            "SELECT name FROM employees WHERE salary > 50000",
            "SELECT c.name FROM customers AS c JOIN orders AS o ON c.id = o.customer_id WHERE o.amount > 100 ORDER BY o.amount DESC LIMIT 10",
            "SELECT \"order\", 'it''s', '2021-03-04', x'CAFE' FROM [weird table] WHERE a != 3 AND b || 'x' <> 'y'",
            "WITH grouped AS (SELECT class_name, COUNT(*) AS cnt FROM actions GROUP BY class_name) SELECT * FROM grouped WHERE cnt > (SELECT AVG(cnt) FROM grouped) ORDER BY cnt DESC",
        ];
        for sql in samples {
            let first = lex(sql).unwrap();
            let second = lex(&first.render()).unwrap();
            assert_eq!(first.tokens, second.tokens, "{sql}");
        }
    }

    #[test]
    fn keyword_closure() {
        let sql = "SELECT frobnicate, COUNT(*) FROM employees WHERE x GLOB 'a*' ORDER BY 2";
        for t in lex(sql).unwrap().tokens {
            match t.kind {
                TokenKind::Keyword => assert!(keywords::is_keyword(&t.upper())),
                TokenKind::Identifier => assert!(!keywords::is_keyword(&t.upper())),
                _ => {}
            }
        }
    }

    #[test]
    fn script_splitting() {
        let stmts = lex_script("CREATE TABLE a (x INT); CREATE TABLE b (y INT);").unwrap();
        assert_eq!(stmts.len(), 2);
        assert_eq!(stmts[1].tokens[2].text, "b");
    }
}
