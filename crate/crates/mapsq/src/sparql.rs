//! Parser for the supported SPARQL subset: `SELECT` over one basic graph
//! pattern.
//!
//! Grammar: `SELECT` (`?var`+ | `*`) `WHERE` `{` pattern (`.` pattern)* [`.`] `}`
//! where each pattern position is a `?var`, a `<iri>`, a bare identifier
//! (treated as an IRI), or a quoted literal. Errors carry 1-based line and
//! column.

use std::fmt;
use thiserror::Error;

use crate::store::Term;

/// One triple-pattern position: a constant term or a variable name (without
/// the leading `?`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermOrVar {
    Const(Term),
    Var(String),
}

impl TermOrVar {
    pub fn as_var(&self) -> Option<&str> {
        match self {
            TermOrVar::Var(name) => Some(name),
            TermOrVar::Const(_) => None,
        }
    }
}

impl fmt::Display for TermOrVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermOrVar::Var(name) => write!(f, "?{name}"),
            TermOrVar::Const(Term::Iri(iri)) => write!(f, "<{iri}>"),
            TermOrVar::Const(term) => write!(f, "{term}"),
        }
    }
}

/// A subject/predicate/object pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub s: TermOrVar,
    pub p: TermOrVar,
    pub o: TermOrVar,
}

impl TriplePattern {
    pub fn positions(&self) -> [&TermOrVar; 3] {
        [&self.s, &self.p, &self.o]
    }

    /// Variable names in (s, p, o) order, repeated occurrences included.
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.positions().into_iter().filter_map(|t| t.as_var())
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.s, self.p, self.o)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    /// `SELECT *`
    All,
    /// Explicit variable list, in textual order.
    Vars(Vec<String>),
}

/// A parsed SELECT query over a basic graph pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub projection: Projection,
    pub patterns: Vec<TriplePattern>,
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SELECT")?;
        match &self.projection {
            Projection::All => write!(f, " *")?,
            Projection::Vars(vars) => {
                for v in vars {
                    write!(f, " ?{v}")?;
                }
            }
        }
        write!(f, " WHERE {{")?;
        for p in &self.patterns {
            write!(f, " {p} .")?;
        }
        write!(f, " }}")
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Parses a query, checking that every projected variable occurs in at least
/// one pattern.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    Parser::new(text).parse()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Select,
    Where,
    Star,
    LBrace,
    RBrace,
    Dot,
    Var(String),
    Iri(String),
    Literal(String),
    Ident(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Select => "'SELECT'".into(),
            Tok::Where => "'WHERE'".into(),
            Tok::Star => "'*'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Dot => "'.'".into(),
            Tok::Var(v) => format!("variable ?{v}"),
            Tok::Iri(_) => "IRI".into(),
            Tok::Literal(_) => "literal".into(),
            Tok::Ident(i) => format!("'{i}'"),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    /// Position of the most recently produced token.
    tok_line: usize,
    tok_column: usize,
}

impl Parser {
    fn new(text: &str) -> Parser {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            tok_line: 1,
            tok_column: 1,
        }
    }

    fn parse(mut self) -> Result<Query, ParseError> {
        self.expect(Tok::Select)?;
        let mut projected_at = Vec::new();
        let projection = match self.next_token()? {
            Tok::Star => Projection::All,
            Tok::Var(first) => {
                projected_at.push((first.clone(), self.tok_line, self.tok_column));
                let mut vars = vec![first];
                while let Tok::Var(_) = self.peek_token()? {
                    if let Tok::Var(v) = self.next_token()? {
                        projected_at.push((v.clone(), self.tok_line, self.tok_column));
                        vars.push(v);
                    }
                }
                Projection::Vars(vars)
            }
            other => {
                return Err(self.error_at_token(format!(
                    "expected '*' or a variable after SELECT, found {}",
                    other.describe()
                )))
            }
        };
        self.expect(Tok::Where)?;
        self.expect(Tok::LBrace)?;

        let mut patterns = Vec::new();
        loop {
            if patterns.is_empty() && self.peek_token()? == Tok::RBrace {
                let _ = self.next_token();
                return Err(
                    self.error_at_token("a query needs at least one triple pattern".to_string())
                );
            }
            let s = self.parse_term_or_var()?;
            let p = self.parse_term_or_var()?;
            let o = self.parse_term_or_var()?;
            patterns.push(TriplePattern { s, p, o });
            match self.next_token()? {
                Tok::Dot => {
                    if self.peek_token()? == Tok::RBrace {
                        let _ = self.next_token();
                        break;
                    }
                }
                Tok::RBrace => break,
                other => {
                    return Err(self.error_at_token(format!(
                        "expected '.' or '}}' after a pattern, found {}",
                        other.describe()
                    )))
                }
            }
        }
        let trailing = self.next_token()?;
        if trailing != Tok::Eof {
            return Err(
                self.error_at_token(format!("unexpected {} after '}}'", trailing.describe()))
            );
        }

        // Every projected variable must be bound by some pattern.
        if let Projection::Vars(_) = &projection {
            for (name, line, column) in &projected_at {
                let bound = patterns.iter().any(|p| p.variables().any(|v| v == name));
                if !bound {
                    return Err(ParseError {
                        line: *line,
                        column: *column,
                        message: format!(
                            "projected variable ?{name} does not appear in any pattern"
                        ),
                    });
                }
            }
        }

        Ok(Query {
            projection,
            patterns,
        })
    }

    fn parse_term_or_var(&mut self) -> Result<TermOrVar, ParseError> {
        match self.next_token()? {
            Tok::Var(name) => Ok(TermOrVar::Var(name)),
            Tok::Iri(iri) => Ok(TermOrVar::Const(Term::Iri(iri))),
            Tok::Ident(ident) => Ok(TermOrVar::Const(Term::Iri(ident))),
            Tok::Literal(lex) => Ok(TermOrVar::Const(Term::Literal(lex))),
            other => Err(self.error_at_token(format!(
                "expected a variable, IRI or literal, found {}",
                other.describe()
            ))),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let got = self.next_token()?;
        if got == want {
            Ok(())
        } else {
            Err(self.error_at_token(format!(
                "expected {}, found {}",
                want.describe(),
                got.describe()
            )))
        }
    }

    fn error_at_token(&self, message: String) -> ParseError {
        ParseError {
            line: self.tok_line,
            column: self.tok_column,
            message,
        }
    }

    fn error_here(&self, message: String) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            message,
        }
    }

    fn peek_token(&mut self) -> Result<Tok, ParseError> {
        let save = (
            self.pos,
            self.line,
            self.column,
            self.tok_line,
            self.tok_column,
        );
        let tok = self.next_token()?;
        (
            self.pos,
            self.line,
            self.column,
            self.tok_line,
            self.tok_column,
        ) = save;
        Ok(tok)
    }

    fn next_token(&mut self) -> Result<Tok, ParseError> {
        self.skip_ws();
        self.tok_line = self.line;
        self.tok_column = self.column;
        let c = match self.peek() {
            Some(c) => c,
            None => return Ok(Tok::Eof),
        };
        match c {
            '*' => {
                self.bump();
                Ok(Tok::Star)
            }
            '{' => {
                self.bump();
                Ok(Tok::LBrace)
            }
            '}' => {
                self.bump();
                Ok(Tok::RBrace)
            }
            '.' => {
                self.bump();
                Ok(Tok::Dot)
            }
            '?' => {
                self.bump();
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                if name.is_empty() {
                    Err(self.error_at_token("expected a variable name after '?'".into()))
                } else {
                    Ok(Tok::Var(name))
                }
            }
            '<' => {
                self.bump();
                let mut iri = String::new();
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some(c) => iri.push(c),
                        None => return Err(self.error_at_token("unterminated IRI".into())),
                    }
                }
                if iri.is_empty() {
                    return Err(self.error_at_token("empty IRI".into()));
                }
                Ok(Tok::Iri(iri))
            }
            '"' => self.lex_literal(),
            c if c.is_alphabetic() || c == '_' => {
                let ident = self.take_while(|c| c.is_alphanumeric() || c == '_' || c == '-');
                if ident.eq_ignore_ascii_case("select") {
                    Ok(Tok::Select)
                } else if ident.eq_ignore_ascii_case("where") {
                    Ok(Tok::Where)
                } else {
                    Ok(Tok::Ident(ident))
                }
            }
            other => Err(self.error_here(format!("unexpected character '{other}'"))),
        }
    }

    fn lex_literal(&mut self) -> Result<Tok, ParseError> {
        self.bump(); // opening quote
        let mut lex = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => lex.push(self.lex_escape()?),
                Some(c) => lex.push(c),
                None => return Err(self.error_at_token("unterminated literal".into())),
            }
        }
        // Fold @lang / ^^<iri> suffixes into the opaque lexical key.
        match self.peek() {
            Some('@') => {
                self.bump();
                let tag = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                if tag.is_empty() {
                    return Err(self.error_here("empty language tag".into()));
                }
                lex.push('@');
                lex.push_str(&tag);
            }
            Some('^') => {
                self.bump();
                if self.bump() != Some('^') || self.peek() != Some('<') {
                    return Err(self.error_here("expected '^^<iri>' datatype suffix".into()));
                }
                self.bump();
                let mut dt = String::new();
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some(c) => dt.push(c),
                        None => return Err(self.error_here("unterminated datatype IRI".into())),
                    }
                }
                lex.push_str("^^");
                lex.push_str(&dt);
            }
            _ => {}
        }
        Ok(Tok::Literal(lex))
    }

    fn lex_escape(&mut self) -> Result<char, ParseError> {
        match self.bump() {
            Some('t') => Ok('\t'),
            Some('b') => Ok('\u{8}'),
            Some('n') => Ok('\n'),
            Some('r') => Ok('\r'),
            Some('f') => Ok('\u{c}'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some('\\') => Ok('\\'),
            Some(c) => Err(self.error_here(format!("unknown escape '\\{c}'"))),
            None => Err(self.error_here("truncated escape".into())),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while matches!(self.peek(), Some(c) if pred(c)) {
            out.push(self.bump().unwrap());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(name: &str) -> TermOrVar {
        TermOrVar::Var(name.into())
    }

    fn iri(name: &str) -> TermOrVar {
        TermOrVar::Const(Term::iri(name))
    }

    #[test]
    fn parses_job_query() {
        let q =
            parse_query("SELECT ?person WHERE { ?person hasJob ?job. ?job workAt \"Hospital\".}")
                .unwrap();
        assert_eq!(q.projection, Projection::Vars(vec!["person".into()]));
        assert_eq!(
            q.patterns,
            vec![
                TriplePattern {
                    s: var("person"),
                    p: iri("hasJob"),
                    o: var("job"),
                },
                TriplePattern {
                    s: var("job"),
                    p: iri("workAt"),
                    o: TermOrVar::Const(Term::literal("Hospital")),
                },
            ]
        );
    }

    #[test]
    fn parses_select_all() {
        let q = parse_query("SELECT * WHERE { ?s ?p ?o . }").unwrap();
        assert_eq!(q.projection, Projection::All);
        assert_eq!(q.patterns.len(), 1);
        assert_eq!(
            q.patterns[0],
            TriplePattern {
                s: var("s"),
                p: var("p"),
                o: var("o"),
            }
        );
    }

    #[test]
    fn unbound_projection_is_a_semantic_error() {
        let err = parse_query("SELECT ?x WHERE { ?y p q . }").unwrap_err();
        assert!(err.message.contains("?x"), "message: {}", err.message);
        assert_eq!((err.line, err.column), (1, 8));
    }

    #[test]
    fn trailing_dot_is_optional() {
        let with = parse_query("SELECT ?s WHERE { ?s p o . }").unwrap();
        let without = parse_query("SELECT ?s WHERE { ?s p o }").unwrap();
        assert_eq!(with, without);
    }

    #[test]
    fn bracketed_iris_and_literal_suffixes() {
        let q = parse_query(
            "SELECT ?s WHERE { ?s <http://x/p> \"v\"@en . ?s p \"5\"^^<http://n#int> }",
        )
        .unwrap();
        assert_eq!(q.patterns[0].p, iri("http://x/p"));
        assert_eq!(q.patterns[0].o, TermOrVar::Const(Term::literal("v@en")));
        assert_eq!(
            q.patterns[1].o,
            TermOrVar::Const(Term::literal("5^^http://n#int"))
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_query("SELECT ?x WHERE\n{ ?x p }").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.column > 1);

        let err = parse_query("SELECT WHERE { ?x p q }").unwrap_err();
        assert_eq!((err.line, err.column), (1, 8));

        let err = parse_query("SELECT ?x WHERE { }").unwrap_err();
        assert!(err.message.contains("at least one"));
    }

    #[test]
    fn empty_group_and_trailing_garbage_rejected() {
        assert!(parse_query("SELECT * WHERE { ?s p o } tail").is_err());
        assert!(parse_query("SELECT * WHERE { }").is_err());
        assert!(parse_query("").is_err());
    }

    #[test]
    fn keywords_are_case_insensitive_variables_are_not() {
        let q = parse_query("select ?A where { ?A p ?a }").unwrap();
        assert_eq!(q.projection, Projection::Vars(vec!["A".into()]));
        let vars: Vec<&str> = q.patterns[0].variables().collect();
        assert_eq!(vars, vec!["A", "a"]);
    }

    #[test]
    fn display_round_trips() {
        let texts = [
            "SELECT ?person WHERE { ?person hasJob ?job. ?job workAt \"Hospital\".}",
            "SELECT * WHERE { ?s ?p ?o }",
            "SELECT ?s ?o WHERE { ?s <http://x/p> ?o . ?s q \"a\\\"b\" }",
        ];
        for text in texts {
            let q = parse_query(text).unwrap();
            let printed = q.to_string();
            let reparsed = parse_query(&printed).unwrap();
            assert_eq!(q, reparsed, "round-trip failed for {printed:?}");
        }
    }
}
