//! Line-oriented reader for an N-Triples subset.
//!
//! Supported per line: `<iri>` tokens (taken verbatim), `"..."` literals with
//! the usual backslash escapes and an optional `@lang` or `^^<iri>` suffix,
//! `_:label` blank nodes, a terminating `.`, `#` comments, and blank lines.

use crate::store::Term;

/// Parses one line. Returns `Ok(None)` for blank and comment lines and
/// `Err(message)` for malformed input; the caller supplies line numbers.
pub fn parse_line(line: &str) -> Result<Option<(Term, Term, Term)>, String> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }

    let subject = parse_subject(&mut cur)?;
    cur.require_ws("after subject")?;
    let predicate = parse_predicate(&mut cur)?;
    cur.require_ws("after predicate")?;
    let object = parse_object(&mut cur)?;

    cur.skip_ws();
    if cur.bump() != Some('.') {
        return Err("expected '.' at end of statement".into());
    }
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err("unexpected trailing content after '.'".into());
    }
    Ok(Some((subject, predicate, object)))
}

fn parse_subject(cur: &mut Cursor) -> Result<Term, String> {
    match cur.peek() {
        Some('<') => parse_iri(cur).map(Term::Iri),
        Some('_') => parse_blank(cur),
        _ => Err("subject must be an IRI or blank node".into()),
    }
}

fn parse_predicate(cur: &mut Cursor) -> Result<Term, String> {
    match cur.peek() {
        Some('<') => parse_iri(cur).map(Term::Iri),
        _ => Err("predicate must be an IRI".into()),
    }
}

fn parse_object(cur: &mut Cursor) -> Result<Term, String> {
    match cur.peek() {
        Some('<') => parse_iri(cur).map(Term::Iri),
        Some('_') => parse_blank(cur),
        Some('"') => parse_literal(cur),
        _ => Err("object must be an IRI, blank node or literal".into()),
    }
}

fn parse_iri(cur: &mut Cursor) -> Result<String, String> {
    cur.bump(); // '<'
    let mut iri = String::new();
    loop {
        match cur.bump() {
            Some('>') => break,
            Some(c) => iri.push(c),
            None => return Err("unterminated IRI".into()),
        }
    }
    if iri.is_empty() {
        return Err("empty IRI".into());
    }
    Ok(iri)
}

fn parse_blank(cur: &mut Cursor) -> Result<Term, String> {
    cur.bump(); // '_'
    if cur.bump() != Some(':') {
        return Err("blank node must start with '_:'".into());
    }
    let label = cur.take_while(|c| c.is_alphanumeric() || c == '_' || c == '-');
    if label.is_empty() {
        return Err("empty blank node label".into());
    }
    Ok(Term::BlankNode(label))
}

/// Literal lexical form plus any `@lang` / `^^<iri>` suffix, folded into one
/// opaque dictionary key.
fn parse_literal(cur: &mut Cursor) -> Result<Term, String> {
    cur.bump(); // '"'
    let mut lex = String::new();
    loop {
        match cur.bump() {
            Some('"') => break,
            Some('\\') => lex.push(unescape(cur)?),
            Some(c) => lex.push(c),
            None => return Err("unterminated literal".into()),
        }
    }
    match cur.peek() {
        Some('@') => {
            cur.bump();
            let tag = cur.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
            if tag.is_empty() {
                return Err("empty language tag".into());
            }
            lex.push('@');
            lex.push_str(&tag);
        }
        Some('^') => {
            cur.bump();
            if cur.bump() != Some('^') {
                return Err("expected '^^' before datatype IRI".into());
            }
            if cur.peek() != Some('<') {
                return Err("datatype must be an IRI".into());
            }
            let dt = parse_iri(cur)?;
            lex.push_str("^^");
            lex.push_str(&dt);
        }
        _ => {}
    }
    Ok(Term::Literal(lex))
}

fn unescape(cur: &mut Cursor) -> Result<char, String> {
    match cur.bump() {
        Some('t') => Ok('\t'),
        Some('b') => Ok('\u{8}'),
        Some('n') => Ok('\n'),
        Some('r') => Ok('\r'),
        Some('f') => Ok('\u{c}'),
        Some('"') => Ok('"'),
        Some('\'') => Ok('\''),
        Some('\\') => Ok('\\'),
        Some('u') => unescape_hex(cur, 4),
        Some('U') => unescape_hex(cur, 8),
        Some(c) => Err(format!("unknown escape '\\{c}'")),
        None => Err("truncated escape".into()),
    }
}

fn unescape_hex(cur: &mut Cursor, digits: usize) -> Result<char, String> {
    let mut code = 0u32;
    for _ in 0..digits {
        let d = cur
            .bump()
            .and_then(|c| c.to_digit(16))
            .ok_or("bad hex digit in escape")?;
        code = code * 16 + d;
    }
    char::from_u32(code).ok_or_else(|| format!("invalid code point U+{code:X}"))
}

struct Cursor<'a> {
    rest: std::str::Chars<'a>,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Cursor { rest: s.chars() }
    }

    fn peek(&self) -> Option<char> {
        self.rest.clone().next()
    }

    fn bump(&mut self) -> Option<char> {
        self.rest.next()
    }

    fn at_end(&self) -> bool {
        self.peek().is_none()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn require_ws(&mut self, context: &str) -> Result<(), String> {
        if !matches!(self.peek(), Some(c) if c.is_whitespace()) {
            return Err(format!("expected whitespace {context}"));
        }
        self.skip_ws();
        Ok(())
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while matches!(self.peek(), Some(c) if pred(c)) {
            out.push(self.bump().unwrap());
        }
        out
    }
}
