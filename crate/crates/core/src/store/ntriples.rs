//! Line-oriented N-Triples reader for IRIs, plain string literals and
//! `xsd:integer` literals.

use std::collections::HashSet;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::term::{Term, XSD_INTEGER};

pub type Triple = (Term, Term, Term);

const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";

/// Reads every triple from `input`, dropping exact duplicates while keeping
/// first-appearance order.
pub fn read_ntriples(input: impl BufRead) -> Result<Vec<Triple>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if let Some(triple) = parse_line(&line).map_err(|message| Error::NTriples { line: lineno, message })? {
            if seen.insert(triple.clone()) {
                out.push(triple);
            }
        }
    }
    Ok(out)
}

/// Parses one line; `Ok(None)` for blank lines and comments.
pub fn parse_line(line: &str) -> std::result::Result<Option<Triple>, String> {
    let mut cur = Cursor { s: line, pos: 0 };
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let s = cur.term()?;
    if s.is_literal() {
        return Err("literal in subject position".into());
    }
    cur.skip_ws();
    let p = cur.term()?;
    if p.is_literal() {
        return Err("literal in predicate position".into());
    }
    cur.skip_ws();
    let o = cur.term()?;
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err("expected `.` after object".into());
    }
    cur.pos += 1;
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(format!("unexpected trailing input `{}`", cur.rest()));
    }
    Ok(Some((s, p, o)))
}

/// Parses a single term written in N-Triples syntax.
pub fn parse_term(text: &str) -> std::result::Result<Term, String> {
    let mut cur = Cursor { s: text, pos: 0 };
    cur.skip_ws();
    let t = cur.term()?;
    cur.skip_ws();
    if !cur.at_end() {
        return Err(format!("unexpected trailing input `{}`", cur.rest()));
    }
    Ok(t)
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.pos += 1;
        }
    }

    fn term(&mut self) -> std::result::Result<Term, String> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri()?)),
            Some('"') => self.literal(),
            Some('_') => Err("blank nodes are not supported".into()),
            Some(c) => Err(format!("unexpected character `{c}`")),
            None => Err("unexpected end of line".into()),
        }
    }

    fn iri(&mut self) -> std::result::Result<String, String> {
        self.bump();
        let start = self.pos;
        loop {
            match self.bump() {
                Some('>') => return Ok(self.s[start..self.pos - 1].to_string()),
                Some(c) if c == ' ' || c == '<' || c == '"' => {
                    return Err(format!("invalid character `{c}` in IRI"))
                }
                Some(_) => {}
                None => return Err("unterminated IRI".into()),
            }
        }
    }

    fn literal(&mut self) -> std::result::Result<Term, String> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => value.push(self.escape()?),
                Some(c) => value.push(c),
                None => return Err("unterminated literal".into()),
            }
        }
        match self.peek() {
            Some('^') => {
                if !self.rest().starts_with("^^<") {
                    return Err("malformed datatype".into());
                }
                self.pos += 2;
                let dt = self.iri()?;
                if dt == XSD_INTEGER {
                    value
                        .trim()
                        .parse::<i64>()
                        .map(Term::Int)
                        .map_err(|_| format!("invalid integer literal `{value}`"))
                } else if dt == XSD_STRING {
                    Ok(Term::Str(value))
                } else {
                    Err(format!("unsupported datatype <{dt}>"))
                }
            }
            Some('@') => Err("language-tagged literals are not supported".into()),
            _ => Ok(Term::Str(value)),
        }
    }

    fn escape(&mut self) -> std::result::Result<char, String> {
        match self.bump() {
            Some('t') => Ok('\t'),
            Some('n') => Ok('\n'),
            Some('r') => Ok('\r'),
            Some('b') => Ok('\u{8}'),
            Some('f') => Ok('\u{c}'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some('\\') => Ok('\\'),
            Some('u') => self.hex(4),
            Some('U') => self.hex(8),
            _ => Err("invalid escape sequence".into()),
        }
    }

    fn hex(&mut self, n: usize) -> std::result::Result<char, String> {
        let digits = self.rest().get(..n).ok_or("truncated unicode escape")?;
        let code = u32::from_str_radix(digits, 16).map_err(|_| "invalid unicode escape")?;
        self.pos += n;
        char::from_u32(code).ok_or_else(|| "invalid code point".to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_terms_and_dedups() {
        let src = "# comment\n\n<http://a> <http://p> \"x\\\"y\" .\n<http://a> <http://p> \"7\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n<http://a> <http://p> \"x\\\"y\" .\n";
        let triples = read_ntriples(src.as_bytes()).unwrap();
        assert_eq!(triples.len(), 2);
        assert_eq!(triples[0].2, Term::Str("x\"y".into()));
        assert_eq!(triples[1].2, Term::Int(7));
    }

    #[test]
    fn reports_line_numbers() {
        let src = "<http://a> <http://p> <http://b> .\n<http://a> <http://p> <http://b>\n";
        match read_ntriples(src.as_bytes()) {
            Err(Error::NTriples { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_literal_subject() {
        let err = parse_line("\"a\" <http://p> <http://b> .").unwrap_err();
        assert!(err.contains("subject"));
    }

    #[test]
    fn display_round_trips() {
        for t in [Term::iri("http://x/y"), Term::Str("tab\there \"q\"".into()), Term::Int(-3)] {
            assert_eq!(parse_term(&t.to_string()).unwrap(), t);
        }
    }
}
