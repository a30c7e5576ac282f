//! Recursive-descent parser for the SELECT / OPTIONAL / UNION / FILTER subset.

use std::collections::HashMap;

use super::{check_safe_filters, check_well_designed, CmpOp, FilterExpr, PatternNode, Query, TriplePattern};
use crate::error::{Error, Result};
use crate::term::{Term, TermOrVar, Variable, XSD_INTEGER};

/// Namespace bound to the empty prefix `:` unless the query rebinds it.
pub const DEFAULT_PREFIX: &str = "http://example.org/";

const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Parses a query and applies the safe-filter and well-designedness checks.
pub fn parse(text: &str) -> Result<Query> {
    let mut p = Parser::new(text);
    let query = p.query()?;
    check_safe_filters(&query.root)?;
    check_well_designed(&query.root)?;
    Ok(query)
}

/// Parses a bare filter expression such as `?a > 3 && ?b != :x`.
pub fn parse_filter(text: &str) -> Result<FilterExpr> {
    let mut p = Parser::new(text);
    let expr = p.or_expr()?;
    p.ws();
    if !p.at_end() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    s: &'a str,
    pos: usize,
    prefixes: HashMap<String, String>,
    next_index: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        let prefixes = [
            ("", DEFAULT_PREFIX),
            ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
            ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
            ("xsd", "http://www.w3.org/2001/XMLSchema#"),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        Parser { s, pos: 0, prefixes, next_index: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Syntax { offset: self.pos, message: msg.into() }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn ws(&mut self) {
        loop {
            let rest = self.rest();
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with('#') {
                self.pos += trimmed.find('\n').unwrap_or(trimmed.len());
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{tok}`")))
        }
    }

    /// Case-insensitive keyword that is not followed by a name character.
    fn keyword(&mut self, kw: &str) -> bool {
        self.ws();
        let rest = self.rest();
        if rest.len() >= kw.len()
            && rest[..kw.len()].eq_ignore_ascii_case(kw)
            && !rest[kw.len()..].starts_with(|c: char| c.is_alphanumeric() || c == '_' || c == ':')
        {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn query(&mut self) -> Result<Query> {
        while self.keyword("PREFIX") {
            self.ws();
            let name_start = self.pos;
            let name = self.name_chars();
            if !self.rest().starts_with(':') {
                self.pos = name_start;
                return Err(self.err("expected prefix name ending in `:`"));
            }
            self.pos += 1;
            self.ws();
            if self.peek() != Some('<') {
                return Err(self.err("expected IRI after PREFIX name"));
            }
            let iri = self.iri_ref()?;
            self.prefixes.insert(name.to_string(), iri);
        }
        if !self.keyword("SELECT") {
            return Err(self.err("expected SELECT"));
        }
        let distinct = self.keyword("DISTINCT");
        let mut projection = Vec::new();
        let mut projection_offsets = Vec::new();
        let star = self.eat("*");
        if !star {
            loop {
                self.ws();
                if !matches!(self.peek(), Some('?' | '$')) {
                    break;
                }
                projection_offsets.push(self.pos);
                projection.push(self.variable()?);
            }
            if projection.is_empty() {
                return Err(self.err("expected projection variables or `*`"));
            }
        }
        self.keyword("WHERE");
        self.ws();
        let root = self.group()?;
        self.ws();
        if !self.at_end() {
            return Err(self.err("unexpected input after query"));
        }
        if star {
            projection = root.vars_in_order();
        } else {
            let bound = root.vars();
            for (v, &offset) in projection.iter().zip(&projection_offsets) {
                if !bound.contains(v) {
                    return Err(Error::Syntax {
                        offset,
                        message: format!("projected variable {v} does not occur in the WHERE clause"),
                    });
                }
            }
        }
        Ok(Query { projection, distinct, root })
    }

    fn group(&mut self) -> Result<PatternNode> {
        self.expect("{")?;
        let mut acc: Option<PatternNode> = None;
        let mut pending: Vec<TriplePattern> = Vec::new();
        let mut filters: Vec<FilterExpr> = Vec::new();
        let flush = |acc: &mut Option<PatternNode>, pending: &mut Vec<TriplePattern>| {
            if !pending.is_empty() {
                let bgp = PatternNode::Bgp(std::mem::take(pending));
                *acc = Some(match acc.take() {
                    None => bgp,
                    Some(prev) => join_nonempty(prev, bgp),
                });
            }
        };
        loop {
            self.ws();
            if self.eat("}") {
                break;
            }
            if self.at_end() {
                return Err(self.err("unterminated group, expected `}`"));
            }
            if self.eat(".") {
                continue;
            }
            if self.keyword("OPTIONAL") {
                flush(&mut acc, &mut pending);
                let right = self.group()?;
                let left = acc.take().unwrap_or(PatternNode::Bgp(Vec::new()));
                acc = Some(PatternNode::left_join(left, right));
            } else if self.keyword("FILTER") {
                self.ws();
                if self.peek() != Some('(') {
                    return Err(self.err("expected `(` after FILTER"));
                }
                filters.push(self.primary()?);
            } else if self.keyword("UNION") {
                return Err(self.err("UNION must follow a group"));
            } else if self.peek() == Some('{') {
                flush(&mut acc, &mut pending);
                let mut node = self.group()?;
                while self.keyword("UNION") {
                    self.ws();
                    let right = self.group()?;
                    node = PatternNode::union(node, right);
                }
                acc = Some(match acc.take() {
                    None => node,
                    Some(prev) => join_nonempty(prev, node),
                });
            } else {
                self.triples_same_subject(&mut pending)?;
            }
        }
        flush(&mut acc, &mut pending);
        let node = acc.unwrap_or(PatternNode::Bgp(Vec::new()));
        Ok(match FilterExpr::conjoin(filters) {
            Some(expr) => PatternNode::filter(node, expr),
            None => node,
        })
    }

    fn triples_same_subject(&mut self, out: &mut Vec<TriplePattern>) -> Result<()> {
        let subject = self.term_or_var()?;
        if matches!(subject, TermOrVar::Term(ref t) if t.is_literal()) {
            return Err(self.err("literal in subject position"));
        }
        loop {
            self.ws();
            let predicate = if self.keyword("a") {
                TermOrVar::Term(Term::iri(RDF_TYPE))
            } else {
                self.term_or_var()?
            };
            if matches!(predicate, TermOrVar::Term(ref t) if t.is_literal()) {
                return Err(self.err("literal in predicate position"));
            }
            loop {
                let object = self.term_or_var()?;
                out.push(TriplePattern::new(subject.clone(), predicate.clone(), object, self.next_index));
                self.next_index += 1;
                if !self.eat(",") {
                    break;
                }
            }
            if !self.eat(";") {
                return Ok(());
            }
            self.ws();
            if matches!(self.peek(), Some('.' | '}')) {
                return Ok(());
            }
        }
    }

    fn name_chars(&mut self) -> &'a str {
        let rest = self.rest();
        let len = rest
            .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '-'))
            .unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn variable(&mut self) -> Result<Variable> {
        self.ws();
        if !matches!(self.peek(), Some('?' | '$')) {
            return Err(self.err("expected variable"));
        }
        self.pos += 1;
        let name = self.name_chars();
        if name.is_empty() {
            return Err(self.err("empty variable name"));
        }
        Ok(Variable::new(name))
    }

    fn iri_ref(&mut self) -> Result<String> {
        let start = self.pos;
        self.pos += 1;
        match self.rest().find(|c: char| c == '>' || c.is_whitespace() || c == '<') {
            Some(i) if self.rest()[i..].starts_with('>') => {
                let iri = self.rest()[..i].to_string();
                self.pos += i + 1;
                Ok(iri)
            }
            _ => {
                self.pos = start;
                Err(self.err("unterminated IRI"))
            }
        }
    }

    fn term_or_var(&mut self) -> Result<TermOrVar> {
        self.ws();
        match self.peek() {
            Some('?' | '$') => Ok(TermOrVar::Var(self.variable()?)),
            Some('_') if self.rest().starts_with("_:") => Err(self.err("blank nodes are not supported in queries")),
            Some(_) => Ok(TermOrVar::Term(self.term()?)),
            None => Err(self.err("unexpected end of query")),
        }
    }

    fn term(&mut self) -> Result<Term> {
        self.ws();
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('"') => self.string_literal(),
            Some(c) if c.is_ascii_digit() || c == '-' || c == '+' => self.integer(),
            Some(c) if c.is_alphabetic() || c == ':' => self.prefixed_name(),
            Some(c) => Err(self.err(format!("unexpected character `{c}`"))),
            None => Err(self.err("unexpected end of query")),
        }
    }

    fn prefixed_name(&mut self) -> Result<Term> {
        let start = self.pos;
        let prefix = self.name_chars();
        if !self.rest().starts_with(':') {
            self.pos = start;
            return Err(self.err("expected a prefixed name"));
        }
        self.pos += 1;
        let local = self.name_chars();
        match self.prefixes.get(prefix) {
            Some(ns) => Ok(Term::Iri(format!("{ns}{local}"))),
            None => Err(Error::UnknownPrefix(prefix.to_string())),
        }
    }

    fn integer(&mut self) -> Result<Term> {
        let rest = self.rest();
        let sign = usize::from(rest.starts_with(['-', '+']));
        let digits = rest[sign..].find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len() - sign);
        if digits == 0 {
            return Err(self.err("expected an integer"));
        }
        let text = &rest[..sign + digits];
        let value = text.parse::<i64>().map_err(|_| self.err("integer out of range"))?;
        self.pos += sign + digits;
        Ok(Term::Int(value))
    }

    fn string_literal(&mut self) -> Result<Term> {
        self.pos += 1;
        let mut value = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(self.err("unterminated string literal"));
            };
            self.pos += c.len_utf8();
            match c {
                '"' => break,
                '\\' => {
                    let e = self.peek().ok_or_else(|| self.err("unterminated escape"))?;
                    self.pos += e.len_utf8();
                    value.push(match e {
                        'n' => '\n',
                        't' => '\t',
                        'r' => '\r',
                        '"' => '"',
                        '\\' => '\\',
                        '\'' => '\'',
                        _ => return Err(self.err("invalid escape sequence")),
                    });
                }
                c => value.push(c),
            }
        }
        if self.rest().starts_with("^^") {
            self.pos += 2;
            let dt = match self.peek() {
                Some('<') => self.iri_ref()?,
                _ => match self.prefixed_name()? {
                    Term::Iri(i) => i,
                    _ => unreachable!(),
                },
            };
            if dt == XSD_INTEGER {
                return value
                    .trim()
                    .parse()
                    .map(Term::Int)
                    .map_err(|_| self.err(format!("invalid integer literal `{value}`")));
            }
            if dt != "http://www.w3.org/2001/XMLSchema#string" {
                return Err(self.err(format!("unsupported datatype <{dt}>")));
            }
        } else if self.rest().starts_with('@') {
            return Err(self.err("language-tagged literals are not supported"));
        }
        Ok(Term::Str(value))
    }

    fn or_expr(&mut self) -> Result<FilterExpr> {
        let mut left = self.and_expr()?;
        while self.eat("||") {
            left = FilterExpr::or(left, self.and_expr()?);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<FilterExpr> {
        let mut left = self.unary()?;
        while self.eat("&&") {
            left = FilterExpr::and(left, self.unary()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<FilterExpr> {
        self.ws();
        if self.rest().starts_with('!') && !self.rest().starts_with("!=") {
            self.pos += 1;
            return Ok(FilterExpr::negate(self.unary()?));
        }
        if self.peek() == Some('(') {
            return self.primary();
        }
        self.comparison()
    }

    fn primary(&mut self) -> Result<FilterExpr> {
        self.expect("(")?;
        let e = self.or_expr()?;
        self.expect(")")?;
        Ok(e)
    }

    fn comparison(&mut self) -> Result<FilterExpr> {
        let left = self.term_or_var()?;
        self.ws();
        let op = if self.eat("!=") {
            CmpOp::Ne
        } else if self.eat("<=") {
            CmpOp::Le
        } else if self.eat(">=") {
            CmpOp::Ge
        } else if self.eat("=") {
            CmpOp::Eq
        } else if self.eat("<") {
            CmpOp::Lt
        } else if self.eat(">") {
            CmpOp::Gt
        } else {
            return Err(self.err("expected a comparison operator"));
        };
        let right = self.term_or_var()?;
        Ok(FilterExpr::Cmp(op, left, right))
    }
}

/// Joins two group elements, treating the empty BGP as the identity.
fn join_nonempty(l: PatternNode, r: PatternNode) -> PatternNode {
    if l.is_empty_bgp() {
        r
    } else if r.is_empty_bgp() {
        l
    } else {
        PatternNode::join(l, r)
    }
}
