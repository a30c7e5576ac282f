//! The infix algebra form: BGPs are named leaves, operators are written
//! `⋈`, `⟕`, `∪`, and a filter is a postfix `F(...)`.

use std::collections::HashMap;
use std::fmt;

use super::{parser, FilterExpr, PatternNode, TriplePattern};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Leaf(String),
    Join(Box<Shape>, Box<Shape>),
    LeftJoin(Box<Shape>, Box<Shape>),
    Union(Box<Shape>, Box<Shape>),
    Filter(Box<Shape>, String),
}

impl Shape {
    /// Names the BGPs of `node` P1..Pk from left to right. A left-join
    /// condition is shown as a filter on the optional side.
    pub fn of(node: &PatternNode) -> Shape {
        let mut next = 0;
        Self::build(node, &mut next)
    }

    fn build(node: &PatternNode, next: &mut usize) -> Shape {
        let mut bin = |l: &PatternNode, r: &PatternNode| (Box::new(Self::build(l, next)), Box::new(Self::build(r, next)));
        match node {
            PatternNode::Bgp(_) => {
                *next += 1;
                Shape::Leaf(format!("P{next}"))
            }
            PatternNode::Join(l, r) => {
                let (a, b) = bin(l, r);
                Shape::Join(a, b)
            }
            PatternNode::LeftJoin(l, r, cond) => {
                let (a, b) = bin(l, r);
                match cond {
                    None => Shape::LeftJoin(a, b),
                    Some(c) => Shape::LeftJoin(a, Box::new(Shape::Filter(b, c.to_string()))),
                }
            }
            PatternNode::Union(l, r) => {
                let (a, b) = bin(l, r);
                Shape::Union(a, b)
            }
            PatternNode::Filter(inner, expr) => Shape::Filter(Box::new(Self::build(inner, next)), expr.to_string()),
        }
    }

    /// Builds a pattern tree, looking up each leaf's triple patterns by name.
    pub fn instantiate(&self, bgps: &HashMap<String, Vec<TriplePattern>>) -> Result<PatternNode> {
        Ok(match self {
            Shape::Leaf(name) => PatternNode::Bgp(
                bgps.get(name)
                    .cloned()
                    .ok_or_else(|| Error::Contract(format!("no BGP named {name}")))?,
            ),
            Shape::Join(l, r) => PatternNode::join(l.instantiate(bgps)?, r.instantiate(bgps)?),
            Shape::LeftJoin(l, r) => PatternNode::left_join(l.instantiate(bgps)?, r.instantiate(bgps)?),
            Shape::Union(l, r) => PatternNode::union(l.instantiate(bgps)?, r.instantiate(bgps)?),
            Shape::Filter(inner, text) => {
                let expr: FilterExpr = parser::parse_filter(text)?;
                PatternNode::filter(inner.instantiate(bgps)?, expr)
            }
        })
    }

    pub fn leaves(&self) -> Vec<&str> {
        match self {
            Shape::Leaf(n) => vec![n.as_str()],
            Shape::Join(l, r) | Shape::LeftJoin(l, r) | Shape::Union(l, r) => {
                let mut v = l.leaves();
                v.extend(r.leaves());
                v
            }
            Shape::Filter(inner, _) => inner.leaves(),
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Leaf(_) => write!(f, "{self}"),
            _ => write!(f, "({self})"),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, op, r) = match self {
            Shape::Leaf(name) => return f.write_str(name),
            Shape::Filter(inner, text) => {
                inner.fmt_child(f)?;
                return write!(f, " F({text})");
            }
            Shape::Join(l, r) => (l, "⋈", r),
            Shape::LeftJoin(l, r) => (l, "⟕", r),
            Shape::Union(l, r) => (l, "∪", r),
        };
        l.fmt_child(f)?;
        write!(f, " {op} ")?;
        r.fmt_child(f)
    }
}

/// Parses the infix form produced by [`Shape`]'s `Display`.
pub fn parse_algebra(text: &str) -> Result<Shape> {
    let mut p = AlgebraParser { s: text, pos: 0 };
    let shape = p.expr()?;
    p.ws();
    if p.pos < text.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(shape)
}

struct AlgebraParser<'a> {
    s: &'a str,
    pos: usize,
}

impl AlgebraParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { offset: self.pos, message: msg.to_string() }
    }

    fn ws(&mut self) {
        let rest = &self.s[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.s[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Shape> {
        let mut left = self.postfix()?;
        loop {
            let ctor: fn(Box<Shape>, Box<Shape>) -> Shape = if self.eat("⋈") {
                Shape::Join
            } else if self.eat("⟕") {
                Shape::LeftJoin
            } else if self.eat("∪") {
                Shape::Union
            } else {
                return Ok(left);
            };
            let right = self.postfix()?;
            left = ctor(Box::new(left), Box::new(right));
        }
    }

    fn postfix(&mut self) -> Result<Shape> {
        let mut node = self.atom()?;
        while self.eat("F(") {
            let start = self.pos;
            let mut depth = 1;
            for (i, c) in self.s[start..].char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' => {
                        depth -= 1;
                        if depth == 0 {
                            node = Shape::Filter(Box::new(node), self.s[start..start + i].to_string());
                            self.pos = start + i + 1;
                            break;
                        }
                    }
                    _ => {}
                }
            }
            if depth != 0 {
                return Err(self.err("unterminated filter"));
            }
        }
        Ok(node)
    }

    fn atom(&mut self) -> Result<Shape> {
        if self.eat("(") {
            let inner = self.expr()?;
            if !self.eat(")") {
                return Err(self.err("expected `)`"));
            }
            return Ok(inner);
        }
        self.ws();
        let rest = &self.s[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected a pattern name or `(`"));
        }
        self.pos += len;
        Ok(Shape::Leaf(rest[..len].to_string()))
    }
}
