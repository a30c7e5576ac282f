//! Query algebra: triple patterns, pattern trees, filter expressions.

mod filter;
mod parser;
mod shape;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub use filter::{CmpOp, FilterExpr, Truth};
pub use parser::{parse, parse_filter, DEFAULT_PREFIX};
pub use shape::{parse_algebra, Shape};

use crate::error::{Error, Result};
use crate::term::{TermOrVar, Variable};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub s: TermOrVar,
    pub p: TermOrVar,
    pub o: TermOrVar,
    /// Zero-based position of the pattern in query text order.
    pub index: usize,
}

impl TriplePattern {
    pub fn new(s: impl Into<TermOrVar>, p: impl Into<TermOrVar>, o: impl Into<TermOrVar>, index: usize) -> Self {
        TriplePattern { s: s.into(), p: p.into(), o: o.into(), index }
    }

    /// Variables in subject, predicate, object order, without duplicates.
    pub fn vars(&self) -> Vec<&Variable> {
        let mut out: Vec<&Variable> = Vec::with_capacity(3);
        for v in [&self.s, &self.p, &self.o].into_iter().filter_map(TermOrVar::as_var) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    pub fn has_var(&self, v: &Variable) -> bool {
        [&self.s, &self.p, &self.o].into_iter().any(|x| x.as_var() == Some(v))
    }

    /// Variables shared with another pattern, in this pattern's order.
    pub fn shared_vars(&self, other: &TriplePattern) -> Vec<Variable> {
        self.vars().into_iter().filter(|v| other.has_var(v)).cloned().collect()
    }

    pub fn name(&self) -> String {
        format!("T{}", self.index + 1)
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.s, self.p, self.o)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternNode {
    Bgp(Vec<TriplePattern>),
    Join(Box<PatternNode>, Box<PatternNode>),
    /// Left outer join. The optional condition restricts which right-hand
    /// extensions are kept; it is only introduced by filter normalization.
    LeftJoin(Box<PatternNode>, Box<PatternNode>, Option<FilterExpr>),
    Union(Box<PatternNode>, Box<PatternNode>),
    Filter(Box<PatternNode>, FilterExpr),
}

impl PatternNode {
    pub fn join(l: PatternNode, r: PatternNode) -> Self {
        PatternNode::Join(Box::new(l), Box::new(r))
    }

    pub fn left_join(l: PatternNode, r: PatternNode) -> Self {
        PatternNode::LeftJoin(Box::new(l), Box::new(r), None)
    }

    pub fn union(l: PatternNode, r: PatternNode) -> Self {
        PatternNode::Union(Box::new(l), Box::new(r))
    }

    pub fn filter(inner: PatternNode, expr: FilterExpr) -> Self {
        PatternNode::Filter(Box::new(inner), expr)
    }

    pub fn is_empty_bgp(&self) -> bool {
        matches!(self, PatternNode::Bgp(v) if v.is_empty())
    }

    /// All triple patterns in left-to-right order.
    pub fn patterns(&self) -> Vec<&TriplePattern> {
        let mut out = Vec::new();
        self.collect_patterns(&mut out);
        out
    }

    fn collect_patterns<'a>(&'a self, out: &mut Vec<&'a TriplePattern>) {
        match self {
            PatternNode::Bgp(tps) => out.extend(tps),
            PatternNode::Join(l, r) | PatternNode::LeftJoin(l, r, _) | PatternNode::Union(l, r) => {
                l.collect_patterns(out);
                r.collect_patterns(out);
            }
            PatternNode::Filter(inner, _) => inner.collect_patterns(out),
        }
    }

    /// Variables occurring in triple patterns of this subtree.
    pub fn vars(&self) -> BTreeSet<Variable> {
        self.patterns().into_iter().flat_map(|tp| tp.vars().into_iter().cloned()).collect()
    }

    /// Variables in first-occurrence order.
    pub fn vars_in_order(&self) -> Vec<Variable> {
        let mut out: Vec<Variable> = Vec::new();
        for tp in self.patterns() {
            for v in tp.vars() {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    pub fn contains_union(&self) -> bool {
        match self {
            PatternNode::Bgp(_) => false,
            PatternNode::Union(..) => true,
            PatternNode::Join(l, r) | PatternNode::LeftJoin(l, r, _) => l.contains_union() || r.contains_union(),
            PatternNode::Filter(inner, _) => inner.contains_union(),
        }
    }

    pub fn contains_optional(&self) -> bool {
        match self {
            PatternNode::Bgp(_) => false,
            PatternNode::LeftJoin(..) => true,
            PatternNode::Join(l, r) | PatternNode::Union(l, r) => l.contains_optional() || r.contains_optional(),
            PatternNode::Filter(inner, _) => inner.contains_optional(),
        }
    }

    pub fn contains_filter(&self) -> bool {
        match self {
            PatternNode::Bgp(_) => false,
            PatternNode::Filter(..) | PatternNode::LeftJoin(_, _, Some(_)) => true,
            PatternNode::Join(l, r) | PatternNode::LeftJoin(l, r, None) | PatternNode::Union(l, r) => {
                l.contains_filter() || r.contains_filter()
            }
        }
    }

    fn var_counts(&self, counts: &mut HashMap<Variable, usize>) {
        for tp in self.patterns() {
            for v in tp.vars() {
                *counts.entry(v.clone()).or_default() += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub projection: Vec<Variable>,
    pub distinct: bool,
    pub root: PatternNode,
}

impl Query {
    pub fn new(projection: Vec<Variable>, distinct: bool, root: PatternNode) -> Self {
        Query { projection, distinct, root }
    }

    /// A query projecting every variable of `root`.
    pub fn select_all(root: PatternNode) -> Self {
        Query { projection: root.vars_in_order(), distinct: false, root }
    }

    pub fn patterns(&self) -> Vec<&TriplePattern> {
        self.root.patterns()
    }

    /// Serialized infix algebra over BGPs named P1..Pk.
    pub fn serialize(&self) -> String {
        Shape::of(&self.root).to_string()
    }
}

/// Rejects filters that mention variables their filtered pattern cannot bind.
pub fn check_safe_filters(node: &PatternNode) -> Result<()> {
    match node {
        PatternNode::Bgp(_) => Ok(()),
        PatternNode::Join(l, r) | PatternNode::Union(l, r) | PatternNode::LeftJoin(l, r, None) => {
            check_safe_filters(l)?;
            check_safe_filters(r)
        }
        PatternNode::LeftJoin(l, r, Some(cond)) => {
            check_safe_filters(l)?;
            check_safe_filters(r)?;
            let mut scope = l.vars();
            scope.extend(r.vars());
            unsafe_var(cond, &scope)
        }
        PatternNode::Filter(inner, expr) => {
            check_safe_filters(inner)?;
            unsafe_var(expr, &inner.vars())
        }
    }
}

fn unsafe_var(expr: &FilterExpr, scope: &BTreeSet<Variable>) -> Result<()> {
    match expr.vars().into_iter().find(|v| !scope.contains(v)) {
        Some(v) => Err(Error::UnsafeFilter(v)),
        None => Ok(()),
    }
}

/// Checks well-designed OPTIONALs and UNIONs. Only variable occurrences in
/// triple patterns count; filters are covered by the safe-filter check.
pub fn check_well_designed(root: &PatternNode) -> Result<()> {
    let mut total = HashMap::new();
    root.var_counts(&mut total);
    walk_well_designed(root, &total)
}

fn walk_well_designed(node: &PatternNode, total: &HashMap<Variable, usize>) -> Result<()> {
    let outside = |node: &PatternNode| -> BTreeSet<Variable> {
        let mut inner = HashMap::new();
        node.var_counts(&mut inner);
        inner.into_iter().filter(|(v, n)| total[v] > *n).map(|(v, _)| v).collect()
    };
    match node {
        PatternNode::Bgp(_) => Ok(()),
        PatternNode::Join(l, r) => {
            walk_well_designed(l, total)?;
            walk_well_designed(r, total)
        }
        PatternNode::Filter(inner, _) => walk_well_designed(inner, total),
        PatternNode::LeftJoin(l, r, _) => {
            let left = l.vars();
            let right = r.vars();
            for v in outside(node) {
                if right.contains(&v) && !left.contains(&v) {
                    return Err(Error::NotWellDesigned {
                        var: v,
                        detail: "occurs in an OPTIONAL part and outside it but not in its mandatory part".into(),
                    });
                }
            }
            walk_well_designed(l, total)?;
            walk_well_designed(r, total)
        }
        PatternNode::Union(l, r) => {
            let left = l.vars();
            let right = r.vars();
            for v in outside(node) {
                if !(left.contains(&v) && right.contains(&v)) {
                    return Err(Error::NotWellDesigned {
                        var: v,
                        detail: "occurs outside a UNION but not in both of its branches".into(),
                    });
                }
            }
            walk_well_designed(l, total)?;
            walk_well_designed(r, total)
        }
    }
}
