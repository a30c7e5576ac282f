//! UNION normal form and FILTER placement.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::query::{check_well_designed, FilterExpr, PatternNode};
use crate::term::Variable;

/// A pattern rewritten as a union of UNION-free disjuncts.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfResult {
    pub disjuncts: Vec<PatternNode>,
    /// Some `P1 ⟕ (P2 ∪ P3)` was distributed, so the union of the disjuncts
    /// is only equal to the input under minimum union.
    pub rule3_used: bool,
}

pub fn to_unf(root: &PatternNode) -> Result<UnfResult> {
    let mut rule3_used = false;
    let disjuncts = unf(root, &mut rule3_used);
    for d in &disjuncts {
        check_well_designed(d)?;
    }
    Ok(UnfResult { disjuncts, rule3_used })
}

fn unf(node: &PatternNode, rule3: &mut bool) -> Vec<PatternNode> {
    match node {
        PatternNode::Bgp(_) => vec![node.clone()],
        PatternNode::Union(l, r) => {
            let mut out = unf(l, rule3);
            out.extend(unf(r, rule3));
            out
        }
        PatternNode::Join(l, r) => {
            let (ls, rs) = (unf(l, rule3), unf(r, rule3));
            cross(&ls, &rs, PatternNode::join)
        }
        PatternNode::LeftJoin(l, r, cond) => {
            let (ls, rs) = (unf(l, rule3), unf(r, rule3));
            if rs.len() > 1 {
                *rule3 = true;
            }
            cross(&ls, &rs, |a, b| PatternNode::LeftJoin(Box::new(a), Box::new(b), cond.clone()))
        }
        PatternNode::Filter(inner, expr) => unf(inner, rule3)
            .into_iter()
            .map(|d| PatternNode::filter(d, expr.clone()))
            .collect(),
    }
}

fn cross(
    ls: &[PatternNode],
    rs: &[PatternNode],
    combine: impl Fn(PatternNode, PatternNode) -> PatternNode,
) -> Vec<PatternNode> {
    let mut out = Vec::with_capacity(ls.len() * rs.len());
    for l in ls {
        for r in rs {
            out.push(combine(l.clone(), r.clone()));
        }
    }
    out
}

/// Splits every FILTER into its top-level conjuncts and moves each one as
/// deep as its variables allow. Under a left outer join a conjunct goes to
/// the mandatory side when that side binds all its variables, otherwise to
/// the optional side, otherwise it becomes the join condition. Under a
/// union it is copied into both branches.
pub fn push_filters(root: &PatternNode) -> PatternNode {
    match root {
        PatternNode::Bgp(_) => root.clone(),
        PatternNode::Join(l, r) => PatternNode::join(push_filters(l), push_filters(r)),
        PatternNode::Union(l, r) => PatternNode::union(push_filters(l), push_filters(r)),
        PatternNode::LeftJoin(l, r, cond) => {
            let (l, r) = (push_filters(l), push_filters(r));
            match cond {
                None => PatternNode::left_join(l, r),
                Some(c) => c.conjuncts().into_iter().fold(PatternNode::left_join(l, r), |node, part| {
                    match node {
                        PatternNode::LeftJoin(l, r, cond) if subset(&part.vars(), &r.vars()) => {
                            PatternNode::LeftJoin(l, Box::new(push_conjunct(*r, part)), cond)
                        }
                        PatternNode::LeftJoin(l, r, cond) => {
                            let joined = FilterExpr::conjoin(cond.into_iter().chain([part]));
                            PatternNode::LeftJoin(l, r, joined)
                        }
                        _ => unreachable!("fold keeps the left join at the top"),
                    }
                }),
            }
        }
        PatternNode::Filter(inner, expr) => {
            expr.conjuncts().into_iter().fold(push_filters(inner), push_conjunct)
        }
    }
}

fn subset(a: &BTreeSet<Variable>, b: &BTreeSet<Variable>) -> bool {
    a.iter().all(|v| b.contains(v))
}

fn push_conjunct(node: PatternNode, c: FilterExpr) -> PatternNode {
    let vars = c.vars();
    match node {
        PatternNode::LeftJoin(l, r, cond) => {
            if subset(&vars, &l.vars()) {
                PatternNode::LeftJoin(Box::new(push_conjunct(*l, c)), r, cond)
            } else if subset(&vars, &r.vars()) {
                PatternNode::LeftJoin(l, Box::new(push_conjunct(*r, c)), cond)
            } else {
                PatternNode::LeftJoin(l, r, FilterExpr::conjoin(cond.into_iter().chain([c])))
            }
        }
        PatternNode::Join(l, r) => {
            if !vars.is_empty() && subset(&vars, &l.vars()) {
                PatternNode::join(push_conjunct(*l, c), *r)
            } else if !vars.is_empty() && subset(&vars, &r.vars()) {
                PatternNode::join(*l, push_conjunct(*r, c))
            } else {
                PatternNode::filter(PatternNode::Join(l, r), c)
            }
        }
        PatternNode::Union(l, r) => PatternNode::union(push_conjunct(*l, c.clone()), push_conjunct(*r, c)),
        PatternNode::Filter(inner, e) => PatternNode::filter(push_conjunct(*inner, c), e),
        bgp @ PatternNode::Bgp(_) => PatternNode::filter(bgp, c),
    }
}

/// Conjuncts of a filter that mention exactly one variable can be applied
/// while loading BitMats; the rest are evaluated on complete rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterPartition {
    pub load_time: Vec<FilterExpr>,
    pub residual: Vec<FilterExpr>,
}

pub fn classify_loadtime_filters(expr: &FilterExpr) -> FilterPartition {
    let mut out = FilterPartition::default();
    for c in expr.conjuncts() {
        if c.vars().len() == 1 {
            out.load_time.push(c);
        } else {
            out.residual.push(c);
        }
    }
    out
}

/// The maximal UNION-free subtrees, left to right.
pub fn union_free_components(root: &PatternNode) -> Vec<&PatternNode> {
    if !root.contains_union() {
        return vec![root];
    }
    match root {
        PatternNode::Bgp(_) => unreachable!("a BGP holds no union"),
        PatternNode::Join(l, r) | PatternNode::LeftJoin(l, r, _) | PatternNode::Union(l, r) => {
            let mut out = union_free_components(l);
            out.extend(union_free_components(r));
            out
        }
        PatternNode::Filter(inner, _) => union_free_components(inner),
    }
}
