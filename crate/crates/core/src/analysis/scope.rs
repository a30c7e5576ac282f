use super::gosn::Gosn;
use crate::query::{FilterExpr, PatternNode};

/// A filter or left-join condition together with the supernode whose
/// bindings it guards. `scope == None` means the whole row: a failure
/// drops it. Otherwise a failure nulls the supernode and its slaves.
#[derive(Debug, Clone, PartialEq)]
pub struct ScopedFilter {
    pub scope: Option<usize>,
    pub expr: FilterExpr,
}

/// Collects the filters and left-join conditions of a UNION-free tree.
/// `gosn` must have been built from the same tree.
pub fn scoped_filters(gosn: &Gosn, root: &PatternNode) -> Vec<ScopedFilter> {
    let mut out = Vec::new();
    let mut offset = 0;
    walk(gosn, root, None, &mut offset, &mut out);
    out
}

fn walk(gosn: &Gosn, node: &PatternNode, scope: Option<usize>, offset: &mut usize, out: &mut Vec<ScopedFilter>) {
    match node {
        PatternNode::Bgp(ps) => *offset += ps.len(),
        PatternNode::Join(l, r) | PatternNode::Union(l, r) => {
            walk(gosn, l, scope, offset, out);
            walk(gosn, r, scope, offset, out);
        }
        PatternNode::LeftJoin(l, r, cond) => {
            walk(gosn, l, scope, offset, out);
            let first = *offset;
            let has_patterns = !r.patterns().is_empty();
            let inner = if has_patterns { Some(gosn.sn_of[first]) } else { scope };
            walk(gosn, r, inner, offset, out);
            if let (Some(expr), true) = (cond, has_patterns) {
                out.push(ScopedFilter { scope: inner, expr: expr.clone() });
            }
        }
        PatternNode::Filter(inner, expr) => {
            walk(gosn, inner, scope, offset, out);
            out.push(ScopedFilter { scope, expr: expr.clone() });
        }
    }
}
