//! Reference evaluator: nested loops over plain triples, evaluating the
//! algebra tree in its written order.

use crate::error::{Error, Result};
use crate::exec::{ResultSet, Row};
use crate::query::{FilterExpr, PatternNode, Query, TriplePattern};
use crate::rewrite::push_filters;
use crate::store::Triple;
use crate::term::{Term, TermOrVar, Variable};

/// Largest intermediate relation the oracle will build.
pub const ORACLE_ROW_LIMIT: usize = 10_000;

/// Evaluates `q` over `triples`. Filters are first placed the way the
/// engine places them; join order is left as written. DISTINCT removes
/// duplicate projected rows.
pub fn oracle_eval(q: &Query, triples: &[Triple]) -> Result<ResultSet> {
    let tree = push_filters(&q.root);
    let header = tree.vars_in_order();
    let ev = Evaluator { triples, header: &header };
    let rows = ev.eval(&tree)?;
    let mut rs = ResultSet { vars: header.clone(), rows }.project(&q.projection);
    if q.distinct {
        rs.rows.sort();
        rs.rows.dedup();
    }
    Ok(rs)
}

struct Evaluator<'a> {
    triples: &'a [Triple],
    header: &'a [Variable],
}

fn compatible(a: &Row, b: &Row) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    })
}

fn merge(a: &Row, b: &Row) -> Row {
    a.iter().zip(b).map(|(x, y)| x.clone().or_else(|| y.clone())).collect()
}

impl Evaluator<'_> {
    fn col(&self, v: &Variable) -> usize {
        self.header.iter().position(|h| h == v).expect("variable in header")
    }

    fn check(&self, rows: Vec<Row>) -> Result<Vec<Row>> {
        if rows.len() > ORACLE_ROW_LIMIT {
            return Err(Error::OracleLimit(rows.len()));
        }
        Ok(rows)
    }

    fn holds(&self, expr: &FilterExpr, row: &Row) -> bool {
        expr.eval(&|v: &Variable| self.header.iter().position(|h| h == v).and_then(|i| row[i].as_ref()))
            .is_true()
    }

    fn eval(&self, node: &PatternNode) -> Result<Vec<Row>> {
        match node {
            PatternNode::Bgp(patterns) => {
                let mut rows = vec![vec![None; self.header.len()]];
                for tp in patterns {
                    rows = self.check(self.extend(&rows, tp))?;
                }
                Ok(rows)
            }
            PatternNode::Join(l, r) => {
                let (ls, rs) = (self.eval(l)?, self.eval(r)?);
                let mut out = Vec::new();
                for a in &ls {
                    for b in &rs {
                        if compatible(a, b) {
                            out.push(merge(a, b));
                        }
                    }
                }
                self.check(out)
            }
            PatternNode::LeftJoin(l, r, cond) => {
                let (ls, rs) = (self.eval(l)?, self.eval(r)?);
                let mut out = Vec::new();
                for a in &ls {
                    let before = out.len();
                    for b in &rs {
                        if compatible(a, b) {
                            let m = merge(a, b);
                            if cond.as_ref().is_none_or(|c| self.holds(c, &m)) {
                                out.push(m);
                            }
                        }
                    }
                    if out.len() == before {
                        out.push(a.clone());
                    }
                }
                self.check(out)
            }
            PatternNode::Union(l, r) => {
                let mut out = self.eval(l)?;
                out.extend(self.eval(r)?);
                self.check(out)
            }
            PatternNode::Filter(inner, expr) => {
                Ok(self.eval(inner)?.into_iter().filter(|row| self.holds(expr, row)).collect())
            }
        }
    }

    fn extend(&self, rows: &[Row], tp: &TriplePattern) -> Vec<Row> {
        let mut out = Vec::new();
        for row in rows {
            for (s, p, o) in self.triples {
                let mut next = row.clone();
                if self.bind(&mut next, &tp.s, s) && self.bind(&mut next, &tp.p, p) && self.bind(&mut next, &tp.o, o) {
                    out.push(next);
                }
            }
        }
        out
    }

    fn bind(&self, row: &mut Row, pos: &TermOrVar, value: &Term) -> bool {
        match pos {
            TermOrVar::Term(t) => t == value,
            TermOrVar::Var(v) => {
                let i = self.col(v);
                match &row[i] {
                    Some(existing) => existing == value,
                    None => {
                        row[i] = Some(value.clone());
                        true
                    }
                }
            }
        }
    }
}
