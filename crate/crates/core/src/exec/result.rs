use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::term::{Term, Variable};

pub type Row = Vec<Option<Term>>;

/// A bag of rows over a fixed variable header. `None` is NULL.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultSet {
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
}

impl ResultSet {
    pub fn new(vars: Vec<Variable>) -> Self {
        ResultSet { vars, rows: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, v: &Variable) -> Option<usize> {
        self.vars.iter().position(|x| x == v)
    }

    /// Keeps the given columns, in the given order. Unknown variables
    /// become all-NULL columns.
    pub fn project(&self, vars: &[Variable]) -> ResultSet {
        let cols: Vec<Option<usize>> = vars.iter().map(|v| self.column(v)).collect();
        let rows = self
            .rows
            .iter()
            .map(|row| cols.iter().map(|c| c.and_then(|c| row[c].clone())).collect())
            .collect();
        ResultSet { vars: vars.to_vec(), rows }
    }

    /// Appends the rows of `other`, matching columns by variable.
    pub fn extend_from(&mut self, other: &ResultSet) {
        let aligned = other.project(&self.vars);
        self.rows.extend(aligned.rows);
    }

    /// Rows in canonical order, for multiset comparison.
    pub fn sorted(&self) -> ResultSet {
        let mut rows = self.rows.clone();
        rows.sort();
        ResultSet { vars: self.vars.clone(), rows }
    }

    pub fn same_multiset(&self, other: &ResultSet) -> bool {
        let other = other.project(&self.vars);
        self.sorted().rows == other.sorted().rows
    }

    /// Header line of variable names, then one tab-separated line per row;
    /// NULL is an empty field.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.vars.iter().map(|v| v.to_string()).collect();
        out.push_str(&header.join("\t"));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|t| t.as_ref().map(Term::to_string).unwrap_or_default()).collect();
            let _ = writeln!(out, "{}", fields.join("\t"));
        }
        out
    }
}

fn mask(row: &Row) -> Vec<bool> {
    row.iter().map(Option::is_some).collect()
}

/// `r2` agrees with every non-null binding of `r1` and binds strictly more
/// variables.
pub fn subsumes(r1: &Row, r2: &Row) -> bool {
    let mut more = false;
    for (a, b) in r1.iter().zip(r2) {
        match (a, b) {
            (Some(x), Some(y)) if x != y => return false,
            (Some(_), None) => return false,
            (None, Some(_)) => more = true,
            _ => {}
        }
    }
    more
}

/// Minimum union: drops exact duplicates and every row subsumed by another
/// row. Output rows are sorted.
pub fn best_match(rs: &ResultSet) -> ResultSet {
    let mut rows = rs.rows.clone();
    rows.sort();
    rows.dedup();
    let mut by_mask: HashMap<Vec<bool>, Vec<usize>> = HashMap::new();
    for (i, r) in rows.iter().enumerate() {
        by_mask.entry(mask(r)).or_default().push(i);
    }
    let masks: Vec<Vec<bool>> = by_mask.keys().cloned().collect();
    let mut removed = vec![false; rows.len()];
    for small in &masks {
        for big in &masks {
            let strict_superset = small != big && small.iter().zip(big).all(|(s, b)| !*s || *b);
            if !strict_superset {
                continue;
            }
            let project = |r: &Row| -> Vec<Option<Term>> {
                r.iter().zip(small).map(|(t, keep)| if *keep { t.clone() } else { None }).collect()
            };
            let covers: HashSet<Vec<Option<Term>>> = by_mask[big].iter().map(|&i| project(&rows[i])).collect();
            for &i in &by_mask[small] {
                if covers.contains(&rows[i]) {
                    removed[i] = true;
                }
            }
        }
    }
    let rows = rows.into_iter().zip(removed).filter(|(_, gone)| !gone).map(|(r, _)| r).collect();
    ResultSet { vars: rs.vars.clone(), rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Option<Term> {
        Some(Term::Iri(format!("http://example.org/{s}")))
    }

    fn rs(rows: Vec<Row>) -> ResultSet {
        ResultSet { vars: vec![Variable::new("f"), Variable::new("s")], rows }
    }

    #[test]
    fn res2_reduces_to_res3() {
        let res2 = rs(vec![
            vec![iri("Larry"), None],
            vec![iri("Julia"), iri("Seinfeld")],
            vec![iri("Julia"), None],
            vec![iri("Julia"), None],
            vec![iri("Julia"), None],
        ]);
        let res3 = best_match(&res2);
        assert!(res3.same_multiset(&rs(vec![vec![iri("Julia"), iri("Seinfeld")], vec![iri("Larry"), None]])));
    }

    #[test]
    fn subsumption_is_strict() {
        let r = vec![iri("Julia"), None];
        assert!(!subsumes(&r, &r));
        assert!(subsumes(&r, &vec![iri("Julia"), iri("Seinfeld")]));
        assert!(subsumes(&vec![None, None], &vec![iri("a"), iri("b")]));
        assert!(!subsumes(&vec![iri("Larry"), None], &vec![iri("Julia"), iri("Seinfeld")]));
    }

    #[test]
    fn tsv_renders_null_as_empty() {
        let out = rs(vec![vec![iri("Larry"), None]]).to_tsv();
        assert_eq!(out, "?f\t?s\n<http://example.org/Larry>\t\n");
    }
}
