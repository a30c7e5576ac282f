//! Per-query working copies of pattern BitMats and the semi-join primitive.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::query::TriplePattern;
use crate::store::{BitArray, BitMat, Dictionary, Dim, Retain, Store};
use crate::term::{Term, Variable};

#[derive(Debug, Clone)]
pub struct WorkingPattern {
    /// Position of the pattern within its UNION-free pattern.
    pub local: usize,
    pub tp: TriplePattern,
    pub bm: BitMat,
    pub row_var: Option<Variable>,
    pub col_var: Option<Variable>,
}

impl WorkingPattern {
    pub fn load(store: &Store, tp: &TriplePattern, local: usize, first: Option<&Variable>) -> Result<Self> {
        let pm = store.select_bitmat(tp, first)?;
        Ok(WorkingPattern { local, tp: tp.clone(), bm: pm.bitmat, row_var: pm.row_var, col_var: pm.col_var })
    }

    pub fn count(&self) -> u64 {
        self.bm.triple_count()
    }

    pub fn is_empty(&self) -> bool {
        self.bm.is_empty()
    }

    pub fn vars(&self) -> Vec<&Variable> {
        let mut v: Vec<&Variable> = self.row_var.iter().chain(self.col_var.iter()).collect();
        v.dedup();
        v
    }

    /// Where variable `v` lives in the BitMat.
    pub fn slot(&self, v: &Variable) -> Option<(Retain, Dim)> {
        if self.row_var.as_ref() == Some(v) {
            Some((Retain::Row, self.bm.row_dim))
        } else if self.col_var.as_ref() == Some(v) {
            Some((Retain::Column, self.bm.col_dim))
        } else {
            None
        }
    }

    fn slot_or_err(&self, v: &Variable) -> Result<(Retain, Dim)> {
        let slot = self
            .slot(v)
            .ok_or_else(|| Error::Contract(format!("{} does not bind {v}", self.tp)))?;
        if slot.1 == Dim::P {
            return Err(Error::UnsupportedByIndex(format!("join on predicate variable {v}")));
        }
        Ok(slot)
    }

    /// Transposes a two-variable BitMat so that `first` indexes the rows.
    pub fn orient(&mut self, first: &Variable) {
        if self.row_var.is_some() && self.col_var.as_ref() == Some(first) && self.row_var.as_ref() != Some(first) {
            self.bm = self.bm.transpose();
            std::mem::swap(&mut self.row_var, &mut self.col_var);
        }
    }

    pub fn fold_var(&self, v: &Variable) -> Result<(BitArray, Dim)> {
        let (retain, dim) = self.slot_or_err(v)?;
        Ok((self.bm.fold(retain), dim))
    }

    /// Keeps only triples whose binding for `v` satisfies `keep`.
    pub fn restrict_terms(&mut self, v: &Variable, dict: &Dictionary, keep: impl Fn(&Term) -> bool) -> Result<()> {
        let (retain, dim) = self.slot_or_err(v)?;
        let width = match retain {
            Retain::Row => self.bm.nrows(),
            Retain::Column => self.bm.ncols(),
        };
        let mask = BitArray::from_positions(
            width,
            (1..=width).filter(|&i| dict.term_of(dim, i).is_some_and(&keep)),
        );
        self.bm.unfold(&mask, retain)
    }

    /// Node keys of all pairs, as (row binding, column binding).
    fn keyed_pairs<'a>(&'a self, dict: &'a Dictionary) -> impl Iterator<Item = (u32, u32)> + 'a {
        let (rd, cd) = (self.bm.row_dim, self.bm.col_dim);
        self.bm.pairs().map(move |(r, c)| (dict.node_key(rd, r), dict.node_key(cd, c)))
    }

    fn tuple_of(&self, vars: &[Variable], pair: (u32, u32)) -> Vec<u32> {
        vars.iter()
            .map(|v| if self.row_var.as_ref() == Some(v) { pair.0 } else { pair.1 })
            .collect()
    }

    /// Candidate bindings consistent with the already bound variables, as
    /// node keys for (row variable, column variable).
    pub fn matches(&self, dict: &Dictionary, bound: impl Fn(&Variable) -> Option<u32>) -> Vec<(Option<u32>, Option<u32>)> {
        let (rd, cd) = (self.bm.row_dim, self.bm.col_dim);
        let rv = self.row_var.as_ref().and_then(&bound);
        let cv = self.col_var.as_ref().and_then(&bound);
        let rows: Vec<u32> = match (&self.row_var, rv) {
            (None, _) => vec![1],
            (Some(_), Some(key)) => dict.key_to_dim(key, rd).into_iter().filter(|&r| r <= self.bm.nrows()).collect(),
            (Some(_), None) => self.bm.non_empty_rows().iter_ones().collect(),
        };
        let col_filter = match (&self.col_var, cv) {
            (Some(_), Some(key)) => match dict.key_to_dim(key, cd) {
                Some(c) => Some(c),
                None => return Vec::new(),
            },
            _ => None,
        };
        let mut out = Vec::new();
        for r in rows {
            let row = self.bm.row(r);
            let rkey = self.row_var.as_ref().map(|_| dict.node_key(rd, r));
            match col_filter {
                Some(c) => {
                    if row.contains(c) {
                        out.push((rkey, self.col_var.as_ref().map(|_| dict.node_key(cd, c))));
                    }
                }
                None => {
                    for c in row.positions() {
                        out.push((rkey, self.col_var.as_ref().map(|_| dict.node_key(cd, c))));
                    }
                }
            }
        }
        if self.row_var.is_some() && self.row_var == self.col_var {
            out.retain(|(a, b)| a == b);
        }
        out
    }
}

/// Semi-join `target ⋉ source` over `vars`. A single variable uses the
/// fold / AND / unfold path; several variables compare binding tuples.
/// Returns the number of triples removed from the target.
pub fn semi_join(target: &mut WorkingPattern, source: &WorkingPattern, vars: &[Variable], dict: &Dictionary) -> Result<u64> {
    let before = target.count();
    match vars {
        [] => {}
        [v] => {
            let (retain, tdim) = target.slot_or_err(v)?;
            let (mut beta, _) = target.fold_var(v)?;
            let (other, sdim) = source.fold_var(v)?;
            if tdim == sdim {
                beta.and_assign(&other);
            } else {
                beta.and_assign_prefix(&other, dict.num_shared());
            }
            target.bm.unfold(&beta, retain)?;
        }
        _ => {
            for v in vars {
                target.slot_or_err(v)?;
                source.slot_or_err(v)?;
            }
            let allowed: HashSet<Vec<u32>> = source.keyed_pairs(dict).map(|p| source.tuple_of(vars, p)).collect();
            let (rd, cd) = (target.bm.row_dim, target.bm.col_dim);
            let row_var = target.row_var.clone();
            target.bm.retain_pairs(|r, c| {
                let pair = (dict.node_key(rd, r), dict.node_key(cd, c));
                let tuple: Vec<u32> = vars
                    .iter()
                    .map(|v| if row_var.as_ref() == Some(v) { pair.0 } else { pair.1 })
                    .collect();
                allowed.contains(&tuple)
            });
        }
    }
    Ok(before - target.count())
}
