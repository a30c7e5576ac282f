//! Dictionary-encoded triple storage with lazily materialized BitMats.

mod bitarray;
mod bitmat;
mod compress;
mod dictionary;
mod ntriples;
mod persist;

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;
use std::sync::{Arc, RwLock};

pub use bitarray::BitArray;
pub use bitmat::{bmm, BitMat, BitMatKind, Dim, Retain};
pub use compress::{run_count, CompressedRow};
pub use dictionary::{Dictionary, TermClass};
pub use ntriples::{parse_line, parse_term, read_ntriples, Triple};

use crate::error::{Error, Result};
use crate::query::TriplePattern;
use crate::term::{Term, TermOrVar, Variable};

/// An encoded triple (subject id, predicate id, object id).
pub type IdTriple = (u32, u32, u32);

/// Immutable after construction; safe to share between threads.
#[derive(Debug)]
pub struct Store {
    dict: Dictionary,
    triples: Vec<IdTriple>,
    cache: RwLock<HashMap<(BitMatKind, u32), Arc<BitMat>>>,
}

/// The BitMat chosen for one triple pattern, with the variables bound by its
/// row and column coordinates. A constant position has no variable.
#[derive(Debug, Clone)]
pub struct PatternMatrix {
    pub bitmat: BitMat,
    pub row_var: Option<Variable>,
    pub col_var: Option<Variable>,
}

impl Store {
    pub fn from_triples(triples: &[Triple]) -> Result<Self> {
        if let Some((s, _, _)) = triples.iter().find(|t| t.0.is_literal()) {
            return Err(Error::Contract(format!("literal {s} in subject position")));
        }
        let dict = Dictionary::build(triples);
        let mut ids: Vec<IdTriple> = triples
            .iter()
            .map(|(s, p, o)| {
                (
                    dict.id_of(Dim::S, s).expect("subject registered"),
                    dict.id_of(Dim::P, p).expect("predicate registered"),
                    dict.id_of(Dim::O, o).expect("object registered"),
                )
            })
            .collect();
        ids.sort_unstable();
        ids.dedup();
        Ok(Self::from_parts(dict, ids))
    }

    fn from_parts(dict: Dictionary, mut triples: Vec<IdTriple>) -> Self {
        triples.sort_unstable();
        Store { dict, triples, cache: RwLock::new(HashMap::new()) }
    }

    pub fn load_ntriples(input: impl BufRead) -> Result<Self> {
        Self::from_triples(&read_ntriples(input)?)
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn id_triples(&self) -> &[IdTriple] {
        &self.triples
    }

    /// Decoded triples in (s, p, o) id order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.triples.iter().map(|&(s, p, o)| {
            (
                self.dict.term_of(Dim::S, s).cloned().expect("valid subject id"),
                self.dict.term_of(Dim::P, p).cloned().expect("valid predicate id"),
                self.dict.term_of(Dim::O, o).cloned().expect("valid object id"),
            )
        })
    }

    /// Number of BitMats the index could materialize: two per predicate, one
    /// per subject and one per object.
    pub fn bitmat_family_size(&self) -> usize {
        let d = &self.dict;
        (2 * d.num_predicates() + d.num_subjects() + d.num_objects()) as usize
    }

    pub fn materialized_count(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    /// Returns the BitMat of the given family and slice, building it on first use.
    /// Returns `None` when the slice id is out of range.
    pub fn bitmat(&self, kind: BitMatKind, slice: u32) -> Option<Arc<BitMat>> {
        let (slice_dim, (rd, cd)) = match kind {
            BitMatKind::SO => (Dim::P, (Dim::S, Dim::O)),
            BitMatKind::OS => (Dim::P, (Dim::O, Dim::S)),
            BitMatKind::PS => (Dim::O, (Dim::P, Dim::S)),
            BitMatKind::PO => (Dim::S, (Dim::P, Dim::O)),
            BitMatKind::Derived => return None,
        };
        if slice == 0 || slice > self.dict.extent(slice_dim) {
            return None;
        }
        if let Some(bm) = self.cache.read().expect("cache lock").get(&(kind, slice)) {
            return Some(bm.clone());
        }
        let pairs: Vec<(u32, u32)> = self
            .triples
            .iter()
            .filter_map(|&(s, p, o)| match kind {
                BitMatKind::SO if p == slice => Some((s, o)),
                BitMatKind::OS if p == slice => Some((o, s)),
                BitMatKind::PS if o == slice => Some((p, s)),
                BitMatKind::PO if s == slice => Some((p, o)),
                _ => None,
            })
            .collect();
        let bm = Arc::new(BitMat::from_pairs(
            kind,
            slice,
            (rd, cd),
            (self.dict.extent(rd), self.dict.extent(cd)),
            pairs,
        ));
        self.cache
            .write()
            .expect("cache lock")
            .entry((kind, slice))
            .or_insert(bm)
            .clone()
            .into()
    }

    /// Picks the BitMat for a triple pattern. `first` names the join variable
    /// that the caller will bind first; for a two-variable pattern it decides
    /// between the S-O and O-S orientation.
    pub fn select_bitmat(&self, tp: &TriplePattern, first: Option<&Variable>) -> Result<PatternMatrix> {
        let pred = match &tp.p {
            TermOrVar::Term(t) => t,
            TermOrVar::Var(v) => {
                return Err(Error::UnsupportedByIndex(format!(
                    "pattern {tp} has variable predicate {v}"
                )))
            }
        };
        let d = &self.dict;
        let pid = d.id_of(Dim::P, pred);
        match (&tp.s, &tp.o) {
            (TermOrVar::Var(a), TermOrVar::Var(b)) => {
                let object_first = a != b && first == Some(b);
                let kind = if object_first { BitMatKind::OS } else { BitMatKind::SO };
                let (rd, cd) = kind.dims().expect("base kind");
                let mut bm = match pid.and_then(|p| self.bitmat(kind, p)) {
                    Some(bm) => (*bm).clone(),
                    None => BitMat::empty(kind, 0, rd, cd, d.extent(rd), d.extent(cd)),
                };
                if a == b {
                    bm.retain_pairs(|r, c| r == c && r <= d.num_shared());
                }
                let (row_var, col_var) = if object_first { (b, a) } else { (a, b) };
                Ok(PatternMatrix { bitmat: bm, row_var: Some(row_var.clone()), col_var: Some(col_var.clone()) })
            }
            (TermOrVar::Var(v), TermOrVar::Term(o)) => {
                let bm = self.single_row(BitMatKind::PS, d.id_of(Dim::O, o), pid, Dim::S);
                Ok(PatternMatrix { bitmat: bm, row_var: None, col_var: Some(v.clone()) })
            }
            (TermOrVar::Term(s), TermOrVar::Var(v)) => {
                let bm = self.single_row(BitMatKind::PO, d.id_of(Dim::S, s), pid, Dim::O);
                Ok(PatternMatrix { bitmat: bm, row_var: None, col_var: Some(v.clone()) })
            }
            (TermOrVar::Term(s), TermOrVar::Term(o)) => {
                let mut bm = self.single_row(BitMatKind::PO, d.id_of(Dim::S, s), pid, Dim::O);
                let oid = d.id_of(Dim::O, o);
                bm.retain_pairs(|_, c| Some(c) == oid);
                Ok(PatternMatrix { bitmat: bm, row_var: None, col_var: None })
            }
        }
    }

    fn single_row(&self, kind: BitMatKind, slice: Option<u32>, pid: Option<u32>, col_dim: Dim) -> BitMat {
        match (slice.and_then(|s| self.bitmat(kind, s)), pid) {
            (Some(bm), Some(p)) => bm.select_row(p),
            _ => BitMat::empty(kind, slice.unwrap_or(0), Dim::P, col_dim, 1, self.dict.extent(col_dim)),
        }
    }

    /// Writes the dictionary and the S-O BitMat of every predicate to `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        persist::ensure_dir(dir)?;
        persist::write_dictionary(dir, &self.dict)?;
        for p in 1..=self.dict.num_predicates() {
            let bm = self.bitmat(BitMatKind::SO, p).expect("predicate in range");
            persist::write_bitmat(&dir.join(persist::bitmat_file_name(BitMatKind::SO, p)), &bm)?;
        }
        Ok(())
    }

    pub fn open(dir: &Path) -> Result<Self> {
        let dict = persist::read_dictionary(dir)?;
        let mut triples = Vec::new();
        let mut cache = HashMap::new();
        for p in 1..=dict.num_predicates() {
            let bm = persist::read_bitmat(&dir.join(persist::bitmat_file_name(BitMatKind::SO, p)))?;
            if bm.kind != BitMatKind::SO
                || bm.slice != p
                || bm.nrows() != dict.num_subjects()
                || bm.ncols() != dict.num_objects()
            {
                return Err(Error::Format(format!("BitMat file for predicate {p} has the wrong shape")));
            }
            triples.extend(bm.pairs().map(|(s, o)| (s, p, o)));
            cache.insert((BitMatKind::SO, p), Arc::new(bm));
        }
        let store = Self::from_parts(dict, triples);
        *store.cache.write().expect("cache lock") = cache;
        Ok(store)
    }

    /// True when `dir` already holds a saved store.
    pub fn exists_in(dir: &Path) -> bool {
        dir.join(persist::DICT_FILE).exists()
    }

    pub fn term_id(&self, dim: Dim, term: &Term) -> Option<u32> {
        self.dict.id_of(dim, term)
    }
}
