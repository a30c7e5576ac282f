//! Term dictionary. Subjects and objects share the ids 1..=|V_so|; terms that
//! appear only as subjects (or only as objects) continue from |V_so| + 1 in
//! their own space, so the same integer may name different terms in S and O.
//! Predicates are numbered independently.

use std::collections::{HashMap, HashSet};

use super::bitmat::Dim;
use crate::term::Term;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    subjects: Vec<Term>,
    objects: Vec<Term>,
    predicates: Vec<Term>,
    subject_ids: HashMap<Term, u32>,
    object_ids: HashMap<Term, u32>,
    predicate_ids: HashMap<Term, u32>,
    shared: u32,
}

/// The class of a dictionary entry as persisted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermClass {
    Shared,
    SubjectOnly,
    ObjectOnly,
    Predicate,
}

impl TermClass {
    pub fn tag(self) -> &'static str {
        match self {
            TermClass::Shared => "so",
            TermClass::SubjectOnly => "s",
            TermClass::ObjectOnly => "o",
            TermClass::Predicate => "p",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "so" => TermClass::Shared,
            "s" => TermClass::SubjectOnly,
            "o" => TermClass::ObjectOnly,
            "p" => TermClass::Predicate,
            _ => return None,
        })
    }
}

impl Dictionary {
    /// Assigns ids in first-appearance order within each class.
    pub fn build<'a>(triples: impl IntoIterator<Item = &'a (Term, Term, Term)> + Clone) -> Self {
        let subj: HashSet<&Term> = triples.clone().into_iter().map(|t| &t.0).collect();
        let obj: HashSet<&Term> = triples.clone().into_iter().map(|t| &t.2).collect();
        let mut shared = Vec::new();
        let mut s_only = Vec::new();
        let mut o_only = Vec::new();
        let mut preds = Vec::new();
        let mut seen_node: HashSet<&Term> = HashSet::new();
        let mut seen_pred: HashSet<&Term> = HashSet::new();
        for (s, p, o) in triples {
            for term in [s, o] {
                if seen_node.insert(term) {
                    match (subj.contains(term), obj.contains(term)) {
                        (true, true) => shared.push(term.clone()),
                        (true, false) => s_only.push(term.clone()),
                        _ => o_only.push(term.clone()),
                    }
                }
            }
            if seen_pred.insert(p) {
                preds.push(p.clone());
            }
        }
        let mut entries = Vec::new();
        for t in shared {
            entries.push((TermClass::Shared, t));
        }
        for t in s_only {
            entries.push((TermClass::SubjectOnly, t));
        }
        for t in o_only {
            entries.push((TermClass::ObjectOnly, t));
        }
        for t in preds {
            entries.push((TermClass::Predicate, t));
        }
        Self::from_entries(entries)
    }

    /// Rebuilds a dictionary from class-tagged entries listed in id order.
    pub fn from_entries(entries: impl IntoIterator<Item = (TermClass, Term)>) -> Self {
        let mut shared = Vec::new();
        let mut s_only = Vec::new();
        let mut o_only = Vec::new();
        let mut preds = Vec::new();
        for (class, term) in entries {
            match class {
                TermClass::Shared => shared.push(term),
                TermClass::SubjectOnly => s_only.push(term),
                TermClass::ObjectOnly => o_only.push(term),
                TermClass::Predicate => preds.push(term),
            }
        }
        let mut d = Dictionary {
            shared: shared.len() as u32,
            subjects: shared.iter().cloned().chain(s_only).collect(),
            objects: shared.into_iter().chain(o_only).collect(),
            predicates: preds,
            ..Default::default()
        };
        d.subject_ids = index(&d.subjects);
        d.object_ids = index(&d.objects);
        d.predicate_ids = index(&d.predicates);
        d
    }

    /// Entries in id order, tagged with their class and id.
    pub fn entries(&self) -> Vec<(u32, TermClass, &Term)> {
        let mut out = Vec::new();
        for (i, t) in self.subjects.iter().enumerate() {
            let id = i as u32 + 1;
            let class = if id <= self.shared { TermClass::Shared } else { TermClass::SubjectOnly };
            out.push((id, class, t));
        }
        for (i, t) in self.objects.iter().enumerate().skip(self.shared as usize) {
            out.push((i as u32 + 1, TermClass::ObjectOnly, t));
        }
        for (i, t) in self.predicates.iter().enumerate() {
            out.push((i as u32 + 1, TermClass::Predicate, t));
        }
        out
    }

    pub fn id_of(&self, dim: Dim, term: &Term) -> Option<u32> {
        match dim {
            Dim::S => self.subject_ids.get(term),
            Dim::O => self.object_ids.get(term),
            Dim::P => self.predicate_ids.get(term),
        }
        .copied()
    }

    pub fn term_of(&self, dim: Dim, id: u32) -> Option<&Term> {
        let list = match dim {
            Dim::S => &self.subjects,
            Dim::O => &self.objects,
            Dim::P => &self.predicates,
        };
        id.checked_sub(1).and_then(|i| list.get(i as usize))
    }

    pub fn num_subjects(&self) -> u32 {
        self.subjects.len() as u32
    }

    pub fn num_objects(&self) -> u32 {
        self.objects.len() as u32
    }

    pub fn num_predicates(&self) -> u32 {
        self.predicates.len() as u32
    }

    /// |V_so|: the number of terms that occur as both subject and object.
    pub fn num_shared(&self) -> u32 {
        self.shared
    }

    pub fn extent(&self, dim: Dim) -> u32 {
        match dim {
            Dim::S => self.num_subjects(),
            Dim::O => self.num_objects(),
            Dim::P => self.num_predicates(),
        }
    }

    /// Maps a dimension-local id to a node key that identifies the same term
    /// regardless of whether it was reached as a subject or an object.
    /// Predicates live in their own key space.
    pub fn node_key(&self, dim: Dim, id: u32) -> u32 {
        match dim {
            Dim::S | Dim::P => id,
            Dim::O if id <= self.shared => id,
            Dim::O => self.num_subjects() + (id - self.shared),
        }
    }

    /// Inverse of [`Dictionary::node_key`] for subjects and objects.
    pub fn key_to_dim(&self, key: u32, dim: Dim) -> Option<u32> {
        match dim {
            Dim::P => Some(key),
            Dim::S => (key >= 1 && key <= self.num_subjects()).then_some(key),
            Dim::O if key >= 1 && key <= self.shared => Some(key),
            Dim::O => {
                let vs = self.num_subjects();
                (key > vs && key - vs + self.shared <= self.num_objects()).then(|| key - vs + self.shared)
            }
        }
    }

    pub fn node_term(&self, key: u32) -> Option<&Term> {
        if key <= self.num_subjects() {
            self.term_of(Dim::S, key)
        } else {
            self.key_to_dim(key, Dim::O).and_then(|id| self.term_of(Dim::O, id))
        }
    }

    pub fn node_key_of(&self, term: &Term) -> Option<u32> {
        self.id_of(Dim::S, term)
            .map(|id| self.node_key(Dim::S, id))
            .or_else(|| self.id_of(Dim::O, term).map(|id| self.node_key(Dim::O, id)))
    }
}

fn index(terms: &[Term]) -> HashMap<Term, u32> {
    terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32 + 1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Term {
        Term::iri(s)
    }

    #[test]
    fn id_ranges() {
        let triples = vec![
            (iri("a"), iri("p"), iri("b")),
            (iri("b"), iri("q"), iri("c")),
            (iri("d"), iri("p"), Term::Int(5)),
        ];
        let d = Dictionary::build(&triples);
        assert_eq!(d.num_shared(), 1);
        assert_eq!(d.id_of(Dim::S, &iri("b")), Some(1));
        assert_eq!(d.id_of(Dim::O, &iri("b")), Some(1));
        assert_eq!(d.id_of(Dim::S, &iri("a")), Some(2));
        assert_eq!(d.id_of(Dim::S, &iri("d")), Some(3));
        assert_eq!(d.id_of(Dim::O, &iri("c")), Some(2));
        assert_eq!(d.id_of(Dim::O, &Term::Int(5)), Some(3));
        assert_eq!(d.num_predicates(), 2);
        let key = d.node_key(Dim::O, 2);
        assert_eq!(key, 4);
        assert_eq!(d.node_term(key), Some(&iri("c")));
        assert_eq!(d.key_to_dim(key, Dim::O), Some(2));
        assert_eq!(d.key_to_dim(key, Dim::S), None);
        assert_eq!(d.key_to_dim(2, Dim::O), None);
        let rebuilt = Dictionary::from_entries(d.entries().into_iter().map(|(_, c, t)| (c, t.clone())));
        assert_eq!(rebuilt, d);
    }
}
