//! The graph of supernodes and the graph of triple patterns.

use std::collections::BTreeSet;
use std::fmt;

use super::got::{Label, LabeledGraph};
use crate::error::{Error, Result};
use crate::query::{PatternNode, TriplePattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// Master to slave, one per left outer join.
    Uni,
    /// Between peers, one per inner join.
    Bi,
}

/// A directed or bidirectional edge between two OPT-free units, before
/// coalescing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnitEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

/// A maximal OPT-free subtree, flattened into one BGP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    /// 1-based positions of the subtree's BGPs in the serialized algebra.
    pub leaves: Vec<usize>,
    /// Indices into [`Gosn::patterns`].
    pub patterns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Supernode {
    pub id: usize,
    pub units: Vec<usize>,
    pub patterns: Vec<usize>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

impl Supernode {
    pub fn is_absolute_master(&self) -> bool {
        self.parent.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct Gosn {
    pub patterns: Vec<TriplePattern>,
    pub units: Vec<Unit>,
    pub unit_edges: Vec<UnitEdge>,
    pub supernodes: Vec<Supernode>,
    /// Supernode of each pattern.
    pub sn_of: Vec<usize>,
}

impl Gosn {
    /// Builds the GoSN of a UNION-free tree and coalesces every group of
    /// peers (units linked by inner joins) into one supernode.
    pub fn build(root: &PatternNode) -> Result<Gosn> {
        let mut b = Builder::default();
        b.visit(root)?;
        let units = b.units;
        let unit_edges = b.edges;

        let mut group: Vec<usize> = (0..units.len()).collect();
        fn find(g: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while g[r] != r {
                r = g[r];
            }
            g[x] = r;
            r
        }
        for e in unit_edges.iter().filter(|e| e.kind == EdgeKind::Bi) {
            let (a, b) = (find(&mut group, e.from), find(&mut group, e.to));
            group[a.max(b)] = a.min(b);
        }
        let mut roots: Vec<usize> = (0..units.len()).map(|u| find(&mut group, u)).collect();
        let mut reps: Vec<usize> = roots.clone();
        reps.sort_unstable();
        reps.dedup();
        for r in roots.iter_mut() {
            *r = reps.binary_search(r).expect("representative listed");
        }
        let mut supernodes: Vec<Supernode> = (0..reps.len())
            .map(|id| Supernode { id, units: Vec::new(), patterns: Vec::new(), parent: None, children: Vec::new() })
            .collect();
        for (u, unit) in units.iter().enumerate() {
            let sn = &mut supernodes[roots[u]];
            sn.units.push(u);
            sn.patterns.extend(&unit.patterns);
        }
        for e in unit_edges.iter().filter(|e| e.kind == EdgeKind::Uni) {
            let (m, s) = (roots[e.from], roots[e.to]);
            if m == s {
                return Err(Error::Contract("left outer join between peers".into()));
            }
            match supernodes[s].parent {
                Some(p) if p != m => {
                    return Err(Error::Contract(format!("supernode {s} has two masters")));
                }
                _ => supernodes[s].parent = Some(m),
            }
        }
        for s in 0..supernodes.len() {
            if let Some(p) = supernodes[s].parent {
                supernodes[p].children.push(s);
            }
        }
        for sn in supernodes.iter_mut() {
            sn.patterns.sort_unstable();
            sn.children.sort_unstable();
        }
        if supernodes.iter().skip(1).any(|sn| sn.parent.is_none()) || supernodes.first().is_some_and(|sn| sn.parent.is_some()) {
            return Err(Error::Contract("supernode graph is not rooted at the leftmost BGP".into()));
        }
        let mut sn_of = vec![0; b.patterns.len()];
        for sn in &supernodes {
            for &p in &sn.patterns {
                sn_of[p] = sn.id;
            }
        }
        Ok(Gosn { patterns: b.patterns, units, unit_edges, supernodes, sn_of })
    }

    pub const ABS: usize = 0;

    pub fn abs(&self) -> &Supernode {
        &self.supernodes[Self::ABS]
    }

    pub fn has_slaves(&self) -> bool {
        self.supernodes.len() > 1
    }

    /// True when supernode `a` is a proper ancestor of `b`.
    pub fn sn_is_master_of(&self, a: usize, b: usize) -> bool {
        let mut cur = self.supernodes[b].parent;
        while let Some(p) = cur {
            if p == a {
                return true;
            }
            cur = self.supernodes[p].parent;
        }
        false
    }

    /// True when pattern `i` is a master of pattern `j`.
    pub fn is_master(&self, i: usize, j: usize) -> bool {
        self.sn_is_master_of(self.sn_of[i], self.sn_of[j])
    }

    pub fn are_peers(&self, i: usize, j: usize) -> bool {
        self.sn_of[i] == self.sn_of[j]
    }

    pub fn parent(&self, sn: usize) -> Option<usize> {
        self.supernodes[sn].parent
    }

    /// Supernodes ordered so that every master precedes its slaves; siblings
    /// by id.
    pub fn masters_first(&self) -> Vec<usize> {
        let mut out = vec![Self::ABS];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.supernodes[out[i]].children.iter().copied());
            i += 1;
        }
        out
    }

    pub fn depth(&self, sn: usize) -> usize {
        let mut d = 0;
        let mut cur = self.supernodes[sn].parent;
        while let Some(p) = cur {
            d += 1;
            cur = self.supernodes[p].parent;
        }
        d
    }

    /// Patterns in `sn` and all its descendants.
    pub fn subtree_patterns(&self, sn: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![sn];
        while let Some(s) = stack.pop() {
            out.extend(&self.supernodes[s].patterns);
            stack.extend(&self.supernodes[s].children);
        }
        out.sort_unstable();
        out
    }

    /// GoT edges join patterns that share a variable and are either peers or
    /// in a direct master/slave pair of supernodes.
    pub fn got(&self) -> LabeledGraph {
        let mut g = LabeledGraph::new(self.patterns.len());
        for i in 0..self.patterns.len() {
            for j in i + 1..self.patterns.len() {
                let (a, b) = (self.sn_of[i], self.sn_of[j]);
                let adjacent = a == b || self.parent(a) == Some(b) || self.parent(b) == Some(a);
                if !adjacent {
                    continue;
                }
                let label: Label = self.patterns[i].shared_vars(&self.patterns[j]).into_iter().collect();
                if !label.is_empty() {
                    g.add_edge(i, j, label);
                }
            }
        }
        g
    }

    /// Display name of a supernode from the serialized names of its BGPs.
    pub fn sn_name(&self, sn: usize) -> String {
        let leaves: BTreeSet<usize> = self.supernodes[sn]
            .units
            .iter()
            .flat_map(|&u| self.units[u].leaves.iter().copied())
            .collect();
        let names: Vec<String> = leaves.into_iter().map(|l| format!("P{l}")).collect();
        format!("SN[{}]", names.join(","))
    }
}

impl fmt::Display for UnitEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.kind {
            EdgeKind::Uni => "->",
            EdgeKind::Bi => "<->",
        };
        write!(f, "U{} {arrow} U{}", self.from, self.to)
    }
}

#[derive(Default)]
struct Builder {
    patterns: Vec<TriplePattern>,
    units: Vec<Unit>,
    edges: Vec<UnitEdge>,
    leaf: usize,
}

impl Builder {
    /// Returns the unit holding the leftmost BGP of `node`.
    fn visit(&mut self, node: &PatternNode) -> Result<usize> {
        if !node.contains_optional() {
            if node.contains_union() {
                return Err(Error::Contract("supernode graph requires a UNION-free pattern".into()));
            }
            let start = self.patterns.len();
            let first_leaf = self.leaf + 1;
            self.leaf += count_bgps(node);
            self.patterns.extend(node.patterns().into_iter().cloned());
            self.units.push(Unit {
                leaves: (first_leaf..=self.leaf).collect(),
                patterns: (start..self.patterns.len()).collect(),
            });
            return Ok(self.units.len() - 1);
        }
        match node {
            PatternNode::Bgp(_) => unreachable!("a BGP is OPT-free"),
            PatternNode::Filter(inner, _) => self.visit(inner),
            PatternNode::Join(l, r) => {
                let a = self.visit(l)?;
                let b = self.visit(r)?;
                self.edges.push(UnitEdge { from: a, to: b, kind: EdgeKind::Bi });
                Ok(a)
            }
            PatternNode::LeftJoin(l, r, _) => {
                let a = self.visit(l)?;
                let b = self.visit(r)?;
                self.edges.push(UnitEdge { from: a, to: b, kind: EdgeKind::Uni });
                Ok(a)
            }
            PatternNode::Union(..) => Err(Error::Contract("supernode graph requires a UNION-free pattern".into())),
        }
    }
}

fn count_bgps(node: &PatternNode) -> usize {
    match node {
        PatternNode::Bgp(_) => 1,
        PatternNode::Join(l, r) | PatternNode::LeftJoin(l, r, _) | PatternNode::Union(l, r) => {
            count_bgps(l) + count_bgps(r)
        }
        PatternNode::Filter(inner, _) => count_bgps(inner),
    }
}
