//! Labeled undirected graphs of triple patterns, edge equivalence classes and
//! leaf-elimination acyclicity.

use std::collections::{BTreeSet, HashMap};

use crate::term::Variable;

pub type Label = BTreeSet<Variable>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub label: Label,
}

impl Edge {
    pub fn other(&self, n: usize) -> usize {
        if self.a == n {
            self.b
        } else {
            self.a
        }
    }

    pub fn touches(&self, n: usize) -> bool {
        self.a == n || self.b == n
    }
}

/// An undirected graph whose edges carry variable-set labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    pub nodes: usize,
    pub edges: Vec<Edge>,
}

/// Result of the leaf-elimination test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Acyclicity {
    pub acyclic: bool,
    /// A complete removal order when acyclic; otherwise the nodes that could
    /// be removed before no leaf remained.
    pub order: Vec<usize>,
}

/// Above this many nodes the exhaustive order search is skipped.
const EXHAUSTIVE_LIMIT: usize = 20;

impl LabeledGraph {
    pub fn new(nodes: usize) -> Self {
        LabeledGraph { nodes, edges: Vec::new() }
    }

    pub fn add_edge(&mut self, a: usize, b: usize, label: Label) {
        debug_assert!(a != b && !label.is_empty());
        self.edges.push(Edge { a: a.min(b), b: a.max(b), label });
    }

    /// Restriction to `keep`, renumbered in the order given.
    pub fn induced(&self, keep: &[usize]) -> LabeledGraph {
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut g = LabeledGraph::new(keep.len());
        for e in &self.edges {
            if let (Some(&a), Some(&b)) = (pos.get(&e.a), pos.get(&e.b)) {
                g.add_edge(a, b, e.label.clone());
            }
        }
        g
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes <= 1 {
            return true;
        }
        let mut seen = vec![false; self.nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for e in self.edges.iter().filter(|e| e.touches(n)) {
                let m = e.other(n);
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Equivalence classes among the edges incident to `node`, restricted to
    /// edges whose both endpoints are in `alive`.
    pub fn incident_classes(&self, node: usize, alive: &[bool]) -> usize {
        let labels: Vec<&Label> = self
            .edges
            .iter()
            .filter(|e| e.touches(node) && alive[e.a] && alive[e.b])
            .map(|e| &e.label)
            .collect();
        count_classes(&labels)
    }

    fn is_leaf(&self, node: usize, alive: &[bool]) -> bool {
        self.incident_classes(node, alive) <= 1
    }

    /// The graph is acyclic when some sequence of leaf removals empties it;
    /// a leaf is a node whose remaining incident edges form at most one
    /// equivalence class.
    pub fn acyclicity(&self) -> Acyclicity {
        let mut alive = vec![true; self.nodes];
        let mut order = Vec::with_capacity(self.nodes);
        while order.len() < self.nodes {
            match (0..self.nodes).find(|&n| alive[n] && self.is_leaf(n, &alive)) {
                Some(n) => {
                    alive[n] = false;
                    order.push(n);
                }
                None => break,
            }
        }
        if order.len() == self.nodes {
            return Acyclicity { acyclic: true, order };
        }
        if self.nodes <= EXHAUSTIVE_LIMIT {
            if let Some(full) = self.search_order() {
                return Acyclicity { acyclic: true, order: full };
            }
        }
        Acyclicity { acyclic: false, order }
    }

    pub fn is_acyclic(&self) -> bool {
        self.acyclicity().acyclic
    }

    fn search_order(&self) -> Option<Vec<usize>> {
        let full: u32 = if self.nodes == 32 { u32::MAX } else { (1u32 << self.nodes) - 1 };
        let mut dead_ends = std::collections::HashSet::new();
        let mut order = Vec::new();
        if self.search(full, &mut dead_ends, &mut order) {
            Some(order)
        } else {
            None
        }
    }

    fn search(&self, remaining: u32, dead: &mut std::collections::HashSet<u32>, order: &mut Vec<usize>) -> bool {
        if remaining == 0 {
            return true;
        }
        if dead.contains(&remaining) {
            return false;
        }
        let alive: Vec<bool> = (0..self.nodes).map(|n| remaining & (1 << n) != 0).collect();
        for n in 0..self.nodes {
            if alive[n] && self.is_leaf(n, &alive) {
                order.push(n);
                if self.search(remaining & !(1 << n), dead, order) {
                    return true;
                }
                order.pop();
            }
        }
        dead.insert(remaining);
        false
    }
}

/// Number of connected components of the "one label contains the other"
/// relation over `labels`.
pub fn count_classes(labels: &[&Label]) -> usize {
    let n = labels.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if labels[i].is_subset(labels[j]) || labels[j].is_subset(labels[i]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}
