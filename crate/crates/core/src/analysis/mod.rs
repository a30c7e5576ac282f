//! Structural analysis of UNION-free BGP-OPT patterns.

mod got;
mod gosn;
mod scope;

pub use got::{count_classes, Acyclicity, Edge, Label, LabeledGraph};
pub use gosn::{EdgeKind, Gosn, Supernode, Unit, UnitEdge};
pub use scope::{scoped_filters, ScopedFilter};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::term::Variable;
use crate::query::{check_well_designed, PatternNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureReport {
    pub connected: bool,
    pub well_designed: bool,
    pub got_acyclic: bool,
    /// For every supernode, the GoT restricted to it and its chain of
    /// masters is acyclic. Pairwise semi-joins reach minimality only then.
    pub path_acyclic: bool,
    pub slaves_acyclic: bool,
    /// Cycles exist, but only inside the absolute master supernode.
    pub abs_only_cycles: bool,
    pub one_equiv_class_per_master_slave_pair: bool,
    /// Every slave supernode is internally connected and has a pattern
    /// holding all variables it shares with its master.
    pub slaves_covered: bool,
    pub nb_required: bool,
}

/// Everything the pruning and join phases need to know about one
/// UNION-free pattern.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub gosn: Gosn,
    pub got: LabeledGraph,
    pub report: StructureReport,
    pub elimination_order: Vec<usize>,
    /// Per supernode, the pattern the join should enter it through.
    pub covers: Vec<Option<usize>>,
}

impl Analysis {
    pub fn of(root: &PatternNode) -> Result<Analysis> {
        let gosn = Gosn::build(root)?;
        let got = gosn.got();
        let well_designed = check_well_designed(root).is_ok();
        let (report, elimination_order) = classify(&gosn, &got, well_designed);
        let covers = (0..gosn.supernodes.len()).map(|sn| cover_pattern(&gosn, sn)).collect();
        Ok(Analysis { gosn, got, report, elimination_order, covers })
    }

    /// Like [`Analysis::of`] but rejects inputs the engine cannot evaluate.
    pub fn for_engine(root: &PatternNode) -> Result<Analysis> {
        check_well_designed(root)?;
        let a = Self::of(root)?;
        if !a.report.connected {
            return Err(Error::Disconnected);
        }
        Ok(a)
    }

    /// Labels of the GoT edges that cross from supernode `master` into `slave`.
    pub fn crossing_labels(&self, master: usize, slave: usize) -> Vec<&Label> {
        crossing(&self.gosn, &self.got, master, slave)
    }
}

fn crossing<'a>(gosn: &Gosn, got: &'a LabeledGraph, x: usize, y: usize) -> Vec<&'a Label> {
    got.edges
        .iter()
        .filter(|e| {
            let (a, b) = (gosn.sn_of[e.a], gosn.sn_of[e.b]);
            (a == x && b == y) || (a == y && b == x)
        })
        .map(|e| &e.label)
        .collect()
}

/// Decides whether nullification and best-match may be skipped: they may
/// when the whole GoT is acyclic, or when every slave supernode is acyclic
/// and each master/slave pair is linked by exactly one class of edges.
/// Patterns without OPTIONAL never need them.
pub fn classify(gosn: &Gosn, got: &LabeledGraph, well_designed: bool) -> (StructureReport, Vec<usize>) {
    let connected = got.is_connected();
    let acyclicity = got.acyclicity();
    let got_acyclic = acyclicity.acyclic;
    let path_acyclic = (0..gosn.supernodes.len()).all(|sn| {
        let mut chain = Vec::new();
        let mut cur = Some(sn);
        while let Some(s) = cur {
            chain.extend(&gosn.supernodes[s].patterns);
            cur = gosn.supernodes[s].parent;
        }
        chain.sort_unstable();
        got.induced(&chain).is_acyclic()
    });
    let slaves_acyclic = gosn
        .supernodes
        .iter()
        .filter(|sn| !sn.is_absolute_master())
        .all(|sn| got.induced(&sn.patterns).is_acyclic());
    let one_class = gosn.supernodes.iter().filter_map(|sn| sn.parent.map(|p| (p, sn.id))).all(|(m, s)| {
        count_classes(&crossing(gosn, got, m, s)) == 1
    });
    let slaves_covered = gosn.supernodes.iter().filter(|sn| !sn.is_absolute_master()).all(|sn| {
        cover_pattern(gosn, sn.id).is_some() && got.induced(&sn.patterns).is_connected()
    });
    let safe = (got_acyclic || one_class) && slaves_acyclic && slaves_covered;
    let nb_required = gosn.has_slaves() && !safe;
    (
        StructureReport {
            connected,
            well_designed,
            got_acyclic,
            path_acyclic,
            slaves_acyclic,
            abs_only_cycles: !got_acyclic && slaves_acyclic,
            one_equiv_class_per_master_slave_pair: one_class,
            slaves_covered,
            nb_required,
        },
        acyclicity.order,
    )
}

/// A pattern of slave supernode `sn` whose variables include every variable
/// the supernode shares with patterns outside its subtree. For the absolute
/// master this is `None`.
pub fn cover_pattern(gosn: &Gosn, sn: usize) -> Option<usize> {
    let node = &gosn.supernodes[sn];
    node.parent?;
    let inside = gosn.subtree_patterns(sn);
    let interface: BTreeSet<&Variable> = node
        .patterns
        .iter()
        .flat_map(|&i| gosn.patterns[i].vars())
        .filter(|v| {
            (0..gosn.patterns.len())
                .any(|j| inside.binary_search(&j).is_err() && gosn.patterns[j].has_var(v))
        })
        .collect();
    node.patterns
        .iter()
        .copied()
        .filter(|&i| interface.iter().all(|v| gosn.patterns[i].has_var(v)))
        .min()
}
