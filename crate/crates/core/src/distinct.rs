//! DISTINCT evaluation.
//!
//! A DISTINCT query only needs the distinct combinations of the projected
//! variables. When the structure allows it, the engine keeps a minimal
//! connected subgraph (MCS) of the patterns that touch those variables and
//! shrinks it further by multiplying pairs of BitMats together, which
//! eliminates variables nobody asks for. Everything else goes through the
//! naive path: evaluate, project, sort, deduplicate.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::analysis::{Analysis, Gosn};
use crate::error::{Error, Result};
use crate::exec::{best_match, build_stps, execute, multi_way_join, prune_component, ExecOptions, JoinConfig, ResultSet};
use crate::prune::Regime;
use crate::query::{check_safe_filters, check_well_designed, PatternNode, Query, TriplePattern};
use crate::store::{bmm, Dim, Dictionary, Store};
use crate::term::{Term, TermOrVar, Variable};
use crate::working::WorkingPattern;

/// Why the shrinking path was not taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaiveReason {
    Union,
    Filter,
    Cyclic,
    /// The absolute master binds no DISTINCT variable.
    NoDistinctInMaster,
    /// A supernode on the way to a DISTINCT variable binds none itself.
    UnmarkedSupernode,
    Rejected,
}

impl fmt::Display for NaiveReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NaiveReason::Union => "union",
            NaiveReason::Filter => "filter",
            NaiveReason::Cyclic => "cyclic",
            NaiveReason::NoDistinctInMaster => "no-distinct-in-master",
            NaiveReason::UnmarkedSupernode => "unmarked-supernode",
            NaiveReason::Rejected => "rejected",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistinctPath {
    Bmm,
    Naive(NaiveReason),
}

impl fmt::Display for DistinctPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistinctPath::Bmm => f.write_str("bmm"),
            DistinctPath::Naive(r) => write!(f, "naive({r})"),
        }
    }
}

/// One snapshot of the MCS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McsState {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String, Vec<Variable>)>,
    pub triples: u64,
}

impl fmt::Display for McsState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nodes={} edges=", self.nodes.join(","))?;
        let edges: Vec<String> = self
            .edges
            .iter()
            .map(|(a, b, l)| {
                let vars: Vec<String> = l.iter().map(ToString::to_string).collect();
                format!("{a}-{b}{{{}}}", vars.join(","))
            })
            .collect();
        write!(f, "{} triples={}", edges.join(";"), self.triples)
    }
}

#[derive(Debug, Clone)]
pub struct DistinctRun {
    pub result: ResultSet,
    pub path: DistinctPath,
    /// MCS after carving, then after every BitMat multiplication.
    pub history: Vec<McsState>,
}

/// One node of the MCS: an original pattern or the product of two.
#[derive(Debug, Clone)]
struct McsNode {
    name: String,
    sn: usize,
    wp: WorkingPattern,
}

impl McsNode {
    fn vars(&self) -> BTreeSet<Variable> {
        self.wp.vars().into_iter().cloned().collect()
    }
}

#[derive(Debug, Clone)]
struct Mcs {
    nodes: Vec<McsNode>,
}

impl Mcs {
    fn shared(&self, a: usize, b: usize) -> Vec<Variable> {
        let vb = self.nodes[b].vars();
        self.nodes[a].vars().into_iter().filter(|v| vb.contains(v)).collect()
    }

    fn state(&self) -> McsState {
        let mut edges = Vec::new();
        for a in 0..self.nodes.len() {
            for b in a + 1..self.nodes.len() {
                let l = self.shared(a, b);
                if !l.is_empty() {
                    edges.push((self.nodes[a].name.clone(), self.nodes[b].name.clone(), l));
                }
            }
        }
        McsState {
            nodes: self.nodes.iter().map(|n| n.name.clone()).collect(),
            edges,
            triples: self.nodes.iter().map(|n| n.wp.count()).sum(),
        }
    }
}

/// Evaluates a query with DISTINCT semantics: distinct projected rows with
/// subsumed rows removed.
pub fn distinct_eval(q: &Query, store: &Store) -> Result<DistinctRun> {
    check_safe_filters(&q.root)?;
    check_well_designed(&q.root)?;
    let plan = match plan_reason(q) {
        Some(reason) => Err(reason),
        None => bmm_plan(q, store)?,
    };
    match plan {
        Ok((mcs, history)) => {
            let result = join_mcs(q, &mcs, store.dictionary())?;
            Ok(DistinctRun { result, path: DistinctPath::Bmm, history })
        }
        Err(reason) => Ok(DistinctRun { result: naive(q, store)?, path: DistinctPath::Naive(reason), history: Vec::new() }),
    }
}

/// The naive path: evaluate, project, sort and deduplicate, then drop
/// subsumed rows.
pub fn naive(q: &Query, store: &Store) -> Result<ResultSet> {
    let plain = Query::new(q.projection.clone(), false, q.root.clone());
    let run = execute(&plain, store, &ExecOptions::default())?;
    Ok(best_match(&run.result.sorted()))
}

fn plan_reason(q: &Query) -> Option<NaiveReason> {
    if q.root.contains_union() {
        Some(NaiveReason::Union)
    } else if q.root.contains_filter() {
        Some(NaiveReason::Filter)
    } else {
        None
    }
}

type Plan = std::result::Result<(Mcs, Vec<McsState>), NaiveReason>;

fn bmm_plan(q: &Query, store: &Store) -> Result<Plan> {
    let (wps, run) = match prune_component(store, &q.root) {
        Ok(x) => x,
        Err(e) if e.is_rejection() => return Ok(Err(NaiveReason::Rejected)),
        Err(e) => return Err(e),
    };
    let analysis = Analysis::for_engine(&q.root)?;
    let gosn = &analysis.gosn;
    if run.prune.regime != Regime::Passes || !analysis.report.path_acyclic || !sns_connected(&analysis) {
        return Ok(Err(NaiveReason::Cyclic));
    }
    let dist: BTreeSet<Variable> = q.projection.iter().cloned().collect();

    let sn_vars: Vec<BTreeSet<Variable>> = gosn
        .supernodes
        .iter()
        .map(|s| s.patterns.iter().flat_map(|&p| gosn.patterns[p].vars()).cloned().collect())
        .collect();
    let mut included = vec![false; gosn.supernodes.len()];
    included[Gosn::ABS] = true;
    for sn in 0..gosn.supernodes.len() {
        let mut above = BTreeSet::new();
        let mut cur = gosn.supernodes[sn].parent;
        while let Some(m) = cur {
            above.extend(sn_vars[m].iter().cloned());
            cur = gosn.supernodes[m].parent;
        }
        let marked = sn_vars[sn].iter().any(|v| dist.contains(v) && !above.contains(v));
        if marked {
            let mut cur = Some(sn);
            while let Some(s) = cur {
                included[s] = true;
                cur = gosn.supernodes[s].parent;
            }
        }
    }
    if sn_vars[Gosn::ABS].is_disjoint(&dist) {
        return Ok(Err(NaiveReason::NoDistinctInMaster));
    }
    if (0..included.len()).any(|sn| included[sn] && sn_vars[sn].is_disjoint(&dist)) {
        return Ok(Err(NaiveReason::UnmarkedSupernode));
    }

    let mut essential = dist.clone();
    for a in 0..included.len() {
        for b in a + 1..included.len() {
            if included[a] && included[b] {
                essential.extend(sn_vars[a].intersection(&sn_vars[b]).cloned());
            }
        }
    }

    let by_index: HashMap<usize, &WorkingPattern> = wps.iter().map(|wp| (wp.tp.index, wp)).collect();
    let mut nodes: Vec<McsNode> = Vec::new();
    for (p, tp) in gosn.patterns.iter().enumerate() {
        let sn = gosn.sn_of[p];
        if included[sn] {
            nodes.push(McsNode { name: tp.name(), sn, wp: by_index[&tp.index].clone() });
        }
    }
    let mut mcs = Mcs { nodes };
    carve(&mut mcs, &essential);
    let mut history = vec![mcs.state()];
    shrink(&mut mcs, &essential, store.dictionary(), &mut history)?;
    Ok(Ok((mcs, history)))
}

/// Every supernode's patterns form a connected part of the GoT.
fn sns_connected(analysis: &Analysis) -> bool {
    let gosn = &analysis.gosn;
    gosn.supernodes.iter().all(|s| {
        let members: Vec<&TriplePattern> = s.patterns.iter().map(|&p| &gosn.patterns[p]).collect();
        connected(members.len(), |a, b| !members[a].shared_vars(members[b]).is_empty())
    })
}

fn connected(n: usize, adjacent: impl Fn(usize, usize) -> bool) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for (b, s) in seen.iter_mut().enumerate() {
            if !*s && adjacent(a, b) {
                *s = true;
                stack.push(b);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Drops absolute-master patterns whose essential variables a neighbor
/// already binds, as long as the rest stays connected.
fn carve(mcs: &mut Mcs, essential: &BTreeSet<Variable>) {
    loop {
        let ess: Vec<BTreeSet<Variable>> =
            mcs.nodes.iter().map(|n| n.vars().intersection(essential).cloned().collect()).collect();
        let n = mcs.nodes.len();
        let victim = (0..n).rev().find(|&i| {
            if mcs.nodes[i].sn != Gosn::ABS {
                return false;
            }
            let covered = (0..n).any(|j| {
                j != i && mcs.nodes[j].sn == Gosn::ABS && !mcs.shared(i, j).is_empty() && ess[i].is_subset(&ess[j])
            });
            if !covered {
                return false;
            }
            let rest: Vec<usize> = (0..n).filter(|&k| k != i).collect();
            connected(rest.len(), |a, b| !mcs.shared(rest[a], rest[b]).is_empty())
        });
        match victim {
            Some(i) => {
                mcs.nodes.remove(i);
            }
            None => return,
        }
    }
}

/// A pair of nodes whose only shared variable is local to the two of them
/// and not needed in the answer.
fn eligible(mcs: &Mcs, essential: &BTreeSet<Variable>, a: usize, b: usize) -> Option<Variable> {
    let (na, nb) = (&mcs.nodes[a], &mcs.nodes[b]);
    if na.sn != nb.sn {
        return None;
    }
    let two_vars = |n: &McsNode| {
        n.wp.row_var.is_some()
            && n.wp.col_var.is_some()
            && n.wp.row_var != n.wp.col_var
            && [n.wp.bm.row_dim, n.wp.bm.col_dim].iter().all(|d| *d != Dim::P)
    };
    if !two_vars(na) || !two_vars(nb) {
        return None;
    }
    let shared = mcs.shared(a, b);
    let [m] = shared.as_slice() else { return None };
    if essential.contains(m) {
        return None;
    }
    if (0..mcs.nodes.len()).any(|k| k != a && k != b && mcs.nodes[k].vars().contains(m)) {
        return None;
    }
    Some(m.clone())
}

/// Repeatedly multiplies eligible pairs, cheapest first, replacing both
/// endpoints with their product.
fn shrink(mcs: &mut Mcs, essential: &BTreeSet<Variable>, dict: &Dictionary, history: &mut Vec<McsState>) -> Result<()> {
    loop {
        let n = mcs.nodes.len();
        let mut best: Option<(u64, usize, usize, Variable)> = None;
        for a in 0..n {
            for b in a + 1..n {
                if let Some(m) = eligible(mcs, essential, a, b) {
                    let cost = mcs.nodes[a].wp.count() + mcs.nodes[b].wp.count();
                    if best.as_ref().is_none_or(|(c, ..)| cost < *c) {
                        best = Some((cost, a, b, m));
                    }
                }
            }
        }
        let Some((_, a, b, m)) = best else { return Ok(()) };
        let before = mcs.nodes.len();
        let product = multiply(&mcs.nodes[a], &mcs.nodes[b], &m, dict, history.len())?;
        mcs.nodes.remove(b);
        mcs.nodes[a] = product;
        if mcs.nodes.len() > before {
            return Err(Error::Contract("MCS grew during shrinking".into()));
        }
        history.push(mcs.state());
    }
}

fn multiply(a: &McsNode, b: &McsNode, m: &Variable, dict: &Dictionary, step: usize) -> Result<McsNode> {
    let mut left = a.wp.clone();
    if left.col_var.as_ref() != Some(m) {
        left.bm = left.bm.transpose();
        std::mem::swap(&mut left.row_var, &mut left.col_var);
    }
    let mut right = b.wp.clone();
    if right.row_var.as_ref() != Some(m) {
        right.bm = right.bm.transpose();
        std::mem::swap(&mut right.row_var, &mut right.col_var);
    }
    let bm = bmm(&left.bm, &right.bm, dict.num_shared())?;
    let x = left.row_var.clone().expect("two-variable pattern");
    let y = right.col_var.clone().expect("two-variable pattern");
    let tp = TriplePattern::new(
        TermOrVar::Var(x.clone()),
        TermOrVar::Term(Term::iri(format!("urn:bitopt:product:{step}"))),
        TermOrVar::Var(y.clone()),
        PRODUCT_BASE + step,
    );
    Ok(McsNode {
        name: format!("{}{}", a.name, b.name),
        sn: a.sn,
        wp: WorkingPattern { local: 0, tp, bm, row_var: Some(x), col_var: Some(y) },
    })
}

const PRODUCT_BASE: usize = 1 << 20;

/// Joins the shrunk MCS under the original supernode hierarchy.
fn join_mcs(q: &Query, mcs: &Mcs, dict: &Dictionary) -> Result<ResultSet> {
    let gosn = Gosn::build(&q.root)?;
    let tree = sn_tree(&gosn, Gosn::ABS, mcs).expect("absolute master is in the MCS");
    let analysis = Analysis::for_engine(&tree)?;
    let by_index: HashMap<usize, &McsNode> = mcs.nodes.iter().map(|n| (n.wp.tp.index, n)).collect();
    let wps: Vec<WorkingPattern> = analysis
        .gosn
        .patterns
        .iter()
        .enumerate()
        .map(|(i, tp)| {
            let mut wp = by_index[&tp.index].wp.clone();
            wp.local = i;
            wp
        })
        .collect();
    let stps = build_stps(&analysis, &wps);
    let vars = tree.vars_in_order();
    let cfg = JoinConfig { nulreqd: true, pattern_level_nulls: false };
    let out = multi_way_join(&analysis, &wps, &stps, &[], dict, &vars, cfg);
    let mut rs = ResultSet::new(vars);
    rs.rows = out
        .rows
        .iter()
        .map(|r| r.iter().map(|k| k.and_then(|k| dict.node_term(k).cloned())).collect())
        .collect();
    Ok(best_match(&rs.project(&q.projection).sorted()))
}

fn sn_tree(gosn: &Gosn, sn: usize, mcs: &Mcs) -> Option<PatternNode> {
    let own: Vec<TriplePattern> = mcs.nodes.iter().filter(|n| n.sn == sn).map(|n| n.wp.tp.clone()).collect();
    if own.is_empty() {
        return None;
    }
    let mut node = PatternNode::Bgp(own);
    for &child in &gosn.supernodes[sn].children {
        if let Some(sub) = sn_tree(gosn, child, mcs) {
            node = PatternNode::left_join(node, sub);
        }
    }
    Some(node)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_eval;
    use crate::query::parse;
    use crate::store::Triple;

    fn movie_store() -> Store {
        let ex = |s: &str| Term::iri(format!("http://example.org/{s}"));
        let mut triples: Vec<Triple> = Vec::new();
        for m in ["KillBill1", "KillBill2", "PulpFiction"] {
            triples.push((ex("UmaThurman"), ex("actedIn"), ex(m)));
            triples.push((ex(m), ex("directedBy"), ex("QuentinTarantino")));
            triples.push((ex(m), ex("genre"), ex("Crime")));
        }
        triples.push((ex("JohnTravolta"), ex("actedIn"), ex("PulpFiction")));
        triples.push((ex("Gattaca"), ex("directedBy"), ex("AndrewNiccol")));
        triples.push((ex("UmaThurman"), ex("actedIn"), ex("Gattaca")));
        Store::from_triples(&triples).unwrap()
    }

    const MOVIES: &str = "PREFIX : <http://example.org/>
        SELECT DISTINCT ?actor ?director WHERE {
          ?actor :actedIn ?movie . ?movie :directedBy ?director . ?movie :genre ?g }";

    #[test]
    fn actor_director_pair_appears_once() {
        let store = movie_store();
        let q = parse(MOVIES).unwrap();
        let run = distinct_eval(&q, &store).unwrap();
        assert_eq!(run.path, DistinctPath::Bmm);
        let uma: Vec<_> = run
            .result
            .rows
            .iter()
            .filter(|r| r[0] == Some(Term::iri("http://example.org/UmaThurman")))
            .collect();
        assert_eq!(uma.len(), 1);
        assert_eq!(run.result.len(), 2);
        assert!(run.result.same_multiset(&naive(&q, &store).unwrap()));
        let oracle = oracle_eval(&q, &store.triples().collect::<Vec<_>>()).unwrap();
        assert!(run.result.same_multiset(&best_match(&oracle.sorted())));
    }

    #[test]
    fn product_replaces_both_endpoints() {
        let run = distinct_eval(&parse(MOVIES).unwrap(), &movie_store()).unwrap();
        assert_eq!(run.history.first().unwrap().nodes, vec!["T1", "T2"]);
        assert_eq!(run.history.last().unwrap().nodes, vec!["T1T2"]);
        assert!(run.history.windows(2).all(|w| w[1].nodes.len() <= w[0].nodes.len()));
    }

    #[test]
    fn union_goes_naive() {
        let q = parse(
            "PREFIX : <http://example.org/>
             SELECT DISTINCT ?a WHERE { { ?a :actedIn ?m } UNION { ?m :directedBy ?a } }",
        )
        .unwrap();
        let run = distinct_eval(&q, &movie_store()).unwrap();
        assert_eq!(run.path, DistinctPath::Naive(NaiveReason::Union));
    }
}
