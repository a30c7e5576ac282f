//! Semi-join pruning of the per-pattern working BitMats.

use std::fmt;

use crate::analysis::{count_classes, Analysis, Gosn, Label, LabeledGraph};
use crate::error::Result;
use crate::query::FilterExpr;
use crate::store::{Dictionary, Store};
use crate::term::Variable;
use crate::working::{semi_join, WorkingPattern};

/// `target ⋉ source` over `vars`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemiJoinStep {
    pub target: usize,
    pub source: usize,
    pub vars: Vec<Variable>,
}

impl SemiJoinStep {
    fn new(target: usize, source: usize, label: &Label) -> Self {
        SemiJoinStep { target, source, vars: label.iter().cloned().collect() }
    }

    pub fn display(&self, patterns: &[WorkingPattern]) -> String {
        let vars: Vec<String> = self.vars.iter().map(|v| v.to_string()).collect();
        format!(
            "{} ⋉ {} over {{{}}}",
            patterns[self.target].tp.name(),
            patterns[self.source].tp.name(),
            vars.join(",")
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Load,
    Greedy,
    BottomUp,
    TopDown,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Load => "load",
            Phase::Greedy => "greedy",
            Phase::BottomUp => "bu",
            Phase::TopDown => "td",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutedStep {
    pub phase: Phase,
    pub step: SemiJoinStep,
    pub removed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Cycles inside slave supernodes: one greedy order over everything.
    GreedyAll,
    /// Slave supernodes are acyclic but the whole graph is not: greedy in
    /// the absolute master when it is cyclic, passes elsewhere.
    GreedyAbs,
    /// Acyclic: bottom-up and top-down passes in every supernode.
    Passes,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::GreedyAll => "greedy-all",
            Regime::GreedyAbs => "greedy-abs",
            Regime::Passes => "bu-td",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PruneReport {
    pub regime: Regime,
    pub sn_order: Vec<usize>,
    pub steps: Vec<ExecutedStep>,
}

/// A single-variable filter conjunct applied while loading the patterns of
/// one supernode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadMask {
    pub sn: usize,
    pub var: Variable,
    pub expr: FilterExpr,
}

pub fn order_supernodes(gosn: &Gosn) -> Vec<usize> {
    gosn.masters_first()
}

pub fn regime(analysis: &Analysis) -> Regime {
    let r = &analysis.report;
    if !r.slaves_acyclic {
        Regime::GreedyAll
    } else if r.got_acyclic && r.path_acyclic {
        Regime::Passes
    } else {
        Regime::GreedyAbs
    }
}

fn label_between(got: &LabeledGraph, a: usize, b: usize) -> Option<&Label> {
    got.edges
        .iter()
        .find(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
        .map(|e| &e.label)
}

fn cost_key(wps: &[WorkingPattern], i: usize) -> (u64, usize) {
    (wps[i].count(), i)
}

/// Loads the BitMat of every pattern. When `active` is set, each newly
/// loaded pattern is semi-joined with the already loaded masters and peers
/// it shares variables with. Patterns load supernode by supernode, masters
/// first, cheapest first.
pub fn load_patterns(
    store: &Store,
    analysis: &Analysis,
    masks: &[LoadMask],
    active: bool,
) -> Result<(Vec<WorkingPattern>, Vec<ExecutedStep>)> {
    let gosn = &analysis.gosn;
    let dict = store.dictionary();
    let mut wps = Vec::with_capacity(gosn.patterns.len());
    for (i, tp) in gosn.patterns.iter().enumerate() {
        let join_vars: Vec<&Variable> = tp
            .vars()
            .into_iter()
            .filter(|v| gosn.patterns.iter().enumerate().any(|(j, other)| j != i && other.has_var(v)))
            .collect();
        let first = match join_vars.as_slice() {
            [only] => Some(*only),
            _ => None,
        };
        let mut wp = WorkingPattern::load(store, tp, i, first)?;
        for m in masks.iter().filter(|m| m.sn == gosn.sn_of[i] && tp.has_var(&m.var)) {
            wp.restrict_terms(&m.var, dict, |t| m.expr.eval(&|_| Some(t)).is_true())?;
        }
        wps.push(wp);
    }
    let mut steps = Vec::new();
    if active {
        let mut order: Vec<usize> = Vec::new();
        for sn in order_supernodes(gosn) {
            let mut members = gosn.supernodes[sn].patterns.clone();
            members.sort_by_key(|&i| cost_key(&wps, i));
            order.extend(members);
        }
        for (k, &i) in order.iter().enumerate() {
            for &p in &order[..k] {
                if !(gosn.are_peers(p, i) || gosn.is_master(p, i)) {
                    continue;
                }
                let shared = gosn.patterns[i].shared_vars(&gosn.patterns[p]);
                if shared.is_empty() {
                    continue;
                }
                let step = SemiJoinStep { target: i, source: p, vars: shared };
                steps.push(run_step(&mut wps, step, Phase::Load, dict)?);
            }
        }
    }
    Ok((wps, steps))
}

fn run_step(wps: &mut [WorkingPattern], step: SemiJoinStep, phase: Phase, dict: &Dictionary) -> Result<ExecutedStep> {
    let source = wps[step.source].clone();
    let removed = semi_join(&mut wps[step.target], &source, &step.vars, dict)?;
    Ok(ExecutedStep { phase, step, removed })
}

/// Runs the pruning schedule for one UNION-free pattern over its loaded
/// working BitMats. Each supernode's schedule is built only once its
/// masters are pruned, so costs reflect the current counts.
pub fn prune_triples(analysis: &Analysis, wps: &mut [WorkingPattern], dict: &Dictionary) -> Result<PruneReport> {
    let gosn = &analysis.gosn;
    let regime = regime(analysis);
    let sn_order = order_supernodes(gosn);
    let mut steps = Vec::new();
    let passes_over: &[usize] = match regime {
        Regime::GreedyAll => {
            let all: Vec<usize> = (0..wps.len()).collect();
            for step in greedy_order(analysis, &all, wps) {
                steps.push(run_step(wps, step, Phase::Greedy, dict)?);
            }
            &[]
        }
        Regime::GreedyAbs if !analysis.got.induced(&gosn.abs().patterns).is_acyclic() => {
            for step in greedy_order(analysis, &gosn.abs().patterns, wps) {
                steps.push(run_step(wps, step, Phase::Greedy, dict)?);
            }
            &sn_order[1..]
        }
        Regime::GreedyAbs => &sn_order,
        Regime::Passes => &sn_order,
    };
    for &sn in passes_over {
        let bu = bottom_up_order(analysis, sn, wps);
        for step in bu.clone() {
            steps.push(run_step(wps, step, Phase::BottomUp, dict)?);
        }
        for step in top_down_order(&bu, gosn) {
            steps.push(run_step(wps, step, Phase::TopDown, dict)?);
        }
    }
    Ok(PruneReport { regime, sn_order, steps })
}

/// Patterns in ascending count, never before the patterns of their master
/// supernodes; each is semi-joined with every already processed neighbor
/// that is a peer or a master.
pub fn greedy_order(analysis: &Analysis, patterns: &[usize], wps: &[WorkingPattern]) -> Vec<SemiJoinStep> {
    let gosn = &analysis.gosn;
    let got = &analysis.got;
    let mut remaining: Vec<usize> = patterns.to_vec();
    let mut done: Vec<usize> = Vec::new();
    let mut steps = Vec::new();
    while !remaining.is_empty() {
        let eligible = |i: usize| {
            !remaining
                .iter()
                .any(|&j| j != i && gosn.sn_is_master_of(gosn.sn_of[j], gosn.sn_of[i]))
        };
        let pick = remaining
            .iter()
            .copied()
            .filter(|&i| eligible(i))
            .min_by_key(|&i| cost_key(wps, i))
            .expect("master hierarchy is acyclic");
        for &p in &done {
            if gosn.is_master(pick, p) {
                continue;
            }
            if let Some(label) = label_between(got, pick, p) {
                steps.push(SemiJoinStep::new(pick, p, label));
            }
        }
        remaining.retain(|&i| i != pick);
        done.push(pick);
    }
    steps
}

/// The bottom-up pass of one supernode: repeatedly take the cheapest leaf,
/// first pull in its masters' constraints (slave supernodes only), then
/// reduce by it the cheapest remaining neighbor whose edge label contains
/// all the leaf's other live labels.
pub fn bottom_up_order(analysis: &Analysis, sn: usize, wps: &[WorkingPattern]) -> Vec<SemiJoinStep> {
    let gosn = &analysis.gosn;
    let got = &analysis.got;
    let node = &gosn.supernodes[sn];
    let members = &node.patterns;
    let local = got.induced(members);
    let mut alive = vec![true; members.len()];
    let mut steps = Vec::new();
    for _ in 0..members.len() {
        let leaves: Vec<usize> = (0..members.len())
            .filter(|&k| alive[k] && local.incident_classes(k, &alive) <= 1)
            .collect();
        let still_acyclic = |k: usize| {
            let rest: Vec<usize> = (0..members.len()).filter(|&x| alive[x] && x != k).collect();
            local.induced(&rest).is_acyclic()
        };
        let mut candidates: Vec<usize> = leaves.iter().copied().filter(|&k| still_acyclic(k)).collect();
        if candidates.is_empty() {
            candidates = if leaves.is_empty() {
                (0..members.len()).filter(|&k| alive[k]).collect()
            } else {
                leaves
            };
        }
        let k = candidates
            .into_iter()
            .min_by_key(|&k| cost_key(wps, members[k]))
            .expect("a live pattern remains");
        let ti = members[k];
        if let Some(parent) = node.parent {
            for &tm in &gosn.supernodes[parent].patterns {
                if let Some(label) = label_between(got, ti, tm) {
                    steps.push(SemiJoinStep::new(ti, tm, label));
                }
            }
        }
        let incident: Vec<(usize, &Label)> = local
            .edges
            .iter()
            .filter(|e| e.touches(k) && alive[e.other(k)])
            .map(|e| (e.other(k), &e.label))
            .collect();
        let covering: Vec<(usize, &Label)> = incident
            .iter()
            .copied()
            .filter(|(_, l)| incident.iter().all(|(_, other)| other.is_subset(l)))
            .collect();
        let pool = if covering.is_empty() { &incident } else { &covering };
        let neighbor = pool.iter().copied().min_by_key(|(j, _)| cost_key(wps, members[*j]));
        if let Some((j, label)) = neighbor {
            steps.push(SemiJoinStep::new(members[j], ti, label));
        }
        alive[k] = false;
    }
    steps
}

/// Reverses the bottom-up pass, swapping the sides of every step, and drops
/// steps that would prune a master by its slave.
pub fn top_down_order(bu: &[SemiJoinStep], gosn: &Gosn) -> Vec<SemiJoinStep> {
    bu.iter()
        .rev()
        .map(|s| SemiJoinStep { target: s.source, source: s.target, vars: s.vars.clone() })
        .filter(|s| !gosn.is_master(s.target, s.source))
        .collect()
}

/// Equivalence classes of the GoT edges crossing between two supernodes.
pub fn crossing_classes(analysis: &Analysis, a: usize, b: usize) -> usize {
    count_classes(&analysis.crossing_labels(a, b))
}
