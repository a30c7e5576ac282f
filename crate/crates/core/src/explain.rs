//! Line-oriented plan report: `key=value` lines grouped under `[section]`
//! headers. New keys may be added; existing ones keep their meaning.

use std::fmt::Write;

use crate::analysis::{Analysis, Gosn, StructureReport};
use crate::distinct::DistinctRun;
use crate::exec::QueryRun;
use crate::prune::ExecutedStep;
use crate::query::{Query, Shape, TriplePattern};

pub const EXPLAIN_VERSION: u32 = 1;

pub fn explain(q: &Query, run: &QueryRun, distinct: Option<&DistinctRun>) -> String {
    let mut out = String::new();
    let w = &mut out;
    line(w, "explain_version", EXPLAIN_VERSION);
    line(w, "algebra", q.serialize());
    line(w, "filter_placed", Shape::of(&run.normalized));
    line(w, "distinct", q.distinct);

    section(w, "unf");
    line(w, "disjuncts", run.unf.disjuncts.len());
    for (i, d) in run.unf.disjuncts.iter().enumerate() {
        line(w, &format!("disjunct.{i}"), Shape::of(d));
    }
    line(w, "rule3_used", run.unf.rule3_used);
    line(w, "best_match_applied", run.best_match_applied);

    for (i, comp) in run.components.iter().enumerate() {
        section(w, &format!("component {i}"));
        line(w, "tree", Shape::of(&comp.tree));
        let patterns: Vec<TriplePattern> = comp.tree.patterns().into_iter().cloned().collect();
        line(w, "regime", comp.prune.regime);
        let order: Vec<String> = comp.prune.sn_order.iter().map(|s| format!("S{s}")).collect();
        line(w, "sn_order", order.join(","));
        steps(w, &patterns, comp.load_steps.iter().chain(&comp.prune.steps));
    }

    for (i, sub) in run.subqueries.iter().enumerate() {
        section(w, &format!("subquery {i}"));
        line(w, "tree", Shape::of(&sub.tree));
        structure(w, &sub.analysis);
        let patterns = &sub.analysis.gosn.patterns;
        if let Some(p) = &sub.prune {
            line(w, "regime", p.regime);
        }
        steps(w, patterns, sub.load_steps.iter().chain(sub.prune.iter().flat_map(|p| &p.steps)));
        let counts: Vec<String> = patterns.iter().zip(&sub.counts).map(|(tp, c)| format!("{}:{c}", tp.name())).collect();
        line(w, "counts", counts.join(","));
        let stps: Vec<String> = sub.stps.iter().map(|&i| patterns[i].name()).collect();
        line(w, "stps", stps.join(","));
        line(w, "nulreqd", sub.nulreqd);
        line(w, "join.vmap_cells", sub.stats.vmap_cells);
        line(w, "join.rows_emitted", sub.stats.rows_emitted);
        line(w, "join.rows_nullified", sub.stats.rows_nullified);
        line(w, "join.rows_filtered", sub.stats.rows_filtered);
    }

    if let Some(d) = distinct {
        section(w, "distinct");
        line(w, "path", &d.path);
        for (i, state) in d.history.iter().enumerate() {
            line(w, &format!("mcs.{i}"), state);
        }
    }
    out
}

fn line(w: &mut String, key: &str, value: impl std::fmt::Display) {
    writeln!(w, "{key}={value}").expect("writing to a String");
}

fn section(w: &mut String, name: &str) {
    writeln!(w, "[{name}]").expect("writing to a String");
}

fn structure(w: &mut String, a: &Analysis) {
    let StructureReport {
        connected,
        well_designed,
        got_acyclic,
        path_acyclic,
        slaves_acyclic,
        abs_only_cycles,
        one_equiv_class_per_master_slave_pair,
        slaves_covered,
        nb_required,
    } = a.report;
    line(w, "connected", connected);
    line(w, "well_designed", well_designed);
    line(w, "got_acyclic", got_acyclic);
    line(w, "path_acyclic", path_acyclic);
    line(w, "slaves_acyclic", slaves_acyclic);
    line(w, "abs_only_cycles", abs_only_cycles);
    line(w, "one_equiv_class_per_master_slave_pair", one_equiv_class_per_master_slave_pair);
    line(w, "slaves_covered", slaves_covered);
    line(w, "nb_required", nb_required);

    let gosn: &Gosn = &a.gosn;
    for sn in &gosn.supernodes {
        let members: Vec<String> = sn.patterns.iter().map(|&p| gosn.patterns[p].name()).collect();
        let parent = sn.parent.map_or("-".to_string(), |p| format!("S{p}"));
        line(w, &format!("sn.S{}", sn.id), format!("{} parent={parent}", members.join(",")));
    }
    for e in &gosn.unit_edges {
        line(w, "gosn.edge", e);
    }
    for e in &a.got.edges {
        let vars: Vec<String> = e.label.iter().map(ToString::to_string).collect();
        line(w, "got.edge", format!("{}-{} {{{}}}", gosn.patterns[e.a].name(), gosn.patterns[e.b].name(), vars.join(",")));
    }
}

fn steps<'a>(w: &mut String, patterns: &[TriplePattern], steps: impl Iterator<Item = &'a ExecutedStep>) {
    for s in steps {
        let vars: Vec<String> = s.step.vars.iter().map(ToString::to_string).collect();
        line(
            w,
            &format!("step.{}", s.phase),
            format!(
                "{} ⋉ {} over {{{}}} removed={}",
                patterns[s.step.target].name(),
                patterns[s.step.source].name(),
                vars.join(","),
                s.removed
            ),
        );
    }
}
