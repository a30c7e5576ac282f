//! Query execution: pruning, UNION normal form, the multi-way join and
//! minimum union.

mod join;
mod result;

pub use join::{build_stps, multi_way_join, tporder, JoinConfig, JoinOutput, JoinStats};
pub use result::{best_match, subsumes, ResultSet, Row};

use std::collections::HashMap;

use crate::analysis::{scoped_filters, Analysis, Gosn, ScopedFilter};
use crate::error::Result;
use crate::prune::{load_patterns, prune_triples, ExecutedStep, LoadMask, PruneReport};
use crate::query::{check_safe_filters, check_well_designed, PatternNode, Query};
use crate::rewrite::{classify_loadtime_filters, push_filters, to_unf, union_free_components, UnfResult};
use crate::store::Store;
use crate::working::WorkingPattern;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExecOptions {
    /// Skip all semi-join pruning; nullification and best-match then run
    /// unconditionally.
    pub no_prune: bool,
    /// Join in textual pattern order, null-extending slave patterns one by
    /// one, and never apply best-match. Requires `no_prune`.
    pub unsafe_order: bool,
    /// With `unsafe_order`, run nullification on each row.
    pub nullify: bool,
    /// Run nullification and a per-subquery best-match even where the
    /// structure says they are not needed.
    pub force_nullify: bool,
    /// Never run nullification or best-match, whatever the structure says.
    /// Only useful to show what goes wrong without them.
    pub skip_nullification: bool,
}

/// What happened to one UNION-free subquery.
#[derive(Debug, Clone)]
pub struct SubqueryRun {
    pub tree: PatternNode,
    pub analysis: Analysis,
    pub filters: Vec<ScopedFilter>,
    pub load_steps: Vec<ExecutedStep>,
    pub prune: Option<PruneReport>,
    pub counts: Vec<u64>,
    pub stps: Vec<usize>,
    pub nulreqd: bool,
    pub stats: JoinStats,
}

/// Pruning of one UNION-free component, done before the UNION rewrite.
#[derive(Debug, Clone)]
pub struct ComponentRun {
    pub tree: PatternNode,
    pub load_steps: Vec<ExecutedStep>,
    pub prune: PruneReport,
}

#[derive(Debug, Clone)]
pub struct QueryRun {
    pub result: ResultSet,
    pub normalized: PatternNode,
    pub unf: UnfResult,
    pub components: Vec<ComponentRun>,
    pub subqueries: Vec<SubqueryRun>,
    pub best_match_applied: bool,
}

/// Evaluates `q`, routing DISTINCT queries through the distinct engine.
pub fn run_query(q: &Query, store: &Store) -> Result<ResultSet> {
    if q.distinct {
        return crate::distinct::distinct_eval(q, store).map(|r| r.result);
    }
    execute(q, store, &ExecOptions::default()).map(|r| r.result)
}

/// Load-time masks from the single-variable conjuncts of scoped filters.
pub fn load_masks(filters: &[ScopedFilter]) -> Vec<LoadMask> {
    let mut out = Vec::new();
    for f in filters {
        for c in classify_loadtime_filters(&f.expr).load_time {
            let var = c.vars().into_iter().next().expect("one variable");
            out.push(LoadMask { sn: f.scope.unwrap_or(Gosn::ABS), var, expr: c });
        }
    }
    out
}

/// Loads and prunes the patterns of one UNION-free component.
pub fn prune_component(store: &Store, tree: &PatternNode) -> Result<(Vec<WorkingPattern>, ComponentRun)> {
    let analysis = Analysis::of(tree)?;
    let filters = scoped_filters(&analysis.gosn, tree);
    let (mut wps, load_steps) = load_patterns(store, &analysis, &load_masks(&filters), true)?;
    let prune = prune_triples(&analysis, &mut wps, store.dictionary())?;
    Ok((wps, ComponentRun { tree: tree.clone(), load_steps, prune }))
}

/// Full pipeline for a query without DISTINCT handling.
pub fn execute(q: &Query, store: &Store, opts: &ExecOptions) -> Result<QueryRun> {
    check_safe_filters(&q.root)?;
    check_well_designed(&q.root)?;
    let prune = !(opts.no_prune || opts.unsafe_order);
    let normalized = push_filters(&q.root);
    let has_union = normalized.contains_union();

    let mut components = Vec::new();
    let mut pruned: HashMap<usize, WorkingPattern> = HashMap::new();
    if prune {
        for comp in union_free_components(&normalized) {
            let (wps, run) = prune_component(store, comp)?;
            for wp in wps {
                pruned.insert(wp.tp.index, wp);
            }
            components.push(run);
        }
    }

    let unf = to_unf(&normalized)?;
    let header = normalized.vars_in_order();
    let mut union_all = ResultSet::new(header.clone());
    let mut subqueries = Vec::new();
    let mut any_nullified = false;
    for tree in &unf.disjuncts {
        let analysis = Analysis::for_engine(tree)?;
        let filters = scoped_filters(&analysis.gosn, tree);
        let mut load_steps = Vec::new();
        let mut wps = if prune {
            let mut wps = Vec::with_capacity(analysis.gosn.patterns.len());
            for (i, tp) in analysis.gosn.patterns.iter().enumerate() {
                let mut wp = pruned[&tp.index].clone();
                wp.local = i;
                wps.push(wp);
            }
            wps
        } else {
            let (wps, steps) = load_patterns(store, &analysis, &[], false)?;
            load_steps = steps;
            wps
        };
        let report = if prune && has_union {
            Some(prune_triples(&analysis, &mut wps, store.dictionary())?)
        } else {
            None
        };
        let stps = if opts.unsafe_order {
            let mut order: Vec<usize> = (0..wps.len()).collect();
            order.sort_by_key(|&i| wps[i].tp.index);
            order
        } else {
            build_stps(&analysis, &wps)
        };
        let nulreqd = if opts.unsafe_order {
            opts.nullify
        } else if opts.skip_nullification {
            false
        } else {
            opts.force_nullify || !prune || analysis.report.nb_required || !filters.is_empty()
        };
        let cfg = JoinConfig { nulreqd, pattern_level_nulls: opts.unsafe_order };
        let vars = tree.vars_in_order();
        let out = multi_way_join(&analysis, &wps, &stps, &filters, store.dictionary(), &vars, cfg);
        any_nullified |= out.stats.rows_nullified > 0;
        let dict = store.dictionary();
        let mut sub = ResultSet::new(vars);
        sub.rows = out
            .rows
            .iter()
            .map(|r| r.iter().map(|k| k.and_then(|k| dict.node_term(k).cloned())).collect())
            .collect();
        if opts.force_nullify {
            sub = best_match(&sub);
        }
        union_all.extend_from(&sub);
        subqueries.push(SubqueryRun {
            tree: tree.clone(),
            counts: wps.iter().map(WorkingPattern::count).collect(),
            analysis,
            filters,
            load_steps,
            prune: report,
            stps,
            nulreqd,
            stats: out.stats,
        });
    }
    let best_match_applied = !opts.unsafe_order && !opts.skip_nullification && (unf.rule3_used || any_nullified);
    let combined = if best_match_applied { best_match(&union_all) } else { union_all };
    let result = combined.project(&q.projection);
    Ok(QueryRun { result, normalized, unf, components, subqueries, best_match_applied })
}
