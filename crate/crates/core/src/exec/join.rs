//! Pattern ordering and the pipelined multi-way join.

use std::collections::HashMap;

use crate::analysis::{Analysis, Gosn, ScopedFilter};
use crate::store::Dictionary;
use crate::term::Variable;
use crate::working::WorkingPattern;

/// Patterns of the absolute master by ascending count, then each slave
/// supernode (masters first), entered through its cover pattern and
/// otherwise by ascending count.
pub fn tporder(analysis: &Analysis, wps: &[WorkingPattern]) -> Vec<usize> {
    let gosn = &analysis.gosn;
    let mut out = Vec::with_capacity(wps.len());
    for sn in gosn.masters_first() {
        let mut members = gosn.supernodes[sn].patterns.clone();
        let cover = analysis.covers.get(sn).copied().flatten();
        members.sort_by_key(|&i| (Some(i) != cover, wps[i].count(), i));
        out.extend(members);
    }
    out
}

/// Reorders `tporder` so that every prefix is connected in the GoT. A
/// pattern is taken only once its masters are placed, and a slave
/// supernode is entered only through its cover pattern when it has one.
pub fn build_stps(analysis: &Analysis, wps: &[WorkingPattern]) -> Vec<usize> {
    let order = tporder(analysis, wps);
    let gosn = &analysis.gosn;
    let n = order.len();
    let mut placed = vec![false; gosn.patterns.len()];
    let mut sn_entered = vec![false; gosn.supernodes.len()];
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let eligible = |i: usize, strict: bool| {
            let sn = gosn.sn_of[i];
            let masters_done = (0..gosn.patterns.len()).all(|j| placed[j] || !gosn.is_master(j, i));
            let entry_ok = sn_entered[sn] || analysis.covers[sn].is_none_or(|c| c == i);
            let connected = out.is_empty()
                || analysis.got.edges.iter().any(|e| e.touches(i) && placed[e.other(i)]);
            masters_done && (entry_ok || !strict) && (connected || !strict)
        };
        let next = order
            .iter()
            .copied()
            .find(|&i| !placed[i] && eligible(i, true))
            .or_else(|| order.iter().copied().find(|&i| !placed[i] && eligible(i, false)))
            .expect("a pattern remains");
        placed[next] = true;
        sn_entered[gosn.sn_of[next]] = true;
        out.push(next);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JoinConfig {
    /// Run nullification and the scoped filters on every row.
    pub nulreqd: bool,
    /// Null-extend a failing slave pattern on its own instead of skipping
    /// the rest of its supernode.
    pub pattern_level_nulls: bool,
}

/// Instrumentation of one join run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct JoinStats {
    /// Cells in the single binding map.
    pub vmap_cells: usize,
    pub max_depth: usize,
    pub rows_emitted: usize,
    /// Rows whose bindings nullification changed.
    pub rows_nullified: usize,
    /// Rows dropped by a filter scoped to the whole row.
    pub rows_filtered: usize,
}

/// Output of [`multi_way_join`]: rows of node keys over `vars`.
#[derive(Debug, Clone, Default)]
pub struct JoinOutput {
    pub vars: Vec<Variable>,
    pub rows: Vec<Vec<Option<u32>>>,
    pub stats: JoinStats,
}

struct Ctx<'a> {
    gosn: &'a Gosn,
    wps: &'a [WorkingPattern],
    stps: &'a [usize],
    dict: &'a Dictionary,
    cfg: JoinConfig,
    slot: HashMap<Variable, usize>,
    /// Variable slots of every pattern.
    pattern_slots: Vec<Vec<usize>>,
    /// Scoped filters, deepest scope first, root scope last.
    filters: Vec<(Option<usize>, &'a ScopedFilter)>,
    vmap: Vec<Option<u32>>,
    matched: Vec<bool>,
    sn_failed: Vec<bool>,
    out: JoinOutput,
}

/// Depth-first join over `stps`. One binding map is shared by the whole
/// recursion; a NULL in it never constrains a later pattern.
pub fn multi_way_join(
    analysis: &Analysis,
    wps: &[WorkingPattern],
    stps: &[usize],
    filters: &[ScopedFilter],
    dict: &Dictionary,
    vars: &[Variable],
    cfg: JoinConfig,
) -> JoinOutput {
    let gosn = &analysis.gosn;
    let slot: HashMap<Variable, usize> = vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let pattern_slots = wps.iter().map(|wp| wp.tp.vars().into_iter().map(|v| slot[v]).collect()).collect();
    let mut ordered: Vec<(Option<usize>, &ScopedFilter)> = filters.iter().map(|f| (f.scope, f)).collect();
    ordered.sort_by_key(|(scope, _)| std::cmp::Reverse(scope.map(|s| gosn.depth(s) + 1).unwrap_or(0)));
    let mut ctx = Ctx {
        gosn,
        wps,
        stps,
        dict,
        cfg,
        slot,
        pattern_slots,
        filters: ordered,
        vmap: vec![None; vars.len()],
        matched: vec![false; wps.len()],
        sn_failed: vec![false; gosn.supernodes.len()],
        out: JoinOutput { vars: vars.to_vec(), rows: Vec::new(), stats: JoinStats { vmap_cells: vars.len(), ..Default::default() } },
    };
    ctx.recurse(0);
    ctx.out
}

impl Ctx<'_> {
    fn skipped(&self, sn: usize) -> bool {
        let mut cur = Some(sn);
        while let Some(s) = cur {
            if self.sn_failed[s] {
                return true;
            }
            cur = self.gosn.supernodes[s].parent;
        }
        false
    }

    fn recurse(&mut self, depth: usize) {
        self.out.stats.max_depth = self.out.stats.max_depth.max(depth);
        if depth == self.stps.len() {
            self.emit();
            return;
        }
        let i = self.stps[depth];
        let sn = self.gosn.sn_of[i];
        if !self.cfg.pattern_level_nulls && self.skipped(sn) {
            self.matched[i] = false;
            self.recurse(depth + 1);
            return;
        }
        let wp = &self.wps[i];
        let candidates = {
            let slot = &self.slot;
            let vmap = &self.vmap;
            wp.matches(self.dict, |v| vmap[slot[v]])
        };
        if candidates.is_empty() {
            if sn == Gosn::ABS {
                return;
            }
            self.matched[i] = false;
            if self.cfg.pattern_level_nulls {
                self.recurse(depth + 1);
            } else {
                self.sn_failed[sn] = true;
                self.recurse(depth + 1);
                self.sn_failed[sn] = false;
            }
            return;
        }
        let row_slot = wp.row_var.as_ref().map(|v| self.slot[v]);
        let col_slot = wp.col_var.as_ref().map(|v| self.slot[v]);
        for (rk, ck) in candidates {
            let mut assigned: [Option<usize>; 2] = [None, None];
            for (k, (s, key)) in [(row_slot, rk), (col_slot, ck)].into_iter().enumerate() {
                if let (Some(s), Some(key)) = (s, key) {
                    if self.vmap[s].is_none() {
                        self.vmap[s] = Some(key);
                        assigned[k] = Some(s);
                    }
                }
            }
            self.matched[i] = true;
            self.recurse(depth + 1);
            for s in assigned.into_iter().flatten() {
                self.vmap[s] = None;
            }
        }
        self.matched[i] = false;
    }

    fn emit(&mut self) {
        if !self.cfg.nulreqd {
            self.out.rows.push(self.vmap.clone());
            self.out.stats.rows_emitted += 1;
            return;
        }
        let gosn = self.gosn;
        let mut ok = vec![false; gosn.supernodes.len()];
        for sn in gosn.masters_first() {
            let parent_ok = gosn.supernodes[sn].parent.is_none_or(|p| ok[p]);
            ok[sn] = parent_ok && gosn.supernodes[sn].patterns.iter().all(|&p| self.matched[p]);
        }
        let mut eff = self.effective(&ok);
        for k in 0..self.filters.len() {
            let (scope, f) = self.filters[k];
            if scope.is_some_and(|s| !ok[s]) {
                continue;
            }
            let truth = f.expr.eval(&|v: &Variable| {
                self.slot.get(v).and_then(|&s| eff[s]).and_then(|key| self.dict.node_term(key))
            });
            if truth.is_true() {
                continue;
            }
            match scope {
                None => {
                    self.out.stats.rows_filtered += 1;
                    return;
                }
                Some(s) => {
                    for p in gosn.subtree_patterns(s) {
                        ok[gosn.sn_of[p]] = false;
                    }
                    eff = self.effective(&ok);
                }
            }
        }
        if eff != self.vmap {
            self.out.stats.rows_nullified += 1;
        }
        self.out.rows.push(eff);
        self.out.stats.rows_emitted += 1;
    }

    /// Bindings that survive when only patterns of `ok` supernodes count.
    fn effective(&self, ok: &[bool]) -> Vec<Option<u32>> {
        let mut keep = vec![false; self.vmap.len()];
        for (p, slots) in self.pattern_slots.iter().enumerate() {
            if self.matched[p] && ok[self.gosn.sn_of[p]] {
                for &s in slots {
                    keep[s] = true;
                }
            }
        }
        self.vmap.iter().zip(keep).map(|(v, k)| if k { *v } else { None }).collect()
    }
}
