//! Region analysis for one tracked condition `e`.
//!
//! Local properties per block:
//! - `Valid`: the block writes no operand of `e`.
//! - `Expr`: the block ends in a branch on `e`; its two out-edges are the
//!   `TrueEdge` and `FalseEdge` of that branch.
//!
//! Global properties, all any-path and solved from all-false:
//! - `Live_i  = Valid_i AND OR_{j in pred(i)} (Expr_j OR Live_j)`
//! - `Antic_i = Valid_i AND (Expr_i OR OR_{j in succ(i)} Antic_j)`
//! - `D_i     = Live_i AND Antic_i`, the largest valid region of useful nodes.
//!
//! Given a valid region `D`, which copies will be reachable after the
//! transformation:
//! - `Ru_i = D_i AND OR_{j in pred(i)} (NOT Expr_j AND (NOT D_j OR Ru_j))`
//! - `Rt_i = D_i AND OR_{j in pred(i)} ((NOT Expr_j AND Rt_j) OR TrueEdge_ji)`
//! - `Rf_i = D_i AND OR_{j in pred(i)} ((NOT Expr_j AND Rf_j) OR FalseEdge_ji)`
//!
//! The `NOT Expr_j` guard on the propagation terms of `Rt`/`Rf` reflects that
//! a true copy ending in a branch on `e` jumps only to its true successor.
//! [`CopyEquations::Unguarded`] drops it for comparison.
//!
//! The entry block is pinned to `Live = false`: execution starts there with
//! nothing known about `e`, and the transformation never duplicates it.

mod oracle;
pub mod solver;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::ir::{BlockId, Expr, Program};
use crate::transform::{check_valid, Region, TransformError};

pub use oracle::useful_oracle;
pub use solver::{solve_any_path, Direction, Solution, Strategy};

/// Local properties of every block with respect to one condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalProps {
    pub ids: Vec<BlockId>,
    pub entry: usize,
    pub valid: Vec<bool>,
    pub expr: Vec<bool>,
    /// Target of the true edge of a branch on `e`, per block.
    pub true_edge: Vec<Option<usize>>,
    /// Target of the false edge of a branch on `e`, per block.
    pub false_edge: Vec<Option<usize>>,
    pub succs: Vec<Vec<usize>>,
    pub preds: Vec<Vec<usize>>,
}

impl LocalProps {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn is_true_edge(&self, from: usize, to: usize) -> bool {
        self.true_edge[from] == Some(to)
    }

    pub fn is_false_edge(&self, from: usize, to: usize) -> bool {
        self.false_edge[from] == Some(to)
    }

    /// The same graph with block `k` cut out: all its edges are dropped and
    /// it can no longer be valid or evaluate `e`. Indices are unchanged.
    pub fn without_block(&self, k: usize) -> LocalProps {
        let mut out = self.clone();
        out.valid[k] = false;
        out.succs[k].clear();
        out.preds[k].clear();
        for list in out.succs.iter_mut().chain(out.preds.iter_mut()) {
            list.retain(|&j| j != k);
        }
        for slot in out.true_edge.iter_mut().chain(out.false_edge.iter_mut()) {
            if *slot == Some(k) {
                *slot = None;
            }
        }
        out.true_edge[k] = None;
        out.false_edge[k] = None;
        for i in 0..out.len() {
            out.expr[i] = out.true_edge[i].is_some() || out.false_edge[i].is_some();
        }
        out
    }

    fn mask(&self, ids: &BTreeSet<BlockId>) -> Vec<bool> {
        self.ids.iter().map(|id| ids.contains(id)).collect()
    }

    fn set_of(&self, mask: &[bool]) -> BTreeSet<BlockId> {
        self.ids
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(id, _)| id.clone())
            .collect()
    }
}

pub fn compute_locals(p: &Program, e: &Expr) -> LocalProps {
    let operands = e.operands();
    let succs = p.successor_indices();
    let mut preds = vec![Vec::new(); p.len()];
    for (i, ss) in succs.iter().enumerate() {
        for &j in ss {
            preds[j].push(i);
        }
    }
    let mut valid = Vec::with_capacity(p.len());
    let mut true_edge = Vec::with_capacity(p.len());
    let mut false_edge = Vec::with_capacity(p.len());
    for b in p.blocks() {
        valid.push(!operands.iter().any(|v| b.assigns(v)));
        match &b.term {
            crate::ir::Terminator::Branch {
                cond,
                on_true,
                on_false,
            } if cond == e => {
                true_edge.push(p.index_of(on_true));
                false_edge.push(p.index_of(on_false));
            }
            _ => {
                true_edge.push(None);
                false_edge.push(None);
            }
        }
    }
    let expr = true_edge
        .iter()
        .zip(&false_edge)
        .map(|(t, f)| t.is_some() || f.is_some())
        .collect();
    LocalProps {
        ids: p.blocks().iter().map(|b| b.id.clone()).collect(),
        entry: p.entry_index(),
        valid,
        expr,
        true_edge,
        false_edge,
        succs,
        preds,
    }
}

/// Which form of the true/false copy equations to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CopyEquations {
    /// Propagation from a predecessor's copy only when that predecessor does
    /// not branch on `e`. Matches what the transformation produces.
    #[default]
    Guarded,
    /// `Rt_i = D_i AND OR_j (Rt_j OR TrueEdge_ji)`, without the guard. Predicts
    /// copies that cannot be reached.
    Unguarded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisResult {
    pub cond: Expr,
    pub locals: LocalProps,
    pub live: Vec<bool>,
    pub antic: Vec<bool>,
    /// The region: `Live AND Antic` from [`compute_region`], or the region
    /// given to [`compute_reachable_copies`].
    pub d: Vec<bool>,
    pub rt: Vec<bool>,
    pub rf: Vec<bool>,
    pub ru: Vec<bool>,
}

/// One row of the per-block analysis table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisRow {
    pub block: BlockId,
    #[serde(rename = "Valid")]
    pub valid: bool,
    #[serde(rename = "Expr")]
    pub expr: bool,
    #[serde(rename = "Live")]
    pub live: bool,
    #[serde(rename = "Antic")]
    pub antic: bool,
    #[serde(rename = "D")]
    pub d: bool,
    #[serde(rename = "Rt")]
    pub rt: bool,
    #[serde(rename = "Rf")]
    pub rf: bool,
    #[serde(rename = "Ru")]
    pub ru: bool,
}

impl AnalysisResult {
    pub fn region(&self) -> BTreeSet<BlockId> {
        self.locals.set_of(&self.d)
    }

    pub fn true_copies(&self) -> BTreeSet<BlockId> {
        self.locals.set_of(&self.rt)
    }

    pub fn false_copies(&self) -> BTreeSet<BlockId> {
        self.locals.set_of(&self.rf)
    }

    pub fn unknown_copies(&self) -> BTreeSet<BlockId> {
        self.locals.set_of(&self.ru)
    }

    pub fn in_region(&self, id: &BlockId) -> bool {
        self.locals
            .ids
            .iter()
            .position(|b| b == id)
            .is_some_and(|i| self.d[i])
    }

    pub fn rows(&self) -> Vec<AnalysisRow> {
        let l = &self.locals;
        (0..l.len())
            .map(|i| AnalysisRow {
                block: l.ids[i].clone(),
                valid: l.valid[i],
                expr: l.expr[i],
                live: self.live[i],
                antic: self.antic[i],
                d: self.d[i],
                rt: self.rt[i],
                rf: self.rf[i],
                ru: self.ru[i],
            })
            .collect()
    }
}

/// `(Live, Antic, D)` over precomputed local properties.
pub fn solve_region(l: &LocalProps, strategy: Strategy) -> (Vec<bool>, Vec<bool>, Vec<bool>) {
    let live = solve_any_path(
        &l.succs,
        &l.preds,
        Direction::Forward,
        strategy,
        |i, live| i != l.entry && l.valid[i] && l.preds[i].iter().any(|&j| l.expr[j] || live[j]),
    )
    .values;
    let antic = solve_any_path(
        &l.succs,
        &l.preds,
        Direction::Backward,
        strategy,
        |i, antic| l.valid[i] && (l.expr[i] || l.succs[i].iter().any(|&j| antic[j])),
    )
    .values;
    let d = live.iter().zip(&antic).map(|(a, b)| *a && *b).collect();
    (live, antic, d)
}

/// `(Rt, Rf, Ru)` for the region `d` over precomputed local properties.
pub fn solve_copies(
    l: &LocalProps,
    d: &[bool],
    equations: CopyEquations,
    strategy: Strategy,
) -> (Vec<bool>, Vec<bool>, Vec<bool>) {
    let guard = |j: usize| match equations {
        CopyEquations::Guarded => !l.expr[j],
        CopyEquations::Unguarded => true,
    };
    let ru = solve_any_path(&l.succs, &l.preds, Direction::Forward, strategy, |i, ru| {
        d[i] && l.preds[i].iter().any(|&j| !l.expr[j] && (!d[j] || ru[j]))
    })
    .values;
    let rt = solve_any_path(&l.succs, &l.preds, Direction::Forward, strategy, |i, rt| {
        d[i] && l.preds[i]
            .iter()
            .any(|&j| (guard(j) && rt[j]) || l.is_true_edge(j, i))
    })
    .values;
    let rf = solve_any_path(&l.succs, &l.preds, Direction::Forward, strategy, |i, rf| {
        d[i] && l.preds[i]
            .iter()
            .any(|&j| (guard(j) && rf[j]) || l.is_false_edge(j, i))
    })
    .values;
    (rt, rf, ru)
}

/// Live, Antic and the largest valid region of useful blocks for `e`.
pub fn compute_region(p: &Program, e: &Expr) -> AnalysisResult {
    compute_region_with(p, e, Strategy::default())
}

pub fn compute_region_with(p: &Program, e: &Expr, strategy: Strategy) -> AnalysisResult {
    let locals = compute_locals(p, e);
    let (live, antic, d) = solve_region(&locals, strategy);
    let n = locals.len();
    AnalysisResult {
        cond: e.clone(),
        locals,
        live,
        antic,
        d,
        rt: vec![false; n],
        rf: vec![false; n],
        ru: vec![false; n],
    }
}

/// Predicted reachable true/false/unknown copies for a valid region.
pub fn compute_reachable_copies(
    p: &Program,
    e: &Expr,
    region: &BTreeSet<BlockId>,
) -> Result<AnalysisResult, TransformError> {
    compute_reachable_copies_with(p, e, region, CopyEquations::default(), Strategy::default())
}

pub fn compute_reachable_copies_with(
    p: &Program,
    e: &Expr,
    region: &BTreeSet<BlockId>,
    equations: CopyEquations,
    strategy: Strategy,
) -> Result<AnalysisResult, TransformError> {
    let r = Region::new(region.iter().cloned(), e.clone());
    if !check_valid(p, &r)? {
        return Err(TransformError::InvalidRegion);
    }
    let mut res = compute_region_with(p, e, strategy);
    res.d = res.locals.mask(region);
    let (rt, rf, ru) = solve_copies(&res.locals, &res.d, equations, strategy);
    res.rt = rt;
    res.rf = rf;
    res.ru = ru;
    Ok(res)
}

/// Region analysis followed by copy prediction on the computed region.
pub fn analyze(p: &Program, e: &Expr) -> AnalysisResult {
    let mut res = compute_region(p, e);
    let (rt, rf, ru) = solve_copies(
        &res.locals,
        &res.d,
        CopyEquations::default(),
        Strategy::default(),
    );
    res.rt = rt;
    res.rf = rf;
    res.ru = ru;
    res
}
