//! The CECD transformation.
//!
//! 1. [`duplicate`]: every region block `b` becomes `b.t`, `b.f` and `b.u`.
//!    Edges inside the region are replicated per copy kind, edges leaving the
//!    region leave from all three copies, and edges entering the region from
//!    outside go to the unknown copy.
//! 2. [`rewire`]: every branch on the condition whose true (false) slot points
//!    at a copy of a region block is redirected to the true (false) copy.
//! 3. [`eliminate`]: in true (false) copies, branches on the condition become
//!    jumps to their true (false) target.
//!
//! [`cleanup`] then removes what became unreachable and elides empty
//! forwarding blocks.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::ir::{BasicBlock, BlockId, CopyKind, Expr, Program, Terminator};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("region member `{0}` is not a block of the program")]
    UnknownBlock(BlockId),
    #[error("region is not valid: a member writes an operand of the condition")]
    InvalidRegion,
    #[error("region contains the entry block `{0}`")]
    EntryInRegion(BlockId),
    #[error("copy id `{0}` already exists in the program")]
    IdCollision(BlockId),
}

/// A region of duplication for one condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub members: BTreeSet<BlockId>,
    pub cond: Expr,
}

impl Region {
    pub fn new(members: impl IntoIterator<Item = BlockId>, cond: Expr) -> Self {
        Region {
            members: members.into_iter().collect(),
            cond,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: &BlockId) -> bool {
        self.members.contains(id)
    }

    /// The region block `id` is a copy of, if any.
    fn member_of_copy(&self, id: &BlockId) -> Option<BlockId> {
        id.origin()
            .map(|(base, _)| base)
            .filter(|base| self.members.contains(base))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TransformReport {
    pub copies_created: usize,
    pub edges_rewired: usize,
    /// Region blocks whose branch on the condition was removed from their
    /// true and false copies.
    pub conditionals_eliminated: usize,
    pub blocks_removed_by_cleanup: usize,
}

impl TransformReport {
    pub fn merge(self, o: TransformReport) -> TransformReport {
        TransformReport {
            copies_created: self.copies_created + o.copies_created,
            edges_rewired: self.edges_rewired + o.edges_rewired,
            conditionals_eliminated: self.conditionals_eliminated + o.conditionals_eliminated,
            blocks_removed_by_cleanup: self.blocks_removed_by_cleanup + o.blocks_removed_by_cleanup,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Options {
    /// Keep the (now unreachable) original region blocks after duplication.
    pub keep_originals: bool,
}

/// Whether no member of `r` writes an operand of `r.cond`.
pub fn check_valid(p: &Program, r: &Region) -> Result<bool, TransformError> {
    let operands = r.cond.operands();
    let mut valid = true;
    for m in &r.members {
        let b = p
            .block(m)
            .ok_or_else(|| TransformError::UnknownBlock(m.clone()))?;
        valid &= !operands.iter().any(|v| b.assigns(v));
    }
    Ok(valid)
}

fn rebuild(p: &Program, blocks: Vec<BasicBlock>) -> Program {
    Program::new(blocks, p.entry().clone()).expect("transformation keeps the program well formed")
}

/// Step 1: triplicate every region block.
pub fn duplicate(p: &Program, r: &Region) -> Result<(Program, TransformReport), TransformError> {
    duplicate_with(p, r, Options::default())
}

pub fn duplicate_with(
    p: &Program,
    r: &Region,
    opts: Options,
) -> Result<(Program, TransformReport), TransformError> {
    if r.contains(p.entry()) {
        return Err(TransformError::EntryInRegion(p.entry().clone()));
    }
    for m in &r.members {
        if !p.contains(m) {
            return Err(TransformError::UnknownBlock(m.clone()));
        }
        for k in CopyKind::ALL {
            let c = m.copy(k);
            if p.contains(&c) {
                return Err(TransformError::IdCollision(c));
            }
        }
    }

    let retarget = |term: &Terminator, kind: CopyKind| {
        let mut term = term.clone();
        for t in term.successors_mut() {
            if r.contains(t) {
                *t = t.copy(kind);
            }
        }
        term
    };

    let mut blocks = Vec::with_capacity(p.len() + 2 * r.members.len());
    let mut copies = 0;
    for b in p.blocks() {
        if !r.contains(&b.id) {
            // Edges from outside into the region enter the unknown copy.
            blocks.push(BasicBlock {
                term: retarget(&b.term, CopyKind::UnknownCopy),
                ..b.clone()
            });
            continue;
        }
        if opts.keep_originals {
            blocks.push(b.clone());
        }
        for kind in CopyKind::ALL {
            blocks.push(BasicBlock {
                id: b.id.copy(kind),
                instrs: b.instrs.clone(),
                term: retarget(&b.term, kind),
            });
            copies += 1;
        }
    }
    Ok((
        rebuild(p, blocks),
        TransformReport {
            copies_created: copies,
            ..Default::default()
        },
    ))
}

/// Step 2: send known outcomes of the condition into the matching copy.
pub fn rewire(p: &Program, r: &Region) -> (Program, TransformReport) {
    let mut rewired = 0;
    let blocks = p
        .blocks()
        .iter()
        .map(|b| {
            let mut b = b.clone();
            if let Terminator::Branch {
                cond,
                on_true,
                on_false,
            } = &mut b.term
            {
                if *cond == r.cond {
                    for (slot, kind) in [
                        (on_true, CopyKind::TrueCopy),
                        (on_false, CopyKind::FalseCopy),
                    ] {
                        if let Some(base) = r.member_of_copy(slot) {
                            let to = base.copy(kind);
                            if *slot != to {
                                *slot = to;
                                rewired += 1;
                            }
                        }
                    }
                }
            }
            b
        })
        .collect();
    (
        rebuild(p, blocks),
        TransformReport {
            edges_rewired: rewired,
            ..Default::default()
        },
    )
}

/// Step 3: drop the now-redundant branches in true and false copies.
pub fn eliminate(p: &Program, r: &Region) -> (Program, TransformReport) {
    let mut sites = BTreeSet::new();
    let blocks = p
        .blocks()
        .iter()
        .map(|b| {
            let mut b = b.clone();
            let Some((base, kind)) = b.origin() else {
                return b;
            };
            if !r.contains(&base) {
                return b;
            }
            if let Terminator::Branch {
                cond,
                on_true,
                on_false,
            } = &b.term
            {
                if *cond == r.cond {
                    let target = match kind {
                        CopyKind::TrueCopy => on_true.clone(),
                        CopyKind::FalseCopy => on_false.clone(),
                        CopyKind::UnknownCopy => return b,
                    };
                    b.term = Terminator::Goto(target);
                    sites.insert(base);
                }
            }
            b
        })
        .collect();
    (
        rebuild(p, blocks),
        TransformReport {
            conditionals_eliminated: sites.len(),
            ..Default::default()
        },
    )
}

/// Drops blocks not reachable from the entry. Returns the number removed.
pub fn remove_unreachable(p: &Program) -> (Program, usize) {
    let succs = p.successor_indices();
    let mut seen = vec![false; p.len()];
    let mut stack = vec![p.entry_index()];
    seen[p.entry_index()] = true;
    while let Some(i) = stack.pop() {
        for &j in &succs[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    let removed = seen.iter().filter(|s| !**s).count();
    let blocks = p
        .blocks()
        .iter()
        .zip(&seen)
        .filter(|(_, s)| **s)
        .map(|(b, _)| b.clone())
        .collect();
    (rebuild(p, blocks), removed)
}

/// Removes empty blocks that only jump elsewhere, retargeting their
/// predecessors. The entry is never removed; chains that end in a cycle of
/// empty blocks are left alone. Returns the number removed.
pub fn elide_forwarding(p: &Program) -> (Program, usize) {
    let forward: HashMap<&BlockId, &BlockId> = p
        .blocks()
        .iter()
        .filter(|b| b.is_forwarding() && b.id != *p.entry())
        .filter_map(|b| match &b.term {
            Terminator::Goto(t) => Some((&b.id, t)),
            _ => None,
        })
        .collect();

    let resolve = |start: &BlockId| -> Option<BlockId> {
        let mut cur = start;
        let mut steps = 0;
        while let Some(next) = forward.get(cur) {
            cur = next;
            steps += 1;
            if steps > forward.len() {
                return None;
            }
        }
        Some(cur.clone())
    };
    let resolved: HashMap<&BlockId, BlockId> = forward
        .keys()
        .filter_map(|b| resolve(b).map(|t| (*b, t)))
        .collect();

    let mut removed = 0;
    let mut blocks = Vec::with_capacity(p.len());
    for b in p.blocks() {
        if resolved.contains_key(&b.id) {
            removed += 1;
            continue;
        }
        let mut b = b.clone();
        for t in b.term.successors_mut() {
            if let Some(to) = resolved.get(t) {
                *t = to.clone();
            }
        }
        blocks.push(b);
    }
    (rebuild(p, blocks), removed)
}

/// Unreachable-block removal followed by forwarding-block elision.
pub fn cleanup(p: &Program) -> (Program, TransformReport) {
    let (p, a) = remove_unreachable(p);
    let (p, b) = elide_forwarding(&p);
    (
        p,
        TransformReport {
            blocks_removed_by_cleanup: a + b,
            ..Default::default()
        },
    )
}

/// All three steps plus cleanup.
pub fn apply_cecd(p: &Program, r: &Region) -> Result<(Program, TransformReport), TransformError> {
    apply_cecd_with(p, r, Options::default())
}

pub fn apply_cecd_with(
    p: &Program,
    r: &Region,
    opts: Options,
) -> Result<(Program, TransformReport), TransformError> {
    let (p, report) = transform_without_cleanup(p, r, opts)?;
    let (p, c) = cleanup(&p);
    Ok((p, report.merge(c)))
}

/// Steps 1 to 3 only; the result still contains unreachable copies.
pub fn transform_without_cleanup(
    p: &Program,
    r: &Region,
    opts: Options,
) -> Result<(Program, TransformReport), TransformError> {
    if !check_valid(p, r)? {
        return Err(TransformError::InvalidRegion);
    }
    let (p, a) = duplicate_with(p, r, opts)?;
    let (p, b) = rewire(&p, r);
    let (p, c) = eliminate(&p, r);
    Ok((p, a.merge(b).merge(c)))
}
