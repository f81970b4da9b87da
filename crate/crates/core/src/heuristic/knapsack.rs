//! Profile-driven region selection and its reduction from 0-1 knapsack.
//!
//! Picking the sub-region that maximizes eliminated branch executions under
//! the growth budget can encode any knapsack instance: an entry branching on
//! `e` into a binary tree of unrelated branches, one leaf per item holding
//! `w_i` instructions and carrying profile frequency `v_i`, and a final branch
//! on `e` below all leaves. With `k = W`, a region covering the leaves `X`
//! grows by `sum_{i in X} w_i` and eliminates `sum_{i in X} v_i` executions.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Deserialize;

use super::{estimate, EvalParams, HeuristicError};
use crate::analysis::{self, CopyEquations, Strategy};
use crate::ir::{BasicBlock, BinOp, BlockId, Expr, Instruction, Program, Terminator};
use crate::transform::Region;

/// Largest item count or candidate-block count searched exhaustively.
pub const MAX_BRUTE_FORCE: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackInstance {
    /// `(weight, value)` pairs, both at least 1.
    pub items: Vec<(u64, u64)>,
    pub budget: u64,
}

impl KnapsackInstance {
    pub fn new(items: Vec<(u64, u64)>, budget: u64) -> Result<Self, HeuristicError> {
        if let Some((w, v)) = items.iter().find(|(w, v)| *w == 0 || *v == 0) {
            return Err(HeuristicError::BadInstance(format!(
                "item {w}:{v} must have positive weight and value"
            )));
        }
        Ok(KnapsackInstance { items, budget })
    }

    /// Parses the `w:v,w:v,...` item list.
    pub fn parse(items: &str, budget: u64) -> Result<Self, HeuristicError> {
        let bad = |s: &str| HeuristicError::BadInstance(format!("cannot parse item `{s}`"));
        let items = items
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                let (w, v) = s.split_once(':').ok_or_else(|| bad(s))?;
                Ok((
                    w.trim().parse().map_err(|_| bad(s))?,
                    v.trim().parse().map_err(|_| bad(s))?,
                ))
            })
            .collect::<Result<Vec<_>, HeuristicError>>()?;
        KnapsackInstance::new(items, budget)
    }
}

/// Execution frequency of paths through each block.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(transparent)]
pub struct ProfileData {
    pub freq: BTreeMap<String, u64>,
}

impl ProfileData {
    pub fn get(&self, id: &BlockId) -> u64 {
        self.freq.get(id.as_str()).copied().unwrap_or(0)
    }
}

/// Exact optimum by subset enumeration. The selection holds 1-based item
/// numbers.
pub fn knapsack_brute_force(
    inst: &KnapsackInstance,
) -> Result<(u64, BTreeSet<usize>), HeuristicError> {
    let n = inst.items.len();
    if n > MAX_BRUTE_FORCE {
        return Err(HeuristicError::TooLarge {
            count: n,
            limit: MAX_BRUTE_FORCE,
        });
    }
    let mut best = (0u64, 0u32);
    for mask in 0u32..(1 << n) {
        let (mut w, mut v) = (0u64, 0u64);
        for (i, (wi, vi)) in inst.items.iter().enumerate() {
            if mask & (1 << i) != 0 {
                w += wi;
                v += vi;
            }
        }
        if w <= inst.budget && v > best.0 {
            best = (v, mask);
        }
    }
    let selection = (0..n)
        .filter(|i| best.1 & (1 << i) != 0)
        .map(|i| i + 1)
        .collect();
    Ok((best.0, selection))
}

fn gt_zero(var: &str) -> Expr {
    Expr::binary(BinOp::Gt, Expr::var(var), Expr::lit(0))
}

/// Builds the control-flow graph, profile and condition encoding `inst`.
///
/// Blocks: `bb_s` (entry, reads the inputs and branches on `e` twice into the
/// tree root), inner tree nodes `bb_n<k>` branching on `c<k> > 0`, leaves
/// `bb_l<i>` with `w_i` filler assignments, `bb_e` branching on `e` twice into
/// `bb_x`, and the exit `bb_x`. With a single item the root is the leaf.
pub fn build_knapsack_cfg(
    inst: &KnapsackInstance,
) -> Result<(Program, ProfileData, Expr), HeuristicError> {
    let n = inst.items.len();
    if n == 0 {
        return Err(HeuristicError::BadInstance("no items".into()));
    }
    let e = gt_zero("x");
    let bb_e = BlockId::new("bb_e");

    let mut inner = Vec::new();
    let mut leaves = Vec::new();
    fn build(
        lo: usize,
        hi: usize,
        inner: &mut Vec<BasicBlock>,
        leaves: &mut Vec<BasicBlock>,
        inst: &KnapsackInstance,
        bb_e: &BlockId,
    ) -> BlockId {
        if hi - lo == 1 {
            let id = BlockId::new(format!("bb_l{}", lo + 1));
            let w = inst.items[lo].0;
            let instrs = (1..=w)
                .map(|j| Instruction::Assign {
                    target: format!("w{}_{j}", lo + 1),
                    value: Expr::lit(j),
                })
                .collect();
            leaves.push(BasicBlock::new(
                id.clone(),
                instrs,
                Terminator::Goto(bb_e.clone()),
            ));
            return id;
        }
        let k = inner.len() + 1;
        let id = BlockId::new(format!("bb_n{k}"));
        let slot = inner.len();
        inner.push(BasicBlock::new(id.clone(), vec![], Terminator::Exit));
        let mid = (lo + hi) / 2;
        let left = build(lo, mid, inner, leaves, inst, bb_e);
        let right = build(mid, hi, inner, leaves, inst, bb_e);
        inner[slot].term = Terminator::Branch {
            cond: gt_zero(&format!("c{k}")),
            on_true: left,
            on_false: right,
        };
        id
    }
    let root = build(0, n, &mut inner, &mut leaves, inst, &bb_e);

    let mut entry_instrs = vec![Instruction::Input { target: "x".into() }];
    entry_instrs.extend((1..=inner.len()).map(|k| Instruction::Input {
        target: format!("c{k}"),
    }));
    let mut blocks = vec![BasicBlock::new(
        "bb_s",
        entry_instrs,
        Terminator::Branch {
            cond: e.clone(),
            on_true: root.clone(),
            on_false: root,
        },
    )];
    blocks.extend(inner);
    blocks.extend(leaves);
    blocks.push(BasicBlock::new(
        bb_e,
        vec![],
        Terminator::Branch {
            cond: e.clone(),
            on_true: "bb_x".into(),
            on_false: "bb_x".into(),
        },
    ));
    blocks.push(BasicBlock::new("bb_x", vec![], Terminator::Exit));

    let profile = ProfileData {
        freq: inst
            .items
            .iter()
            .enumerate()
            .map(|(i, (_, v))| (format!("bb_l{}", i + 1), *v))
            .collect(),
    };
    let program = Program::from_blocks(blocks).expect("well-formed construction");
    Ok((program, profile, e))
}

/// Exhaustive profile-driven region selection.
///
/// Every subset of the largest valid useful region is shrunk to its own
/// largest useful sub-region and evaluated with the usual growth test. The
/// objective of an accepted region sums, over each region block whose branch
/// on `e` is removed in a predicted true or false copy, the profile
/// frequencies of the region blocks with a predicted true or false copy that
/// reach that branch inside the region. Returns the first maximizer found.
pub fn best_region_by_profile(
    p: &Program,
    e: &Expr,
    profile: &ProfileData,
    params: EvalParams,
) -> Result<(Region, u64), HeuristicError> {
    let base = analysis::compute_region(p, e);
    let l = &base.locals;
    let candidates: Vec<usize> = (0..l.len()).filter(|&i| base.d[i]).collect();
    if candidates.len() > MAX_BRUTE_FORCE {
        return Err(HeuristicError::TooLarge {
            count: candidates.len(),
            limit: MAX_BRUTE_FORCE,
        });
    }
    let sizes: Vec<usize> = p.blocks().iter().map(|b| b.instrs.len()).collect();
    let freq: Vec<u64> = l.ids.iter().map(|id| profile.get(id)).collect();

    let mut best: (Vec<bool>, u64) = (vec![false; l.len()], 0);
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut restricted = l.clone();
    for mask in 0u32..(1 << candidates.len()) {
        restricted.valid.copy_from_slice(&l.valid);
        for (bit, &i) in candidates.iter().enumerate() {
            restricted.valid[i] = mask & (1 << bit) != 0;
        }
        for i in (0..l.len()).filter(|i| !base.d[*i]) {
            restricted.valid[i] = false;
        }
        let (_, _, d) = analysis::solve_region(&restricted, Strategy::Worklist);
        if !d.iter().any(|x| *x) || !seen.insert(d.clone()) {
            continue;
        }
        let (rt, rf, ru) =
            analysis::solve_copies(l, &d, CopyEquations::Guarded, Strategy::Worklist);
        if !estimate(l, &d, [&rt, &rf, &ru], &sizes, params.k).accepted {
            continue;
        }
        let known = |i: usize| d[i] && (rt[i] || rf[i]);
        let objective: u64 = (0..l.len())
            .filter(|&s| known(s) && l.expr[s])
            .map(|s| {
                reaching_within(l, &d, s)
                    .into_iter()
                    .filter(|&b| known(b))
                    .map(|b| freq[b])
                    .sum::<u64>()
            })
            .sum();
        if objective > best.1 {
            best = (d, objective);
        }
    }
    let members = l
        .ids
        .iter()
        .zip(&best.0)
        .filter(|(_, m)| **m)
        .map(|(id, _)| id.clone());
    Ok((Region::new(members, e.clone()), best.1))
}

/// Region blocks from which `target` is reachable without leaving the region,
/// `target` included.
fn reaching_within(l: &analysis::LocalProps, d: &[bool], target: usize) -> Vec<usize> {
    let mut seen = vec![false; l.len()];
    let mut stack = vec![target];
    seen[target] = true;
    while let Some(i) = stack.pop() {
        for &j in &l.preds[i] {
            if d[j] && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    (0..l.len()).filter(|&i| seen[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::compute_region;
    use crate::ir::Terminator;

    fn inst(items: &[(u64, u64)], budget: u64) -> KnapsackInstance {
        KnapsackInstance::new(items.to_vec(), budget).unwrap()
    }

    #[test]
    fn brute_force_examples() {
        // Subsets of {(2,3),(3,4),(4,5)} within weight 5: {}, {1}, {2}, {3},
        // {1,2} -> values 0, 3, 4, 5, 7. {1,3}, {2,3}, {1,2,3} are too heavy.
        assert_eq!(
            knapsack_brute_force(&inst(&[(2, 3), (3, 4), (4, 5)], 5)).unwrap(),
            (7, [1, 2].into())
        );
        assert_eq!(
            knapsack_brute_force(&inst(&[(2, 3), (3, 4)], 0)).unwrap(),
            (0, BTreeSet::new())
        );
        assert_eq!(
            knapsack_brute_force(&inst(&[(1, 9)], 1)).unwrap(),
            (9, [1].into())
        );
        let big = inst(&[(1, 1); 21], 3);
        assert!(matches!(
            knapsack_brute_force(&big),
            Err(HeuristicError::TooLarge { count: 21, .. })
        ));
    }

    #[test]
    fn parse_items() {
        assert_eq!(
            KnapsackInstance::parse("2:3, 3:4,4:5", 5).unwrap(),
            inst(&[(2, 3), (3, 4), (4, 5)], 5)
        );
        assert!(KnapsackInstance::parse("2-3", 5).is_err());
        assert!(KnapsackInstance::parse("0:3", 5).is_err());
    }

    #[test]
    fn single_item_tree_is_a_leaf() {
        let (p, prof, _) = build_knapsack_cfg(&inst(&[(3, 5)], 4)).unwrap();
        let ids: Vec<&str> = p.blocks().iter().map(|b| b.id.as_str()).collect();
        assert_eq!(ids, ["bb_s", "bb_l1", "bb_e", "bb_x"]);
        assert_eq!(p.block(&"bb_l1".into()).unwrap().instrs.len(), 3);
        assert_eq!(prof.get(&"bb_l1".into()), 5);
    }

    #[test]
    fn three_items_give_two_inner_nodes() {
        let (p, prof, e) = build_knapsack_cfg(&inst(&[(2, 3), (3, 4), (4, 5)], 5)).unwrap();
        let inner: Vec<_> = p
            .blocks()
            .iter()
            .filter(|b| b.id.as_str().starts_with("bb_n"))
            .collect();
        assert_eq!(inner.len(), 2);
        for b in &inner {
            assert!(b.instrs.is_empty());
            assert!(!b.term.branches_on(&e));
        }
        let conds: BTreeSet<_> = inner
            .iter()
            .map(|b| b.term.branch_cond().unwrap().clone())
            .collect();
        assert_eq!(conds.len(), 2);
        for (i, w) in [2, 3, 4].into_iter().enumerate() {
            let id = BlockId::new(format!("bb_l{}", i + 1));
            assert_eq!(p.block(&id).unwrap().instrs.len(), w);
            assert_eq!(p.block(&id).unwrap().term, Terminator::Goto("bb_e".into()));
        }
        assert_eq!(prof.freq.values().copied().collect::<Vec<_>>(), [3, 4, 5]);
    }

    #[test]
    fn whole_tree_and_final_branch_form_the_region() {
        let (p, _, e) = build_knapsack_cfg(&inst(&[(2, 3), (3, 4), (4, 5)], 5)).unwrap();
        let d = compute_region(&p, &e).region();
        let want: BTreeSet<BlockId> = ["bb_n1", "bb_n2", "bb_l1", "bb_l2", "bb_l3", "bb_e"]
            .into_iter()
            .map(BlockId::new)
            .collect();
        assert_eq!(d, want);
    }

    #[test]
    fn profile_search_matches_the_knapsack_optimum() {
        let k = inst(&[(2, 3), (3, 4), (4, 5)], 5);
        let (p, prof, e) = build_knapsack_cfg(&k).unwrap();
        let (r, obj) = best_region_by_profile(&p, &e, &prof, EvalParams { k: 5 }).unwrap();
        assert_eq!(obj, 7);
        assert!(r.contains(&"bb_l1".into()));
        assert!(r.contains(&"bb_l2".into()));
        assert!(!r.contains(&"bb_l3".into()));
    }

    #[test]
    fn empty_profile_gives_zero() {
        let k = inst(&[(2, 3), (3, 4)], 5);
        let (p, _, e) = build_knapsack_cfg(&k).unwrap();
        let (_, obj) =
            best_region_by_profile(&p, &e, &ProfileData::default(), EvalParams { k: 5 }).unwrap();
        assert_eq!(obj, 0);
    }

    #[test]
    fn overweight_single_item_is_unaffordable() {
        let k = inst(&[(6, 9)], 5);
        let (p, prof, e) = build_knapsack_cfg(&k).unwrap();
        let (r, obj) = best_region_by_profile(&p, &e, &prof, EvalParams { k: 5 }).unwrap();
        assert_eq!(obj, 0);
        assert!(r.is_empty());
    }
}
