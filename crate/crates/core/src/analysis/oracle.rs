use std::collections::BTreeSet;

use super::{compute_locals, LocalProps};
use crate::ir::{BlockId, Expr, Program};

/// Useful blocks found by enumerating simple paths, independent of the
/// fixpoint machinery. Intended as a test oracle for
/// [`compute_region`](super::compute_region).
///
/// A block is kept when
/// - some path leaves an evaluation of `e` and reaches it through valid,
///   non-entry blocks only, and
/// - some path of valid blocks leads from it to an evaluation of `e` (the
///   block itself counts).
///
/// Paths longer than `maxlen` edges are not explored; `maxlen` of at least
/// the block count makes the search exhaustive.
pub fn useful_oracle(p: &Program, e: &Expr, maxlen: usize) -> BTreeSet<BlockId> {
    let l = compute_locals(p, e);
    useful_blocks(&l, maxlen)
        .into_iter()
        .map(|i| l.ids[i].clone())
        .collect()
}

pub(crate) fn useful_blocks(l: &LocalProps, maxlen: usize) -> BTreeSet<usize> {
    let n = l.len();
    let passable = |i: usize| l.valid[i] && i != l.entry;

    let mut after_eval = vec![false; n];
    for k in (0..n).filter(|&k| l.expr[k]) {
        let mut on_path = vec![false; n];
        for &s in &l.succs[k] {
            forward_paths(l, s, 1, maxlen, &passable, &mut on_path, &mut after_eval);
        }
    }

    (0..n)
        .filter(|&i| after_eval[i])
        .filter(|&i| {
            let mut on_path = vec![false; n];
            reaches_eval(l, i, 0, maxlen, &mut on_path)
        })
        .collect()
}

fn forward_paths(
    l: &LocalProps,
    i: usize,
    len: usize,
    maxlen: usize,
    passable: &dyn Fn(usize) -> bool,
    on_path: &mut [bool],
    seen: &mut [bool],
) {
    if len > maxlen || on_path[i] || !passable(i) {
        return;
    }
    seen[i] = true;
    on_path[i] = true;
    for &j in &l.succs[i] {
        forward_paths(l, j, len + 1, maxlen, passable, on_path, seen);
    }
    on_path[i] = false;
}

fn reaches_eval(l: &LocalProps, i: usize, len: usize, maxlen: usize, on_path: &mut [bool]) -> bool {
    if len > maxlen || on_path[i] || !l.valid[i] {
        return false;
    }
    if l.expr[i] {
        return true;
    }
    on_path[i] = true;
    let found = l.succs[i]
        .iter()
        .any(|&j| reaches_eval(l, j, len + 1, maxlen, on_path));
    on_path[i] = false;
    found
}
