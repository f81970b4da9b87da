//! Region selection and evaluation.
//!
//! Selection takes the largest valid region of useful blocks. Evaluation
//! predicts the instruction growth of transforming it,
//!
//! ```text
//! growth = S(Rt) + S(Rf) + S(Ru) - S(D)
//! ```
//!
//! where `S` sums instruction counts (terminators excluded), and accepts when
//! `growth <= n * k` with `n` the number of region blocks that branch on the
//! condition.

mod knapsack;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{self, LocalProps};
use crate::ir::{BlockId, Expr, Program};
use crate::transform::{Region, TransformError};

pub use knapsack::{
    best_region_by_profile, build_knapsack_cfg, knapsack_brute_force, KnapsackInstance,
    ProfileData, MAX_BRUTE_FORCE,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeuristicError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("{count} candidates exceed the brute-force limit of {limit}")]
    TooLarge { count: usize, limit: usize },
    #[error("invalid knapsack instance: {0}")]
    BadInstance(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalParams {
    /// Instruction growth allowed per eliminated conditional.
    pub k: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    /// Instruction count of every block.
    pub sizes: BTreeMap<BlockId, usize>,
    pub n: usize,
    pub k: u64,
    pub growth: i64,
    pub accepted: bool,
    pub true_copies: BTreeSet<BlockId>,
    pub false_copies: BTreeSet<BlockId>,
    pub unknown_copies: BTreeSet<BlockId>,
}

impl CostReport {
    pub fn budget(&self) -> i64 {
        self.n as i64 * self.k as i64
    }
}

/// The largest valid region of useful blocks for `e`.
pub fn select_region(p: &Program, e: &Expr) -> Region {
    Region::new(analysis::compute_region(p, e).region(), e.clone())
}

pub fn evaluate_region(
    p: &Program,
    r: &Region,
    params: EvalParams,
) -> Result<CostReport, TransformError> {
    let res = analysis::compute_reachable_copies(p, &r.cond, &r.members)?;
    let sizes: Vec<usize> = p.blocks().iter().map(|b| b.instrs.len()).collect();
    let est = estimate(
        &res.locals,
        &res.d,
        [&res.rt, &res.rf, &res.ru],
        &sizes,
        params.k,
    );
    Ok(CostReport {
        sizes: res.locals.ids.iter().cloned().zip(sizes).collect(),
        n: est.n,
        k: params.k,
        growth: est.growth,
        accepted: est.accepted,
        true_copies: res.true_copies(),
        false_copies: res.false_copies(),
        unknown_copies: res.unknown_copies(),
    })
}

pub(crate) struct Estimate {
    pub n: usize,
    pub growth: i64,
    pub accepted: bool,
}

/// Growth and acceptance for region `d` with predicted copies
/// `[rt, rf, ru]`.
pub(crate) fn estimate(
    l: &LocalProps,
    d: &[bool],
    copies: [&[bool]; 3],
    sizes: &[usize],
    k: u64,
) -> Estimate {
    let sum = |m: &[bool]| -> i64 {
        m.iter()
            .zip(sizes)
            .filter(|(x, _)| **x)
            .map(|(_, s)| *s as i64)
            .sum()
    };
    let growth = copies.iter().map(|m| sum(m)).sum::<i64>() - sum(d);
    let n = (0..l.len()).filter(|&i| d[i] && l.expr[i]).count();
    Estimate {
        n,
        growth,
        accepted: growth <= n as i64 * k as i64,
    }
}
