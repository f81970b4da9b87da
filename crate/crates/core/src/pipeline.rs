//! End-to-end optimizer: select, evaluate and transform every candidate
//! condition in turn, optionally checking each step with the interpreter.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::heuristic::{evaluate_region, select_region, EvalParams};
use crate::interp::{self, Env};
use crate::ir::{expr_eq, Expr, Program};
use crate::transform::{self, Options, TransformError};

/// Step budget for each verification run.
pub const VERIFY_FUEL: u64 = 10_000;
/// Random values are drawn from `-VERIFY_RANGE..=VERIFY_RANGE`.
pub const VERIFY_RANGE: i64 = 8;
/// Inputs supplied beyond the number of input instructions.
pub const EXTRA_INPUTS: usize = 4;

#[derive(Debug, Clone, Default)]
pub struct OptOptions {
    pub k: u64,
    /// Restrict the optimizer to this condition.
    pub cond: Option<Expr>,
    /// Number of random runs used to check each applied transformation.
    pub verify: Option<usize>,
    pub seed: u64,
    /// Keep the dead original blocks and skip cleanup.
    pub keep_originals: bool,
}

/// One evaluated candidate condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PipelineStats {
    pub cond: String,
    pub blocks_before: usize,
    pub blocks_after: usize,
    pub instrs_before: usize,
    pub instrs_after: usize,
    pub n: usize,
    pub k: u64,
    pub predicted_growth: i64,
    pub actual_growth: i64,
    pub accepted: bool,
    /// Every verification run agreed. False when verification was not
    /// requested or the candidate was rejected.
    pub verified: bool,
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub program: Program,
    /// One entry per candidate with a non-empty region.
    pub stats: Vec<PipelineStats>,
    pub verification_failed: bool,
}

/// Candidate conditions by descending branch-site count; ties keep the
/// order of first occurrence.
pub fn candidates(p: &Program) -> Vec<Expr> {
    let mut c = p.branch_conditions();
    c.sort_by_key(|(_, n)| std::cmp::Reverse(*n));
    c.into_iter().map(|(e, _)| e).collect()
}

pub fn optimize(p: &Program, opts: &OptOptions) -> Result<OptResult, TransformError> {
    let conds: Vec<Expr> = match &opts.cond {
        Some(c) => candidates(p)
            .into_iter()
            .filter(|e| expr_eq(e, c))
            .collect(),
        None => candidates(p),
    };
    let mut rng = StdRng::seed_from_u64(opts.seed);
    let mut program = p.clone();
    let mut stats = Vec::new();
    let mut verification_failed = false;

    for e in conds {
        let region = select_region(&program, &e);
        if region.is_empty() {
            continue;
        }
        let cost = evaluate_region(&program, &region, EvalParams { k: opts.k })?;
        let mut s = PipelineStats {
            cond: e.to_string(),
            blocks_before: program.len(),
            blocks_after: program.len(),
            instrs_before: program.instruction_count(),
            instrs_after: program.instruction_count(),
            n: cost.n,
            k: opts.k,
            predicted_growth: cost.growth,
            actual_growth: 0,
            accepted: cost.accepted,
            verified: false,
        };
        if cost.accepted {
            let next = if opts.keep_originals {
                transform::transform_without_cleanup(
                    &program,
                    &region,
                    Options {
                        keep_originals: true,
                    },
                )?
                .0
            } else {
                transform::apply_cecd(&program, &region)?.0
            };
            s.blocks_after = next.len();
            s.instrs_after = next.instruction_count();
            s.actual_growth = s.instrs_after as i64 - s.instrs_before as i64;
            if let Some(runs) = opts.verify {
                s.verified = verify(&program, &next, runs, &mut rng);
                verification_failed |= !s.verified;
            }
            program = next;
        }
        stats.push(s);
    }
    Ok(OptResult {
        program,
        stats,
        verification_failed,
    })
}

/// Random initial bindings for every variable of `p` and an input vector
/// slightly longer than its number of input instructions.
pub fn random_run(p: &Program, rng: &mut impl Rng) -> (Env, Vec<i64>) {
    let env = p
        .variables()
        .into_iter()
        .map(|v| (v, rng.gen_range(-VERIFY_RANGE..=VERIFY_RANGE)))
        .collect();
    let inputs = (0..p.input_count() + EXTRA_INPUTS)
        .map(|_| rng.gen_range(-VERIFY_RANGE..=VERIFY_RANGE))
        .collect();
    (env, inputs)
}

/// Whether `before` and `after` agree on `runs` random runs.
pub fn verify(before: &Program, after: &Program, runs: usize, rng: &mut impl Rng) -> bool {
    (0..runs).all(|_| {
        let (env, inputs) = random_run(before, rng);
        interp::equivalent_with_env(before, after, &env, &inputs, VERIFY_FUEL)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_expr, parse_program};

    const TWO_TESTS: &str = "block s { x = input; br x < 3 a b; }
         block a { print 1; goto b; }
         block b { br x < 3 c d; }
         block c { print 2; exit; }
         block d { print 3; exit; }";

    #[test]
    fn candidates_by_site_count() {
        let p = parse_program(
            "block s { x = input; br x > 0 a b; }
             block a { br x < 3 b b; }
             block b { br x < 3 c c; }
             block c { exit; }",
        )
        .unwrap();
        let c: Vec<String> = candidates(&p).iter().map(|e| e.to_string()).collect();
        assert_eq!(c, ["x < 3", "x > 0"]);
    }

    #[test]
    fn no_branches_means_no_stats() {
        let p = parse_program("block a { print 1; exit; }").unwrap();
        let r = optimize(&p, &OptOptions::default()).unwrap();
        assert_eq!(r.program, p);
        assert!(r.stats.is_empty());
    }

    #[test]
    fn accepted_candidate_is_applied_and_verified() {
        let p = parse_program(TWO_TESTS).unwrap();
        let r = optimize(
            &p,
            &OptOptions {
                k: 5,
                verify: Some(20),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.stats.len(), 1);
        let s = &r.stats[0];
        assert!(s.accepted && s.verified && !r.verification_failed);
        assert!(s.actual_growth <= s.predicted_growth);
        assert!(r
            .program
            .blocks()
            .iter()
            .all(|b| b.term.branch_cond().is_none() || b.id.as_str() == "s"));
    }

    #[test]
    fn cond_filter_uses_expression_equality() {
        let p = parse_program(TWO_TESTS).unwrap();
        let opts = OptOptions {
            k: 5,
            cond: Some(parse_expr("((x < 3))").unwrap()),
            ..Default::default()
        };
        assert_eq!(optimize(&p, &opts).unwrap().stats.len(), 1);
        let opts = OptOptions {
            cond: Some(parse_expr("x > 3").unwrap()),
            ..opts
        };
        assert!(optimize(&p, &opts).unwrap().stats.is_empty());
    }

    #[test]
    fn keep_originals_leaves_dead_blocks() {
        let p = parse_program(TWO_TESTS).unwrap();
        let r = optimize(
            &p,
            &OptOptions {
                k: 5,
                keep_originals: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.program.contains(&"a".into()));
        assert!(r.program.contains(&"b.u".into()));
    }

    #[test]
    fn random_runs_are_seeded() {
        let p = parse_program(TWO_TESTS).unwrap();
        let a = random_run(&p, &mut StdRng::seed_from_u64(3));
        let b = random_run(&p, &mut StdRng::seed_from_u64(3));
        assert_eq!(a, b);
        assert_eq!(a.1.len(), 1 + EXTRA_INPUTS);
        assert!(a.1.iter().all(|v| v.abs() <= VERIFY_RANGE));
    }
}
