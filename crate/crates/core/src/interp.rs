//! Reference interpreter.
//!
//! Used as the ground truth when checking that a transformed program behaves
//! like the original: same printed values, same outcome, no more executed
//! steps, and no more evaluations of the eliminated condition.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::ir::{BinOp, BlockId, Expr, Instruction, Program, Terminator, UnOp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RuntimeErrorKind {
    UndefinedVariable(String),
    InputExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Completed,
    FuelExhausted,
    RuntimeError(RuntimeErrorKind),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub outputs: Vec<BigInt>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExecStats {
    /// Instructions plus terminators executed.
    pub steps: u64,
    /// Branch evaluations per distinct condition.
    pub cond_evals: BTreeMap<Expr, u64>,
    pub blocks_visited: Vec<BlockId>,
}

impl ExecStats {
    pub fn evals_of(&self, e: &Expr) -> u64 {
        self.cond_evals.get(e).copied().unwrap_or(0)
    }

    pub fn total_evals(&self) -> u64 {
        self.cond_evals.values().sum()
    }
}

/// Initial variable bindings, for programs that read parameters they never
/// assign.
pub type Env = BTreeMap<String, i64>;

fn truth(b: bool) -> BigInt {
    if b {
        BigInt::one()
    } else {
        BigInt::zero()
    }
}

fn eval(e: &Expr, vars: &HashMap<&str, BigInt>) -> Result<BigInt, RuntimeErrorKind> {
    Ok(match e {
        Expr::Lit(v) => v.clone(),
        Expr::Var(name) => vars
            .get(name.as_str())
            .cloned()
            .ok_or_else(|| RuntimeErrorKind::UndefinedVariable(name.clone()))?,
        Expr::Unary(op, a) => {
            let a = eval(a, vars)?;
            match op {
                UnOp::Neg => -a,
                UnOp::Not => truth(a.is_zero()),
            }
        }
        Expr::Binary(op, a, b) => {
            // Both sides are always evaluated; `&&` and `||` are strict.
            let a = eval(a, vars)?;
            let b = eval(b, vars)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Eq => truth(a == b),
                BinOp::Ne => truth(a != b),
                BinOp::Lt => truth(a < b),
                BinOp::Le => truth(a <= b),
                BinOp::Gt => truth(a > b),
                BinOp::Ge => truth(a >= b),
                BinOp::And => truth(!a.is_zero() && !b.is_zero()),
                BinOp::Or => truth(!a.is_zero() || !b.is_zero()),
            }
        }
    })
}

/// Runs `p` from its entry with no initial bindings.
pub fn run(p: &Program, inputs: &[i64], fuel: u64) -> (Trace, ExecStats) {
    run_with_env(p, &Env::new(), inputs, fuel)
}

/// Runs `p` with the variables of `env` bound before the entry block.
///
/// Execution stops at `exit`, when `fuel` steps have been executed, or at the
/// first runtime error. Deterministic in `(p, env, inputs, fuel)`.
pub fn run_with_env(p: &Program, env: &Env, inputs: &[i64], fuel: u64) -> (Trace, ExecStats) {
    let blocks = p.blocks();
    // Per block: successor indices by slot, and the interned condition.
    let mut conds: Vec<&Expr> = Vec::new();
    let mut cond_slot: Vec<Option<usize>> = Vec::with_capacity(blocks.len());
    let mut targets: Vec<Vec<usize>> = Vec::with_capacity(blocks.len());
    for b in blocks {
        targets.push(
            b.term
                .successors()
                .into_iter()
                .map(|t| p.index_of(t).expect("validated program"))
                .collect(),
        );
        cond_slot.push(b.term.branch_cond().map(|c| {
            conds.iter().position(|k| *k == c).unwrap_or_else(|| {
                conds.push(c);
                conds.len() - 1
            })
        }));
    }
    let mut counts = vec![0u64; conds.len()];

    let mut vars: HashMap<&str, BigInt> = env
        .iter()
        .map(|(k, v)| (k.as_str(), BigInt::from(*v)))
        .collect();
    let mut inputs = inputs.iter();
    let mut outputs = Vec::new();
    let mut steps = 0u64;
    let mut visited = Vec::new();
    let mut cur = p.entry_index();

    let outcome = 'run: loop {
        let b = &blocks[cur];
        visited.push(b.id.clone());
        for instr in &b.instrs {
            if steps >= fuel {
                break 'run Outcome::FuelExhausted;
            }
            steps += 1;
            match instr {
                Instruction::Assign { target, value } => match eval(value, &vars) {
                    Ok(v) => {
                        vars.insert(target, v);
                    }
                    Err(k) => break 'run Outcome::RuntimeError(k),
                },
                Instruction::Input { target } => match inputs.next() {
                    Some(v) => {
                        vars.insert(target, BigInt::from(*v));
                    }
                    None => break 'run Outcome::RuntimeError(RuntimeErrorKind::InputExhausted),
                },
                Instruction::Print { value } => match eval(value, &vars) {
                    Ok(v) => outputs.push(v),
                    Err(k) => break 'run Outcome::RuntimeError(k),
                },
            }
        }
        if steps >= fuel {
            break 'run Outcome::FuelExhausted;
        }
        steps += 1;
        cur = match &b.term {
            Terminator::Exit => break 'run Outcome::Completed,
            Terminator::Goto(_) => targets[cur][0],
            Terminator::Branch { cond, .. } => match eval(cond, &vars) {
                Ok(v) => {
                    counts[cond_slot[cur].expect("branch has a slot")] += 1;
                    if v.is_zero() {
                        targets[cur][1]
                    } else {
                        targets[cur][0]
                    }
                }
                Err(k) => break 'run Outcome::RuntimeError(k),
            },
        };
    };

    let cond_evals = conds
        .into_iter()
        .zip(counts)
        .filter(|(_, n)| *n > 0)
        .map(|(c, n)| (c.clone(), n))
        .collect();
    (
        Trace { outputs, outcome },
        ExecStats {
            steps,
            cond_evals,
            blocks_visited: visited,
        },
    )
}

/// Compares two traces. When the first run ran out of fuel, only the common
/// prefix of the outputs is compared, since the second program may get
/// further in the same number of steps.
pub fn traces_equivalent(a: &Trace, b: &Trace) -> bool {
    if a.outcome == Outcome::FuelExhausted {
        let n = a.outputs.len().min(b.outputs.len());
        return a.outputs[..n] == b.outputs[..n];
    }
    a == b
}

pub fn equivalent(p1: &Program, p2: &Program, inputs: &[i64], fuel: u64) -> bool {
    equivalent_with_env(p1, p2, &Env::new(), inputs, fuel)
}

pub fn equivalent_with_env(
    p1: &Program,
    p2: &Program,
    env: &Env,
    inputs: &[i64],
    fuel: u64,
) -> bool {
    let (a, _) = run_with_env(p1, env, inputs, fuel);
    let (b, _) = run_with_env(p2, env, inputs, fuel);
    traces_equivalent(&a, &b)
}
