//! Boolean any-path data-flow solver.
//!
//! Every value starts at `false` and can only flip to `true`, so the solver
//! reaches the least fixpoint of a monotone system regardless of visiting
//! order. Two strategies are provided so that order independence can be
//! checked.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Values depend on predecessors.
    Forward,
    /// Values depend on successors.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Worklist,
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub values: Vec<bool>,
    /// Full sweeps for round-robin (including the final quiet one), transfer
    /// evaluations for the worklist.
    pub iterations: usize,
}

/// Least fixpoint of `v[i] = transfer(i, v)` over the two-point lattice.
///
/// `transfer` must be monotone: making a neighbour true may never turn the
/// result false. Results are joined with the current value, so a node never
/// goes back to false once set.
pub fn solve_any_path<F>(
    succs: &[Vec<usize>],
    preds: &[Vec<usize>],
    direction: Direction,
    strategy: Strategy,
    mut transfer: F,
) -> Solution
where
    F: FnMut(usize, &[bool]) -> bool,
{
    let n = succs.len();
    debug_assert_eq!(preds.len(), n);
    let mut values = vec![false; n];
    let mut iterations = 0;

    match strategy {
        Strategy::RoundRobin => {
            let order: Vec<usize> = match direction {
                Direction::Forward => (0..n).collect(),
                Direction::Backward => (0..n).rev().collect(),
            };
            loop {
                iterations += 1;
                let mut changed = false;
                for &i in &order {
                    if !values[i] && transfer(i, &values) {
                        values[i] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        Strategy::Worklist => {
            let dependents = match direction {
                Direction::Forward => succs,
                Direction::Backward => preds,
            };
            let mut queued = vec![true; n];
            let mut work: VecDeque<usize> = (0..n).collect();
            while let Some(i) = work.pop_front() {
                queued[i] = false;
                iterations += 1;
                if values[i] || !transfer(i, &values) {
                    continue;
                }
                values[i] = true;
                for &j in &dependents[i] {
                    if !values[j] && !queued[j] {
                        queued[j] = true;
                        work.push_back(j);
                    }
                }
            }
        }
    }
    Solution { values, iterations }
}
