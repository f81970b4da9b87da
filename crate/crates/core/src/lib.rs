//! Conditional elimination through code duplication (CECD).
//!
//! Given a branch condition `e` and a region of blocks that never write any
//! variable of `e`, every region block is triplicated into a true, a false and
//! an unknown copy. Branches on `e` are redirected into the matching copy, and
//! inside the true and false copies further branches on `e` become jumps.
//!
//! Modules:
//! - [`ir`]: the CFG intermediate representation and its text format
//! - [`interp`]: reference interpreter used as a semantic oracle
//! - [`analysis`]: the any-path data-flow problems that pick the region and
//!   predict which copies survive
//! - [`transform`]: duplication, rewiring, elimination and cleanup
//! - [`heuristic`]: region selection/evaluation and the knapsack reduction
//! - [`pipeline`]: the end-to-end optimizer driven by the CLI
//! - [`dot`]: Graphviz output

pub mod analysis;
pub mod dot;
pub mod heuristic;
pub mod interp;
pub mod ir;
pub mod pipeline;
pub mod transform;

pub use ir::{BasicBlock, BlockId, CopyKind, Expr, Instruction, Program, Terminator};
