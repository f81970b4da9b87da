//! Control-flow-graph IR: basic blocks of straight-line instructions ending in
//! a `goto`, a two-way `br`, or `exit`.

mod expr;
mod parse;
mod print;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub use expr::{expr_eq, operands_of, BinOp, Expr, UnOp};
pub use parse::{parse_expr, parse_program};
pub use print::print_program;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IrError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("duplicate block id `{0}`")]
    DuplicateBlock(BlockId),
    #[error("block `{from}` refers to undefined block `{target}`")]
    UndefinedBlock { from: BlockId, target: BlockId },
    #[error("entry `{0}` is not a block of the program")]
    UnknownEntry(BlockId),
    #[error("unknown block id `{0}`")]
    UnknownBlock(BlockId),
    #[error("program has no blocks")]
    Empty,
}

/// Block identifier. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(Arc<str>);

impl BlockId {
    pub fn new(s: impl AsRef<str>) -> Self {
        BlockId(Arc::from(s.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The id of the given copy of this block: `bb4` -> `bb4.t`.
    pub fn copy(&self, kind: CopyKind) -> BlockId {
        BlockId::new(format!("{}.{}", self.0, kind.suffix()))
    }

    /// Splits a copy id into the block it was copied from and its kind.
    pub fn origin(&self) -> Option<(BlockId, CopyKind)> {
        let (base, suffix) = self.0.rsplit_once('.')?;
        if base.is_empty() {
            return None;
        }
        let kind = match suffix {
            "t" => CopyKind::TrueCopy,
            "f" => CopyKind::FalseCopy,
            "u" => CopyKind::UnknownCopy,
            _ => return None,
        };
        Some((BlockId::new(base), kind))
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for BlockId {
    fn from(s: &str) -> Self {
        BlockId::new(s)
    }
}

impl Serialize for BlockId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CopyKind {
    TrueCopy,
    FalseCopy,
    UnknownCopy,
}

impl CopyKind {
    pub const ALL: [CopyKind; 3] = [
        CopyKind::TrueCopy,
        CopyKind::FalseCopy,
        CopyKind::UnknownCopy,
    ];

    pub fn suffix(self) -> &'static str {
        match self {
            CopyKind::TrueCopy => "t",
            CopyKind::FalseCopy => "f",
            CopyKind::UnknownCopy => "u",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    Assign { target: String, value: Expr },
    Input { target: String },
    Print { value: Expr },
}

impl Instruction {
    /// The variable written by this instruction, if any.
    pub fn target(&self) -> Option<&str> {
        match self {
            Instruction::Assign { target, .. } | Instruction::Input { target } => Some(target),
            Instruction::Print { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terminator {
    Goto(BlockId),
    Branch {
        cond: Expr,
        on_true: BlockId,
        on_false: BlockId,
    },
    Exit,
}

impl Terminator {
    /// Successor slots in order: the target of a `goto`, or the true then the
    /// false target of a branch.
    pub fn successors(&self) -> Vec<&BlockId> {
        match self {
            Terminator::Goto(t) => vec![t],
            Terminator::Branch {
                on_true, on_false, ..
            } => vec![on_true, on_false],
            Terminator::Exit => vec![],
        }
    }

    pub fn successors_mut(&mut self) -> Vec<&mut BlockId> {
        match self {
            Terminator::Goto(t) => vec![t],
            Terminator::Branch {
                on_true, on_false, ..
            } => vec![on_true, on_false],
            Terminator::Exit => vec![],
        }
    }

    pub fn branch_cond(&self) -> Option<&Expr> {
        match self {
            Terminator::Branch { cond, .. } => Some(cond),
            _ => None,
        }
    }

    pub fn branches_on(&self, e: &Expr) -> bool {
        self.branch_cond().is_some_and(|c| expr_eq(c, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicBlock {
    pub id: BlockId,
    pub instrs: Vec<Instruction>,
    pub term: Terminator,
}

impl BasicBlock {
    pub fn new(id: impl Into<BlockId>, instrs: Vec<Instruction>, term: Terminator) -> Self {
        BasicBlock {
            id: id.into(),
            instrs,
            term,
        }
    }

    /// For blocks created by duplication, the original block and copy kind.
    /// Derived from the `<orig>.t|f|u` naming scheme, so it survives a round
    /// trip through the textual format.
    pub fn origin(&self) -> Option<(BlockId, CopyKind)> {
        self.id.origin()
    }

    pub fn assigns(&self, var: &str) -> bool {
        self.instrs.iter().any(|i| i.target() == Some(var))
    }

    /// An empty block that unconditionally jumps elsewhere.
    pub fn is_forwarding(&self) -> bool {
        self.instrs.is_empty() && matches!(&self.term, Terminator::Goto(t) if *t != self.id)
    }
}

/// A whole program. Immutable once built; every constructor checks that block
/// ids are unique and that all referenced blocks exist.
#[derive(Debug, Clone)]
pub struct Program {
    blocks: Vec<BasicBlock>,
    entry: BlockId,
    index: HashMap<BlockId, usize>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.entry == other.entry && self.blocks == other.blocks
    }
}

impl Eq for Program {}

impl Program {
    pub fn new(blocks: Vec<BasicBlock>, entry: BlockId) -> Result<Self, IrError> {
        if blocks.is_empty() {
            return Err(IrError::Empty);
        }
        let mut index = HashMap::with_capacity(blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            if index.insert(b.id.clone(), i).is_some() {
                return Err(IrError::DuplicateBlock(b.id.clone()));
            }
        }
        for b in &blocks {
            for t in b.term.successors() {
                if !index.contains_key(t) {
                    return Err(IrError::UndefinedBlock {
                        from: b.id.clone(),
                        target: t.clone(),
                    });
                }
            }
        }
        if !index.contains_key(&entry) {
            return Err(IrError::UnknownEntry(entry));
        }
        Ok(Program {
            blocks,
            entry,
            index,
        })
    }

    /// Builds a program whose entry is the first block.
    pub fn from_blocks(blocks: Vec<BasicBlock>) -> Result<Self, IrError> {
        let entry = blocks.first().ok_or(IrError::Empty)?.id.clone();
        Program::new(blocks, entry)
    }

    pub fn blocks(&self) -> &[BasicBlock] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<BasicBlock> {
        self.blocks
    }

    pub fn entry(&self) -> &BlockId {
        &self.entry
    }

    pub fn entry_index(&self) -> usize {
        self.index[&self.entry]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn index_of(&self, id: &BlockId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn block(&self, id: &BlockId) -> Option<&BasicBlock> {
        self.index_of(id).map(|i| &self.blocks[i])
    }

    pub fn contains(&self, id: &BlockId) -> bool {
        self.index.contains_key(id)
    }

    pub fn succ(&self, id: &BlockId) -> Result<Vec<BlockId>, IrError> {
        let b = self
            .block(id)
            .ok_or_else(|| IrError::UnknownBlock(id.clone()))?;
        Ok(b.term.successors().into_iter().cloned().collect())
    }

    pub fn pred(&self, id: &BlockId) -> Result<BTreeSet<BlockId>, IrError> {
        if !self.contains(id) {
            return Err(IrError::UnknownBlock(id.clone()));
        }
        Ok(self
            .blocks
            .iter()
            .filter(|b| b.term.successors().contains(&id))
            .map(|b| b.id.clone())
            .collect())
    }

    /// Successor indices per block, deduplicated, in slot order.
    pub fn successor_indices(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .map(|b| {
                let mut out: Vec<usize> = Vec::with_capacity(2);
                for t in b.term.successors() {
                    let j = self.index[t];
                    if !out.contains(&j) {
                        out.push(j);
                    }
                }
                out
            })
            .collect()
    }

    pub fn instruction_count(&self) -> usize {
        self.blocks.iter().map(|b| b.instrs.len()).sum()
    }

    /// Distinct branch conditions with their number of branch sites, in
    /// order of first occurrence.
    pub fn branch_conditions(&self) -> Vec<(Expr, usize)> {
        let mut out: Vec<(Expr, usize)> = Vec::new();
        for c in self.blocks.iter().filter_map(|b| b.term.branch_cond()) {
            match out.iter_mut().find(|(e, _)| expr_eq(e, c)) {
                Some((_, n)) => *n += 1,
                None => out.push((c.clone(), 1)),
            }
        }
        out
    }

    /// Every variable named anywhere in the program.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for b in &self.blocks {
            for i in &b.instrs {
                if let Some(t) = i.target() {
                    out.insert(t.to_owned());
                }
                if let Instruction::Assign { value, .. } | Instruction::Print { value } = i {
                    out.extend(value.operands().into_iter().map(str::to_owned));
                }
            }
            if let Some(c) = b.term.branch_cond() {
                out.extend(c.operands().into_iter().map(str::to_owned));
            }
        }
        out
    }

    pub fn input_count(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| &b.instrs)
            .filter(|i| matches!(i, Instruction::Input { .. }))
            .count()
    }

    /// Same blocks regardless of their order in the block list.
    pub fn same_graph(&self, other: &Program) -> bool {
        self.entry == other.entry
            && self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .all(|b| other.block(&b.id).is_some_and(|o| o == b))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_program(self))
    }
}
