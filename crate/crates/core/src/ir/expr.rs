//! Pure integer expressions.
//!
//! Equality on [`Expr`] is structural: two expressions are the same condition
//! exactly when their operator trees, identifiers and literals coincide. No
//! algebraic normalization is performed, so `x < 3` and `3 > x` are distinct.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 11] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter. All binary operators are
    /// left-associative.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }
}

const UNARY_PREC: u8 = 7;
const ATOM_PREC: u8 = 8;

/// Side-effect-free expression over unbounded integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Lit(BigInt),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn lit(v: impl Into<BigInt>) -> Self {
        Expr::Lit(v.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn unary(op: UnOp, e: Expr) -> Self {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Self {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    /// The identifiers occurring in this expression.
    pub fn operands(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_operands(&mut out);
        out
    }

    fn collect_operands<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(v) => {
                out.insert(v.as_str());
            }
            Expr::Unary(_, e) => e.collect_operands(out),
            Expr::Binary(_, l, r) => {
                l.collect_operands(out);
                r.collect_operands(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Lit(_) | Expr::Var(_) => ATOM_PREC,
            Expr::Unary(..) => UNARY_PREC,
            Expr::Binary(op, ..) => op.precedence(),
        }
    }
}

/// Structural equality of two conditions.
pub fn expr_eq(a: &Expr, b: &Expr) -> bool {
    a == b
}

/// Owned variant of [`Expr::operands`].
pub fn operands_of(e: &Expr) -> BTreeSet<String> {
    e.operands().into_iter().map(str::to_owned).collect()
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the minimal parenthesization that re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Unary(op, e) => {
                f.write_str(match op {
                    UnOp::Neg => "-",
                    UnOp::Not => "!",
                })?;
                // `-3` lexes as a single negative literal, so a negated
                // literal needs explicit grouping.
                let parens = e.precedence() < UNARY_PREC || matches!(**e, Expr::Lit(_));
                write_child(f, e, parens)
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                write_child(f, l, l.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                // A negative literal on the right is fine: `x - -3`.
                let r_parens = r.precedence() <= p && !matches!(**r, Expr::Lit(_));
                write_child(f, r, r_parens)
            }
        }
    }
}
