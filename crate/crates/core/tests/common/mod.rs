#![allow(dead_code)]

use std::fmt::Write;

use cecd_core::ir::{parse_program, BinOp, Expr, UnOp};
use cecd_core::Program;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const FIG1: &str = include_str!("../fixtures/fig1.cecd");
pub const FIG4: &str = include_str!("../fixtures/fig4.cecd");

pub fn fig1() -> Program {
    parse_program(FIG1).unwrap()
}

pub fn fig4() -> Program {
    parse_program(FIG4).unwrap()
}

/// Branch conditions the generators draw from.
pub const CONDS: [&str; 6] = [
    "v0 < 3",
    "v1 > 0",
    "v0 == v2",
    "v2 != 0",
    "v0 + v1 > 1",
    "!(v1 <= v2)",
];

const VARS: [&str; 3] = ["v0", "v1", "v2"];

fn random_value(rng: &mut StdRng) -> String {
    let a = VARS.choose(rng).unwrap();
    let b = VARS.choose(rng).unwrap();
    let lit = rng.gen_range(-3..=3);
    match rng.gen_range(0..5) {
        0 => format!("{lit}"),
        1 => format!("{a} + {lit}"),
        2 => format!("{a} - {b}"),
        3 => format!("{a} * 2"),
        _ => format!("{a} + {b}"),
    }
}

fn random_instrs(rng: &mut StdRng, out: &mut String, writes: f64) {
    for _ in 0..rng.gen_range(0..=3) {
        if rng.gen_bool(writes) {
            let t = VARS.choose(rng).unwrap();
            let _ = write!(out, " {t} = {};", random_value(rng));
        } else {
            let _ = write!(out, " print {};", VARS.choose(rng).unwrap());
        }
    }
}

/// A random program that always terminates and usually loops.
///
/// Variables `v0..v2` and the loop counter `c` are read at the entry. Blocks
/// are laid out in order; forward edges go to later blocks and back edges
/// only to loop headers. A header decrements `c` and jumps to the exit block
/// once `c` drops below `-8`. Since nothing else writes `c`, every run is
/// bounded.
pub fn terminating_program(rng: &mut StdRng, max_blocks: usize) -> Program {
    let n = rng.gen_range(3..=max_blocks.max(3));
    let conds: Vec<&str> = CONDS.choose_multiple(rng, 2).copied().collect();
    let writes = rng.gen_range(0.1..0.6);
    let mut headers: Vec<usize> = Vec::new();
    let mut src = String::new();
    let fwd = |rng: &mut StdRng, i: usize| rng.gen_range(i + 1..n);

    for i in 0..n {
        let _ = write!(src, "block b{i} {{");
        if i == n - 1 {
            src.push_str(" print v0; exit; }\n");
            break;
        }
        if i == 0 {
            src.push_str(" c = input; v0 = input; v1 = input; v2 = input;");
        }
        if i > 0 && rng.gen_bool(0.3) {
            headers.push(i);
            let _ = writeln!(src, " c = c - 1; br (c > -8) b{} b{}; }}", i + 1, n - 1);
            continue;
        }
        random_instrs(rng, &mut src, writes);
        let back =
            (!headers.is_empty() && rng.gen_bool(0.3)).then(|| *headers.choose(rng).unwrap());
        let a = back.unwrap_or_else(|| fwd(rng, i));
        if rng.gen_bool(0.6) {
            let c = conds.choose(rng).unwrap();
            let b = fwd(rng, i);
            let (t, f) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            let _ = writeln!(src, " br ({c}) b{t} b{f}; }}");
        } else {
            let _ = writeln!(src, " goto b{a}; }}");
        }
    }
    parse_program(&src).unwrap_or_else(|e| panic!("{e}\n{src}"))
}

/// A random graph of up to `max_blocks` blocks with arbitrary edges. Not
/// meant to be run.
pub fn arbitrary_program(rng: &mut StdRng, max_blocks: usize) -> Program {
    let n = rng.gen_range(1..=max_blocks);
    let conds: Vec<&str> = CONDS.choose_multiple(rng, 2).copied().collect();
    let writes = rng.gen_range(0.0..0.7);
    let mut src = String::new();
    for i in 0..n {
        let _ = write!(src, "block b{i} {{");
        random_instrs(rng, &mut src, writes);
        match rng.gen_range(0..10) {
            0 => src.push_str(" exit; }\n"),
            1..=3 => {
                let _ = writeln!(src, " goto b{}; }}", rng.gen_range(0..n));
            }
            _ => {
                let c = conds.choose(rng).unwrap();
                let _ = writeln!(
                    src,
                    " br ({c}) b{} b{}; }}",
                    rng.gen_range(0..n),
                    rng.gen_range(0..n)
                );
            }
        }
    }
    parse_program(&src).unwrap_or_else(|e| panic!("{e}\n{src}"))
}

pub fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-20i64..20).prop_map(Expr::lit),
        prop::sample::select(vec!["a", "b", "x", "y1"]).prop_map(Expr::var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (
                prop::sample::select(vec![UnOp::Neg, UnOp::Not]),
                inner.clone()
            )
                .prop_map(|(op, e)| Expr::unary(op, e)),
            (
                prop::sample::select(BinOp::ALL.to_vec()),
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
        ]
    })
}
