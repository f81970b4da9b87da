mod common;

use std::collections::BTreeSet;

use cecd_core::ir::{expr_eq, operands_of, parse_expr, parse_program, print_program, IrError};
use cecd_core::{BlockId, Terminator};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::*;

fn ids(names: &[&str]) -> BTreeSet<BlockId> {
    names.iter().map(BlockId::new).collect()
}

#[test]
fn figure_one_shape() {
    let p = fig1();
    assert_eq!(p.len(), 11);
    assert_eq!(p.entry().as_str(), "bb1");
    let branching: Vec<&str> = p
        .blocks()
        .iter()
        .filter(|b| matches!(b.term, Terminator::Branch { .. }))
        .map(|b| b.id.as_str())
        .collect();
    assert_eq!(branching, ["bb1", "bb3", "bb7", "bb8"]);
    assert_eq!(
        p.succ(&"bb3".into()).unwrap(),
        [BlockId::new("bb4"), BlockId::new("bb5")]
    );
    assert_eq!(
        p.pred(&"bb7".into()).unwrap(),
        ids(&["bb4", "bb5", "bb6", "bb9", "bb10"])
    );
}

#[test]
fn figure_one_prints_in_order_and_round_trips() {
    let p = fig1();
    let text = print_program(&p);
    let order: Vec<&str> = text
        .lines()
        .filter_map(|l| l.strip_prefix("block "))
        .map(|l| l.trim_end_matches(" {"))
        .collect();
    assert_eq!(
        order,
        (1..=11).map(|i| format!("bb{i}")).collect::<Vec<_>>()
    );
    assert_eq!(parse_program(&text).unwrap(), p);
}

#[test]
fn golden_figure_four_parses() {
    let p = fig4();
    assert_eq!(p.len(), 13);
    assert_eq!(parse_program(&print_program(&p)).unwrap(), p);
}

#[test]
fn minimal_and_degenerate_programs() {
    let p = parse_program("block b0 { exit; }").unwrap();
    assert_eq!(p.len(), 1);
    assert!(p.blocks()[0].instrs.is_empty());
    assert_eq!(p.succ(&"b0".into()).unwrap(), Vec::<BlockId>::new());

    let p = parse_program("block s { x = input; br (x < 3) a a; } block a { exit; }").unwrap();
    assert_eq!(
        p.succ(&"s".into()).unwrap(),
        [BlockId::new("a"), BlockId::new("a")]
    );
    assert_eq!(p.pred(&"a".into()).unwrap(), ids(&["s"]));
    assert_eq!(parse_program(&print_program(&p)).unwrap(), p);

    assert!(matches!(
        parse_program("block b0 { goto missing; }"),
        Err(IrError::UndefinedBlock { .. })
    ));
}

#[test]
fn expression_examples() {
    let e = |s| parse_expr(s).unwrap();
    assert!(expr_eq(&e("x < 3"), &e("(x < 3)")));
    assert!(!expr_eq(&e("x < 3"), &e("3 > x")));
    assert!(expr_eq(&e("x && y"), &e("x && y")));
    assert!(operands_of(&e("42")).is_empty());
    assert_eq!(operands_of(&e("x < 3")), ["x".to_owned()].into());
    assert_eq!(
        operands_of(&e("(a+b) == (a*c)")),
        ["a", "b", "c"].map(String::from).into()
    );
}

proptest! {
    #[test]
    fn random_programs_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        for p in [terminating_program(&mut rng, 10), arbitrary_program(&mut rng, 8)] {
            let back = parse_program(&print_program(&p)).unwrap();
            prop_assert_eq!(back, p);
        }
    }

    #[test]
    fn expressions_round_trip(e in arb_expr()) {
        prop_assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn expr_eq_is_an_equivalence(a in arb_expr(), b in arb_expr(), c in arb_expr()) {
        prop_assert!(expr_eq(&a, &a));
        prop_assert_eq!(expr_eq(&a, &b), expr_eq(&b, &a));
        if expr_eq(&a, &b) && expr_eq(&b, &c) {
            prop_assert!(expr_eq(&a, &c));
        }
        // Re-parsing yields an equal expression, which exercises the
        // transitive case with non-identical inputs.
        let a2 = parse_expr(&format!("({a})")).unwrap();
        prop_assert!(expr_eq(&a, &a2) && expr_eq(&a2, &a));
    }

    #[test]
    fn succ_and_pred_agree(seed in any::<u64>()) {
        let p = arbitrary_program(&mut StdRng::seed_from_u64(seed), 8);
        for i in p.blocks() {
            let succ = p.succ(&i.id).unwrap();
            for j in p.blocks() {
                let pred = p.pred(&j.id).unwrap();
                prop_assert_eq!(succ.contains(&j.id), pred.contains(&i.id));
            }
        }
    }
}
