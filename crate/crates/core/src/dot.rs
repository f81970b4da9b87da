//! Graphviz rendering of a program.

use std::fmt::Write;

use crate::analysis::AnalysisResult;
use crate::ir::{BasicBlock, CopyKind, Program, Terminator};

fn node_id(id: &str) -> String {
    id.replace('.', "_")
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node(out: &mut String, indent: &str, b: &BasicBlock, in_region: bool) {
    let style = if in_region {
        ", style=filled, fillcolor=lightgrey"
    } else {
        ""
    };
    let _ = writeln!(
        out,
        "{indent}{} [label=\"{}\\n{} instr\"{style}];",
        node_id(b.id.as_str()),
        escape(b.id.as_str()),
        b.instrs.len(),
    );
}

/// Renders `p` as a DOT digraph. With annotations, region blocks are filled
/// and copies are grouped into one cluster per copy kind.
pub fn emit_dot(p: &Program, annotations: Option<&AnalysisResult>) -> String {
    let mut out = String::from("digraph cecd {\n  node [shape=box];\n");
    let in_region = |b: &BasicBlock| annotations.is_some_and(|a| a.in_region(&b.id));

    if annotations.is_some() {
        for kind in CopyKind::ALL {
            let members: Vec<_> = p
                .blocks()
                .iter()
                .filter(|b| b.origin().is_some_and(|(_, k)| k == kind))
                .collect();
            if members.is_empty() {
                continue;
            }
            let name = kind.suffix();
            let _ = writeln!(out, "  subgraph cluster_{name} {{\n    label=\"{name}\";");
            for b in members {
                node(&mut out, "    ", b, in_region(b));
            }
            out.push_str("  }\n");
        }
        for b in p.blocks().iter().filter(|b| b.origin().is_none()) {
            node(&mut out, "  ", b, in_region(b));
        }
    } else {
        for b in p.blocks() {
            node(&mut out, "  ", b, false);
        }
    }

    for b in p.blocks() {
        let from = node_id(b.id.as_str());
        match &b.term {
            Terminator::Goto(t) => {
                let _ = writeln!(out, "  {from} -> {};", node_id(t.as_str()));
            }
            Terminator::Branch {
                cond,
                on_true,
                on_false,
            } => {
                let c = escape(&cond.to_string());
                let _ = writeln!(
                    out,
                    "  {from} -> {} [label=\"{c}: true\"];",
                    node_id(on_true.as_str())
                );
                let _ = writeln!(
                    out,
                    "  {from} -> {} [label=\"!({c}): false\"];",
                    node_id(on_false.as_str())
                );
            }
            Terminator::Exit => {}
        }
    }
    out.push_str("}\n");
    out
}
