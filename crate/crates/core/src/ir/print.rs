use std::fmt::Write;

use super::{Instruction, Program, Terminator};

/// Canonical text of a program. The `entry` directive is emitted only when
/// the entry is not the first block.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    if p.blocks()[0].id != *p.entry() {
        writeln!(out, "entry {};\n", p.entry()).unwrap();
    }
    for (i, b) in p.blocks().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "block {} {{", b.id).unwrap();
        for instr in &b.instrs {
            match instr {
                Instruction::Assign { target, value } => writeln!(out, "  {target} = {value};"),
                Instruction::Input { target } => writeln!(out, "  {target} = input;"),
                Instruction::Print { value } => writeln!(out, "  print {value};"),
            }
            .unwrap();
        }
        match &b.term {
            Terminator::Goto(t) => writeln!(out, "  goto {t};"),
            Terminator::Branch {
                cond,
                on_true,
                on_false,
            } => writeln!(out, "  br ({cond}) {on_true} {on_false};"),
            Terminator::Exit => writeln!(out, "  exit;"),
        }
        .unwrap();
        out.push_str("}\n");
    }
    out
}
