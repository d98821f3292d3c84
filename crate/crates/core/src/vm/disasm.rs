//! Disassembler: renders a [`Program`] back to assembler-accepted text.
//! Reassembling the output reproduces the program exactly.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::isa::{Addr, Instr, Program};

/// Renders `program` as assembly text. Jump/call targets and the entry
/// point get synthetic labels (`main` for the entry, `L<addr>` otherwise).
pub fn disassemble(program: &Program) -> String {
    let mut labeled: BTreeSet<Addr> = program
        .instrs
        .iter()
        .filter_map(|i| i.target())
        .collect();
    if program.entry != 0 {
        labeled.insert(program.entry);
    }

    let label = |addr: Addr| -> String {
        if addr == program.entry {
            "main".to_string()
        } else {
            format!("L{addr}")
        }
    };

    let mut out = String::new();
    if program.input_len > 0 {
        let _ = writeln!(out, ".input {}", program.input_len);
    }
    for (idx, instr) in program.instrs.iter().enumerate() {
        let addr = idx as Addr;
        if labeled.contains(&addr) || (addr == program.entry && program.entry != 0) {
            let _ = writeln!(out, "{}:", label(addr));
        }
        let text = match *instr {
            Instr::Input { dst, byte } => format!("input {dst}, {byte}"),
            Instr::Const { dst, imm } => format!("const {dst}, {imm:#x}"),
            Instr::Mov { dst, src } => format!("mov {dst}, {src}"),
            Instr::Bin { op, dst, lhs, rhs } => {
                format!("{} {dst}, {lhs}, {rhs}", op.mnemonic())
            }
            Instr::Jcc { cond, lhs, rhs, target } => {
                format!("{} {lhs}, {rhs}, {}", cond.mnemonic(), label(target))
            }
            Instr::Jmp { target } => format!("jmp {}", label(target)),
            Instr::Call { target } => format!("call {}", label(target)),
            Instr::Ret => "ret".to_string(),
            Instr::Halt => "halt".to_string(),
        };
        let _ = writeln!(out, "    {text}");
    }
    out
}
