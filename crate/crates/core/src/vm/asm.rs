//! Textual assembler.
//!
//! Format: one instruction per line, `label:` definitions (own line or
//! prefixing an instruction), comments from `;` to end of line, a single
//! `.input N` directive declaring the seed length, operands separated by
//! commas. Immediates are decimal or `0x` hexadecimal. The program entry
//! is the address of the `main` label when present, otherwise 0.

use std::collections::BTreeMap;

use super::isa::{Addr, BinOp, Cond, Instr, Program, Reg};

/// Assembly failure, positioned at the offending token.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {kind}")]
pub struct AsmError {
    /// 1-based source line.
    pub line: usize,
    /// 1-based column of the offending token.
    pub col: usize,
    pub kind: AsmErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AsmErrorKind {
    #[error("unknown mnemonic `{0}`")]
    UnknownMnemonic(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("register id out of range in `{0}` (r0..r15)")]
    RegisterOutOfRange(String),
    #[error("expected a register, found `{0}`")]
    ExpectedRegister(String),
    #[error("bad numeric literal `{0}`")]
    BadNumber(String),
    #[error("input byte index {index} out of range for declared input length {input_len}")]
    InputIndexOutOfRange { index: u32, input_len: usize },
    #[error("jump target {addr} is outside the program (0..{len})")]
    TargetOutOfRange { addr: Addr, len: usize },
    #[error("`{mnemonic}` takes {expected} operand(s), found {got}")]
    OperandCount {
        mnemonic: String,
        expected: usize,
        got: usize,
    },
    #[error("bad label name `{0}`")]
    BadLabel(String),
    #[error("duplicate `.input` directive")]
    DuplicateDirective,
    #[error("bad directive `{0}` (expected `.input N`)")]
    BadDirective(String),
    #[error("unexpected token `{0}`")]
    Unexpected(String),
    #[error("program has no halt instruction")]
    MissingHalt,
    #[error("program has more than one halt instruction")]
    MultipleHalt,
}

/// A token with its 1-based starting column.
struct Tok<'a> {
    text: &'a str,
    col: usize,
}

/// Splits a line into tokens. `:` and `,` are separators that also stand
/// alone as tokens (for `label:` detection); `;` starts a comment.
fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let line = line.split(';').next().unwrap_or("");
    let mut toks = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        match ch {
            c if c.is_whitespace() => {
                if let Some(s) = start.take() {
                    toks.push(Tok { text: &line[s..i], col: s + 1 });
                }
            }
            ':' | ',' => {
                if let Some(s) = start.take() {
                    toks.push(Tok { text: &line[s..i], col: s + 1 });
                }
                toks.push(Tok { text: &line[i..i + 1], col: i + 1 });
            }
            _ => {
                if start.is_none() {
                    start = Some(i);
                }
            }
        }
    }
    if let Some(s) = start {
        toks.push(Tok { text: &line[s..], col: s + 1 });
    }
    toks
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn looks_like_register(s: &str) -> bool {
    s.len() >= 2 && s.starts_with(['r', 'R']) && s[1..].chars().all(|c| c.is_ascii_digit())
}

fn parse_number(tok: &Tok<'_>, line: usize) -> Result<u32, AsmError> {
    let text = tok.text;
    let parsed = if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        u32::from_str_radix(hex, 16)
    } else {
        text.parse::<u32>()
    };
    parsed.map_err(|_| AsmError {
        line,
        col: tok.col,
        kind: AsmErrorKind::BadNumber(text.to_string()),
    })
}

fn parse_reg(tok: &Tok<'_>, line: usize) -> Result<Reg, AsmError> {
    if !looks_like_register(tok.text) {
        return Err(AsmError {
            line,
            col: tok.col,
            kind: AsmErrorKind::ExpectedRegister(tok.text.to_string()),
        });
    }
    let id: u32 = tok.text[1..].parse().map_err(|_| AsmError {
        line,
        col: tok.col,
        kind: AsmErrorKind::RegisterOutOfRange(tok.text.to_string()),
    })?;
    u8::try_from(id)
        .ok()
        .and_then(Reg::new)
        .ok_or_else(|| AsmError {
            line,
            col: tok.col,
            kind: AsmErrorKind::RegisterOutOfRange(tok.text.to_string()),
        })
}

/// An unresolved jump/call target: either a label or a literal address.
enum PendingTarget {
    Label { name: String, line: usize, col: usize },
    Literal { addr: Addr, line: usize, col: usize },
}

/// Instruction skeleton with the target still unresolved.
enum Pending {
    Ready(Instr),
    Jcc { cond: Cond, lhs: Reg, rhs: Reg, target: PendingTarget },
    Jmp { target: PendingTarget },
    Call { target: PendingTarget },
}

/// Assembles source text into a [`Program`].
pub fn assemble(source: &str) -> Result<Program, AsmError> {
    let mut labels: BTreeMap<String, Addr> = BTreeMap::new();
    let mut pending: Vec<Pending> = Vec::new();
    let mut input_len: Option<(usize, usize, usize)> = None; // (len, line, col)
    let mut input_uses: Vec<(u32, usize, usize)> = Vec::new();
    let mut halt_lines: Vec<usize> = Vec::new();
    let mut last_line = 0usize;

    for (lineno, raw) in source.lines().enumerate() {
        let line = lineno + 1;
        last_line = line;
        let toks = tokenize(raw);
        let mut i = 0;

        // label definitions: `name :`
        while i + 1 < toks.len() && toks[i + 1].text == ":" {
            let name = toks[i].text;
            if !is_ident(name) || looks_like_register(name) {
                return Err(AsmError {
                    line,
                    col: toks[i].col,
                    kind: AsmErrorKind::BadLabel(name.to_string()),
                });
            }
            let addr = pending.len() as Addr;
            if labels.insert(name.to_string(), addr).is_some() {
                return Err(AsmError {
                    line,
                    col: toks[i].col,
                    kind: AsmErrorKind::DuplicateLabel(name.to_string()),
                });
            }
            i += 2;
        }

        if i >= toks.len() {
            continue;
        }

        let head = &toks[i];
        if head.text.starts_with('.') {
            // directive
            if !head.text.eq_ignore_ascii_case(".input") {
                return Err(AsmError {
                    line,
                    col: head.col,
                    kind: AsmErrorKind::BadDirective(head.text.to_string()),
                });
            }
            let operands = collect_operands(&toks[i + 1..], line)?;
            if operands.len() != 1 {
                return Err(AsmError {
                    line,
                    col: head.col,
                    kind: AsmErrorKind::OperandCount {
                        mnemonic: ".input".into(),
                        expected: 1,
                        got: operands.len(),
                    },
                });
            }
            let n = parse_number(operands[0], line)?;
            if input_len.is_some() {
                return Err(AsmError {
                    line,
                    col: head.col,
                    kind: AsmErrorKind::DuplicateDirective,
                });
            }
            input_len = Some((n as usize, line, head.col));
            continue;
        }

        let operands = collect_operands(&toks[i + 1..], line)?;
        let instr = parse_instr(head, &operands, line, &mut input_uses, &mut halt_lines)?;
        pending.push(instr);
    }

    // resolve targets and build the final listing
    let len = pending.len();
    let resolve = |target: PendingTarget| -> Result<Addr, AsmError> {
        let (addr, line, col) = match target {
            PendingTarget::Label { name, line, col } => match labels.get(&name) {
                Some(&a) => (a, line, col),
                None => {
                    return Err(AsmError {
                        line,
                        col,
                        kind: AsmErrorKind::UnknownLabel(name),
                    })
                }
            },
            PendingTarget::Literal { addr, line, col } => (addr, line, col),
        };
        if (addr as usize) < len {
            Ok(addr)
        } else {
            Err(AsmError {
                line,
                col,
                kind: AsmErrorKind::TargetOutOfRange { addr, len },
            })
        }
    };

    let mut instrs = Vec::with_capacity(len);
    for p in pending {
        instrs.push(match p {
            Pending::Ready(i) => i,
            Pending::Jcc { cond, lhs, rhs, target } => Instr::Jcc {
                cond,
                lhs,
                rhs,
                target: resolve(target)?,
            },
            Pending::Jmp { target } => Instr::Jmp { target: resolve(target)? },
            Pending::Call { target } => Instr::Call { target: resolve(target)? },
        });
    }

    let declared_len = input_len.map(|(n, _, _)| n).unwrap_or(0);
    for (index, line, col) in input_uses {
        if (index as usize) >= declared_len {
            return Err(AsmError {
                line,
                col,
                kind: AsmErrorKind::InputIndexOutOfRange { index, input_len: declared_len },
            });
        }
    }

    match halt_lines.len() {
        0 => {
            return Err(AsmError {
                line: last_line.max(1),
                col: 1,
                kind: AsmErrorKind::MissingHalt,
            })
        }
        1 => {}
        _ => {
            return Err(AsmError {
                line: halt_lines[1],
                col: 1,
                kind: AsmErrorKind::MultipleHalt,
            })
        }
    }

    let entry = labels.get("main").copied().unwrap_or(0);
    Ok(Program {
        instrs,
        input_len: declared_len,
        entry,
    })
}

/// Splits the operand tokens on commas; rejects stray `:`.
fn collect_operands<'a, 'b>(
    toks: &'b [Tok<'a>],
    line: usize,
) -> Result<Vec<&'b Tok<'a>>, AsmError> {
    let mut out = Vec::new();
    let mut expect_operand = true;
    for tok in toks {
        match tok.text {
            "," => {
                if expect_operand {
                    return Err(AsmError {
                        line,
                        col: tok.col,
                        kind: AsmErrorKind::Unexpected(",".into()),
                    });
                }
                expect_operand = true;
            }
            ":" => {
                return Err(AsmError {
                    line,
                    col: tok.col,
                    kind: AsmErrorKind::Unexpected(":".into()),
                })
            }
            _ => {
                if !expect_operand {
                    return Err(AsmError {
                        line,
                        col: tok.col,
                        kind: AsmErrorKind::Unexpected(tok.text.to_string()),
                    });
                }
                out.push(tok);
                expect_operand = false;
            }
        }
    }
    if expect_operand && !out.is_empty() {
        // trailing comma
        return Err(AsmError {
            line,
            col: toks.last().map(|t| t.col).unwrap_or(1),
            kind: AsmErrorKind::Unexpected(",".into()),
        });
    }
    Ok(out)
}

fn expect_count(
    mnemonic: &str,
    operands: &[&Tok<'_>],
    expected: usize,
    line: usize,
    col: usize,
) -> Result<(), AsmError> {
    if operands.len() == expected {
        Ok(())
    } else {
        Err(AsmError {
            line,
            col,
            kind: AsmErrorKind::OperandCount {
                mnemonic: mnemonic.to_string(),
                expected,
                got: operands.len(),
            },
        })
    }
}

fn parse_target(tok: &Tok<'_>, line: usize) -> Result<PendingTarget, AsmError> {
    if tok.text.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        let addr = parse_number(tok, line)?;
        Ok(PendingTarget::Literal { addr, line, col: tok.col })
    } else if is_ident(tok.text) && !looks_like_register(tok.text) {
        Ok(PendingTarget::Label {
            name: tok.text.to_string(),
            line,
            col: tok.col,
        })
    } else {
        Err(AsmError {
            line,
            col: tok.col,
            kind: AsmErrorKind::Unexpected(tok.text.to_string()),
        })
    }
}

fn parse_instr(
    head: &Tok<'_>,
    operands: &[&Tok<'_>],
    line: usize,
    input_uses: &mut Vec<(u32, usize, usize)>,
    halt_lines: &mut Vec<usize>,
) -> Result<Pending, AsmError> {
    let mnemonic = head.text.to_ascii_lowercase();
    let col = head.col;

    let bin_op = |op: BinOp| -> Result<Pending, AsmError> {
        expect_count(&mnemonic, operands, 3, line, col)?;
        Ok(Pending::Ready(Instr::Bin {
            op,
            dst: parse_reg(operands[0], line)?,
            lhs: parse_reg(operands[1], line)?,
            rhs: parse_reg(operands[2], line)?,
        }))
    };
    let jcc = |cond: Cond| -> Result<Pending, AsmError> {
        expect_count(&mnemonic, operands, 3, line, col)?;
        Ok(Pending::Jcc {
            cond,
            lhs: parse_reg(operands[0], line)?,
            rhs: parse_reg(operands[1], line)?,
            target: parse_target(operands[2], line)?,
        })
    };

    match mnemonic.as_str() {
        "input" => {
            expect_count(&mnemonic, operands, 2, line, col)?;
            let dst = parse_reg(operands[0], line)?;
            let byte = parse_number(operands[1], line)?;
            input_uses.push((byte, line, operands[1].col));
            Ok(Pending::Ready(Instr::Input { dst, byte }))
        }
        "const" => {
            expect_count(&mnemonic, operands, 2, line, col)?;
            Ok(Pending::Ready(Instr::Const {
                dst: parse_reg(operands[0], line)?,
                imm: parse_number(operands[1], line)?,
            }))
        }
        "mov" => {
            expect_count(&mnemonic, operands, 2, line, col)?;
            Ok(Pending::Ready(Instr::Mov {
                dst: parse_reg(operands[0], line)?,
                src: parse_reg(operands[1], line)?,
            }))
        }
        "add" => bin_op(BinOp::Add),
        "sub" => bin_op(BinOp::Sub),
        "mul" => bin_op(BinOp::Mul),
        "and" => bin_op(BinOp::And),
        "or" => bin_op(BinOp::Or),
        "xor" => bin_op(BinOp::Xor),
        "shl" => bin_op(BinOp::Shl),
        "shr" => bin_op(BinOp::Shr),
        "jeq" => jcc(Cond::Eq),
        "jne" => jcc(Cond::Ne),
        "jlt" => jcc(Cond::Ult),
        "jle" => jcc(Cond::Ule),
        "jgt" => jcc(Cond::Ugt),
        "jge" => jcc(Cond::Uge),
        "jlts" => jcc(Cond::Slt),
        "jles" => jcc(Cond::Sle),
        "jgts" => jcc(Cond::Sgt),
        "jges" => jcc(Cond::Sge),
        "jmp" => {
            expect_count(&mnemonic, operands, 1, line, col)?;
            Ok(Pending::Jmp {
                target: parse_target(operands[0], line)?,
            })
        }
        "call" => {
            expect_count(&mnemonic, operands, 1, line, col)?;
            Ok(Pending::Call {
                target: parse_target(operands[0], line)?,
            })
        }
        "ret" => {
            expect_count(&mnemonic, operands, 0, line, col)?;
            Ok(Pending::Ready(Instr::Ret))
        }
        "halt" => {
            expect_count(&mnemonic, operands, 0, line, col)?;
            halt_lines.push(line);
            Ok(Pending::Ready(Instr::Halt))
        }
        _ => Err(AsmError {
            line,
            col,
            kind: AsmErrorKind::UnknownMnemonic(head.text.to_string()),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_halt_program() {
        let p = assemble("halt").unwrap();
        assert_eq!(p.instrs, vec![Instr::Halt]);
        assert_eq!(p.entry, 0);
        assert_eq!(p.input_len, 0);
    }

    #[test]
    fn labels_and_targets_resolve_to_listing_order() {
        let src = "
.input 1
main:
    input r0, 0
    const r1, 5
    jeq r0, r1, done
    const r2, 0xff
done:
    halt
";
        let p = assemble(src).unwrap();
        assert_eq!(p.entry, 0);
        assert_eq!(p.input_len, 1);
        assert_eq!(
            p.instrs[2],
            Instr::Jcc {
                cond: Cond::Eq,
                lhs: Reg::new(0).unwrap(),
                rhs: Reg::new(1).unwrap(),
                target: 4
            }
        );
    }

    #[test]
    fn bundled_two_function_program_shape() {
        let path = format!("{}/../../corpus/listing1.asm", env!("CARGO_MANIFEST_DIR"));
        let p = assemble(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(p.input_len, 4);
        assert_eq!(p.entry, 13);
        assert_eq!(p.function_entries(), vec![0, 13]);
        assert_eq!(p.branch_sites(), vec![8, 15, 19, 25]);
    }

    #[test]
    fn unknown_label_is_reported_with_position() {
        let err = assemble("jmp missing_label\nhalt").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.kind, AsmErrorKind::UnknownLabel("missing_label".into()));
    }

    #[test]
    fn duplicate_label_rejected() {
        let err = assemble("a:\nhalt\na:\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(matches!(err.kind, AsmErrorKind::DuplicateLabel(_)));
    }

    #[test]
    fn register_out_of_range() {
        let err = assemble("const r16, 1\nhalt").unwrap_err();
        assert_eq!(err.kind, AsmErrorKind::RegisterOutOfRange("r16".into()));
    }

    #[test]
    fn input_index_must_be_declared() {
        let err = assemble(".input 2\ninput r0, 2\nhalt").unwrap_err();
        assert_eq!(
            err.kind,
            AsmErrorKind::InputIndexOutOfRange { index: 2, input_len: 2 }
        );
        // and without any directive the length defaults to zero
        let err = assemble("input r0, 0\nhalt").unwrap_err();
        assert!(matches!(err.kind, AsmErrorKind::InputIndexOutOfRange { .. }));
    }

    #[test]
    fn halt_must_appear_exactly_once() {
        let err = assemble("const r0, 1").unwrap_err();
        assert_eq!(err.kind, AsmErrorKind::MissingHalt);
        let err = assemble("halt\nhalt").unwrap_err();
        assert_eq!(err.kind, AsmErrorKind::MultipleHalt);
    }

    #[test]
    fn numeric_targets_accepted() {
        let p = assemble("jmp 1\nhalt").unwrap();
        assert_eq!(p.instrs[0], Instr::Jmp { target: 1 });
        let err = assemble("jmp 9\nhalt").unwrap_err();
        assert!(matches!(err.kind, AsmErrorKind::TargetOutOfRange { .. }));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let p = assemble("; leading comment\n\n   halt ; trailing\n").unwrap();
        assert_eq!(p.instrs.len(), 1);
    }

    #[test]
    fn operand_count_checked() {
        let err = assemble("add r0, r1\nhalt").unwrap_err();
        assert_eq!(
            err.kind,
            AsmErrorKind::OperandCount {
                mnemonic: "add".into(),
                expected: 3,
                got: 2
            }
        );
    }

    #[test]
    fn label_cannot_shadow_register_syntax() {
        let err = assemble("r1:\nhalt").unwrap_err();
        assert!(matches!(err.kind, AsmErrorKind::BadLabel(_)));
    }
}
