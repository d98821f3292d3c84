//! Concolic interpreter.
//!
//! Follows exactly the concrete path of a run while tracking, per
//! register, the symbolic expression it holds (if any). Every executed
//! conditional jump whose condition mentions at least one input byte is
//! recorded as a [`BranchConstraint`], oriented so that its expression is
//! true on the run. Call/return instructions maintain the call-stack
//! snapshot attached to each constraint.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::vm::exec::FaultKind;
use crate::vm::{Addr, Instr, Program, Termination, VmError, NUM_REGS};

use super::expr::SymExpr;

/// One call-stack frame. The frame's depth is its position in the
/// snapshot (outermost first).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    /// Address of the `call` instruction that created the frame. The root
    /// frame uses the program entry.
    pub call_site: Addr,
    /// Entry address of the callee.
    pub callee_entry: Addr,
}

/// Call stack at a program point, outermost frame first. The root frame
/// for `main` is always present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallStackSnapshot {
    pub frames: Vec<Frame>,
}

impl CallStackSnapshot {
    pub fn root(entry: Addr) -> CallStackSnapshot {
        CallStackSnapshot {
            frames: vec![Frame {
                call_site: entry,
                callee_entry: entry,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Prefix relation by element-wise call-site equality from index 0.
    /// A snapshot is a prefix of itself.
    pub fn is_prefix_of(&self, other: &CallStackSnapshot) -> bool {
        self.len() <= other.len()
            && self
                .frames
                .iter()
                .zip(&other.frames)
                .all(|(a, b)| a.call_site == b.call_site)
    }

    /// Call sites, outermost first.
    pub fn call_sites(&self) -> impl Iterator<Item = Addr> + '_ {
        self.frames.iter().map(|f| f.call_site)
    }
}

/// One recorded symbolic branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchConstraint {
    /// The branch condition as satisfied on the run (the taken direction
    /// is folded in, so this evaluates to true under the seed).
    pub expr: Arc<SymExpr>,
    /// Address of the conditional jump.
    pub src: Addr,
    /// Taken-target address of the jump.
    pub dst: Addr,
    /// Direction executed on the run.
    pub taken: bool,
    /// Call stack at `src`.
    pub stack: CallStackSnapshot,
    /// Whether the branch scope `(src, dst)` contains a control transfer
    /// instruction. Always false for backward branches (`dst <= src`).
    pub has_cti: bool,
    /// Position in the path predicate.
    pub seq: usize,
    /// Which dynamic execution of `src` this was (0-based, counting every
    /// execution of the site, symbolic or not).
    pub occurrence: u32,
}

impl BranchConstraint {
    /// Whether the jump is forward (`src < dst`), i.e. has a branch scope.
    pub fn is_forward(&self) -> bool {
        self.src < self.dst
    }
}

/// The ordered branch constraints of one concolic run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPredicate {
    pub constraints: Vec<BranchConstraint>,
    /// The concrete input of the run; a model of its own predicate.
    pub seed: Vec<u8>,
    /// How the underlying concrete run stopped.
    pub terminated: Termination,
}

impl PathPredicate {
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Line-oriented dump, one constraint per line:
    /// `seq; src; dst; taken; has_cti; stack=[a0,a1,...]; expr=<prefix>`
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for c in &self.constraints {
            let stack: Vec<String> = c.stack.call_sites().map(|a| a.to_string()).collect();
            let _ = writeln!(
                out,
                "{}; {}; {}; {}; {}; stack=[{}]; expr={}",
                c.seq,
                c.src,
                c.dst,
                c.taken,
                c.has_cti,
                stack.join(","),
                c.expr
            );
        }
        out
    }
}

/// Scans the branch scope `(src, dst)` (exclusive on both ends) for a
/// control transfer instruction: any `ret`, or a jump — conditional or
/// not — whose target lies beyond the scope end (`target > dst`).
/// Backward jump targets never qualify, and neither does `target == dst`,
/// which is an ordinary scope exit.
pub fn scan_cti(program: &Program, src: Addr, dst: Addr) -> bool {
    debug_assert!(src < dst, "scan_cti expects a forward branch");
    (src + 1..dst).any(|addr| match program.instr(addr) {
        Some(Instr::Ret) => true,
        Some(Instr::Jmp { target }) | Some(Instr::Jcc { target, .. }) => *target > dst,
        _ => false,
    })
}

/// Runs `program` on `seed`, recording a [`BranchConstraint`] for every
/// conditional jump whose condition involves input bytes. A run truncated
/// by the step limit or a fault still returns the predicate collected so
/// far.
pub fn run_concolic(
    program: &Program,
    seed: &[u8],
    step_limit: u64,
) -> Result<PathPredicate, VmError> {
    if seed.len() != program.input_len {
        return Err(VmError::InputLength {
            expected: program.input_len,
            got: seed.len(),
        });
    }

    let mut regs = [0u32; NUM_REGS];
    let mut shadows: [Option<Arc<SymExpr>>; NUM_REGS] = Default::default();
    let mut call_stack: Vec<Addr> = Vec::new();
    let mut frames = CallStackSnapshot::root(program.entry);
    let mut occurrences: HashMap<Addr, u32> = HashMap::new();
    let mut constraints: Vec<BranchConstraint> = Vec::new();
    let mut pc = program.entry;
    let mut steps = 0u64;

    let terminated = loop {
        if steps >= step_limit {
            break Termination::StepLimit;
        }
        let Some(instr) = program.instr(pc) else {
            break Termination::Fault(FaultKind::PcOutOfBounds);
        };
        steps += 1;

        pc = match *instr {
            Instr::Input { dst, byte } => {
                regs[dst.index()] = u32::from(seed[byte as usize]);
                shadows[dst.index()] = Some(SymExpr::input(byte));
                pc + 1
            }
            Instr::Const { dst, imm } => {
                regs[dst.index()] = imm;
                shadows[dst.index()] = None;
                pc + 1
            }
            Instr::Mov { dst, src } => {
                regs[dst.index()] = regs[src.index()];
                shadows[dst.index()] = shadows[src.index()].clone();
                pc + 1
            }
            Instr::Bin { op, dst, lhs, rhs } => {
                let (li, ri) = (lhs.index(), rhs.index());
                // exact tracking: a result is symbolic iff an operand is;
                // the concrete side becomes a constant leaf
                shadows[dst.index()] = if shadows[li].is_none() && shadows[ri].is_none() {
                    None
                } else {
                    let l = shadows[li]
                        .clone()
                        .unwrap_or_else(|| SymExpr::constant(regs[li]));
                    let r = shadows[ri]
                        .clone()
                        .unwrap_or_else(|| SymExpr::constant(regs[ri]));
                    Some(SymExpr::bin(op, l, r))
                };
                regs[dst.index()] = op.eval(regs[li], regs[ri]);
                pc + 1
            }
            Instr::Jcc { cond, lhs, rhs, target } => {
                let (li, ri) = (lhs.index(), rhs.index());
                let occurrence = occurrences.entry(pc).or_insert(0);
                let occ = *occurrence;
                *occurrence += 1;

                let taken = cond.eval(regs[li], regs[ri]);
                if shadows[li].is_some() || shadows[ri].is_some() {
                    let l = shadows[li]
                        .clone()
                        .unwrap_or_else(|| SymExpr::constant(regs[li]));
                    let r = shadows[ri]
                        .clone()
                        .unwrap_or_else(|| SymExpr::constant(regs[ri]));
                    let oriented = if taken {
                        SymExpr::cmp(cond, l, r)
                    } else {
                        SymExpr::cmp(cond.negate(), l, r)
                    };
                    let has_cti = pc < target && scan_cti(program, pc, target);
                    constraints.push(BranchConstraint {
                        expr: oriented,
                        src: pc,
                        dst: target,
                        taken,
                        stack: frames.clone(),
                        has_cti,
                        seq: constraints.len(),
                        occurrence: occ,
                    });
                }
                if taken {
                    target
                } else {
                    pc + 1
                }
            }
            Instr::Jmp { target } => target,
            Instr::Call { target } => {
                call_stack.push(pc + 1);
                frames.frames.push(Frame {
                    call_site: pc,
                    callee_entry: target,
                });
                target
            }
            Instr::Ret => match call_stack.pop() {
                Some(ra) => {
                    // drop frames deeper than the frame being returned
                    // into; in lockstep execution this pops exactly one
                    frames.frames.truncate(call_stack.len() + 1);
                    ra
                }
                None => break Termination::Fault(FaultKind::RetEmptyStack),
            },
            Instr::Halt => break Termination::Halt,
        };
    };

    Ok(PathPredicate {
        constraints,
        seed: seed.to_vec(),
        terminated,
    })
}
