//! Concrete interpreter.
//!
//! Executes a [`Program`] on a fixed input buffer and records every
//! control-flow edge plus one event per executed conditional jump. Traces
//! are deterministic: identical (program, input, step limit) triples yield
//! identical traces.

use std::collections::{HashMap, HashSet};

use super::isa::{Addr, Instr, Program, NUM_REGS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VmError {
    #[error("input length {got} does not match declared input length {expected}")]
    InputLength { expected: usize, got: usize },
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The halt instruction was reached.
    Halt,
    /// The step limit expired first.
    StepLimit,
    /// `ret` on an empty call stack, or execution fell off the listing.
    Fault(FaultKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    RetEmptyStack,
    PcOutOfBounds,
}

/// One executed conditional jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchEvent {
    /// Address of the conditional jump.
    pub src: Addr,
    /// Whether the jump was taken.
    pub taken: bool,
    /// Per-site execution counter, starting at 0.
    pub occurrence: u32,
}

/// Full trace of one concrete run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecTrace {
    /// Executed (from, to) address pairs, in order.
    pub edges: Vec<(Addr, Addr)>,
    /// Executed conditional jumps, in order.
    pub branch_events: Vec<BranchEvent>,
    pub terminated: Termination,
    /// Instructions executed.
    pub steps: u64,
}

impl ExecTrace {
    /// The branch event at (src, occurrence), if that execution happened.
    pub fn branch_at(&self, src: Addr, occurrence: u32) -> Option<&BranchEvent> {
        self.branch_events
            .iter()
            .find(|e| e.src == src && e.occurrence == occurrence)
    }

    /// Whether the branch site was executed at all.
    pub fn reached_site(&self, src: Addr) -> bool {
        self.branch_events.iter().any(|e| e.src == src)
    }
}

/// Runs `program` on `input` for at most `step_limit` instructions.
pub fn run_concrete(
    program: &Program,
    input: &[u8],
    step_limit: u64,
) -> Result<ExecTrace, VmError> {
    if input.len() != program.input_len {
        return Err(VmError::InputLength {
            expected: program.input_len,
            got: input.len(),
        });
    }

    let mut regs = [0u32; NUM_REGS];
    let mut call_stack: Vec<Addr> = Vec::new();
    let mut pc = program.entry;
    let mut edges = Vec::new();
    let mut branch_events = Vec::new();
    let mut occurrences: HashMap<Addr, u32> = HashMap::new();
    let mut steps = 0u64;

    let terminated = loop {
        if steps >= step_limit {
            break Termination::StepLimit;
        }
        let Some(instr) = program.instr(pc) else {
            break Termination::Fault(FaultKind::PcOutOfBounds);
        };
        steps += 1;

        let next = match *instr {
            Instr::Input { dst, byte } => {
                regs[dst.index()] = u32::from(input[byte as usize]);
                pc + 1
            }
            Instr::Const { dst, imm } => {
                regs[dst.index()] = imm;
                pc + 1
            }
            Instr::Mov { dst, src } => {
                regs[dst.index()] = regs[src.index()];
                pc + 1
            }
            Instr::Bin { op, dst, lhs, rhs } => {
                regs[dst.index()] = op.eval(regs[lhs.index()], regs[rhs.index()]);
                pc + 1
            }
            Instr::Jcc { cond, lhs, rhs, target } => {
                let occurrence = occurrences.entry(pc).or_insert(0);
                let taken = cond.eval(regs[lhs.index()], regs[rhs.index()]);
                branch_events.push(BranchEvent {
                    src: pc,
                    taken,
                    occurrence: *occurrence,
                });
                *occurrence += 1;
                if taken {
                    target
                } else {
                    pc + 1
                }
            }
            Instr::Jmp { target } => target,
            Instr::Call { target } => {
                call_stack.push(pc + 1);
                target
            }
            Instr::Ret => match call_stack.pop() {
                Some(ra) => ra,
                None => break Termination::Fault(FaultKind::RetEmptyStack),
            },
            Instr::Halt => break Termination::Halt,
        };
        edges.push((pc, next));
        pc = next;
    };

    Ok(ExecTrace {
        edges,
        branch_events,
        terminated,
        steps,
    })
}

/// Number of unique edges executed across all runs of `corpus`. Runs that
/// fault or hit the step limit still contribute their partial edges.
pub fn edge_coverage<I, B>(program: &Program, corpus: I, step_limit: u64) -> Result<usize, VmError>
where
    I: IntoIterator<Item = B>,
    B: AsRef<[u8]>,
{
    let mut seen: HashSet<(Addr, Addr)> = HashSet::new();
    for input in corpus {
        let trace = run_concrete(program, input.as_ref(), step_limit)?;
        seen.extend(trace.edges.iter().copied());
    }
    Ok(seen.len())
}
