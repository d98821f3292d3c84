//! The register machine: ISA definitions, assembler, disassembler, and the
//! concrete interpreter with edge/branch tracing.

pub mod asm;
pub mod disasm;
pub mod exec;
pub mod isa;

pub use asm::{assemble, AsmError};
pub use disasm::disassemble;
pub use exec::{edge_coverage, run_concrete, BranchEvent, ExecTrace, Termination, VmError};
pub use isa::{Addr, BinOp, Cond, Instr, Program, Reg, DEFAULT_STEP_LIMIT, NUM_REGS};
