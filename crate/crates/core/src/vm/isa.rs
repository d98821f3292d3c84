//! Instruction set of the analysis target.
//!
//! Addresses are instruction indices: the instruction written on listing
//! line `k` (counting instructions only) lives at address `k`. All code
//! location checks in the analysis — branch scopes, nesting intervals —
//! only need a total order on locations, which indices provide.

use std::fmt;

/// Code address: an index into [`Program::instrs`].
pub type Addr = u32;

/// Register file size. Register ids are validated at assembly time.
pub const NUM_REGS: usize = 16;

/// Default interpreter step limit; bounds runaway loops when validating
/// generated inputs.
pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;

/// A register id, guaranteed `< NUM_REGS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Reg(u8);

impl Reg {
    pub fn new(id: u8) -> Option<Reg> {
        (usize::from(id) < NUM_REGS).then_some(Reg(id))
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Three-operand ALU operations. All arithmetic is unsigned 32-bit with
/// wraparound; shift amounts are taken modulo 32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    And,
    Or,
    Xor,
    Shl,
    Shr,
}

impl BinOp {
    pub fn eval(self, lhs: u32, rhs: u32) -> u32 {
        match self {
            BinOp::Add => lhs.wrapping_add(rhs),
            BinOp::Sub => lhs.wrapping_sub(rhs),
            BinOp::Mul => lhs.wrapping_mul(rhs),
            BinOp::And => lhs & rhs,
            BinOp::Or => lhs | rhs,
            BinOp::Xor => lhs ^ rhs,
            BinOp::Shl => lhs.wrapping_shl(rhs),
            BinOp::Shr => lhs.wrapping_shr(rhs),
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            BinOp::Add => "add",
            BinOp::Sub => "sub",
            BinOp::Mul => "mul",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Xor => "xor",
            BinOp::Shl => "shl",
            BinOp::Shr => "shr",
        }
    }
}

/// Comparison predicates for conditional jumps. Relational comparisons
/// exist in unsigned (default) and signed (`s` suffix) forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cond {
    Eq,
    Ne,
    Ult,
    Ule,
    Ugt,
    Uge,
    Slt,
    Sle,
    Sgt,
    Sge,
}

impl Cond {
    pub fn eval(self, lhs: u32, rhs: u32) -> bool {
        match self {
            Cond::Eq => lhs == rhs,
            Cond::Ne => lhs != rhs,
            Cond::Ult => lhs < rhs,
            Cond::Ule => lhs <= rhs,
            Cond::Ugt => lhs > rhs,
            Cond::Uge => lhs >= rhs,
            Cond::Slt => (lhs as i32) < (rhs as i32),
            Cond::Sle => (lhs as i32) <= (rhs as i32),
            Cond::Sgt => (lhs as i32) > (rhs as i32),
            Cond::Sge => (lhs as i32) >= (rhs as i32),
        }
    }

    /// The complementary condition: `negate(c).eval(a, b) == !c.eval(a, b)`.
    pub fn negate(self) -> Cond {
        match self {
            Cond::Eq => Cond::Ne,
            Cond::Ne => Cond::Eq,
            Cond::Ult => Cond::Uge,
            Cond::Ule => Cond::Ugt,
            Cond::Ugt => Cond::Ule,
            Cond::Uge => Cond::Ult,
            Cond::Slt => Cond::Sge,
            Cond::Sle => Cond::Sgt,
            Cond::Sgt => Cond::Sle,
            Cond::Sge => Cond::Slt,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Cond::Eq => "jeq",
            Cond::Ne => "jne",
            Cond::Ult => "jlt",
            Cond::Ule => "jle",
            Cond::Ugt => "jgt",
            Cond::Uge => "jge",
            Cond::Slt => "jlts",
            Cond::Sle => "jles",
            Cond::Sgt => "jgts",
            Cond::Sge => "jges",
        }
    }

    /// Name used in symbolic expression dumps and SMT export.
    pub fn op_name(self) -> &'static str {
        match self {
            Cond::Eq => "eq",
            Cond::Ne => "ne",
            Cond::Ult => "ult",
            Cond::Ule => "ule",
            Cond::Ugt => "ugt",
            Cond::Uge => "uge",
            Cond::Slt => "slt",
            Cond::Sle => "sle",
            Cond::Sgt => "sgt",
            Cond::Sge => "sge",
        }
    }
}

/// One instruction. `Input` zero-extends a seed byte into a register;
/// `Jcc`'s target is the taken destination; `Call` pushes the address of
/// the next instruction as the return address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instr {
    Input { dst: Reg, byte: u32 },
    Const { dst: Reg, imm: u32 },
    Mov { dst: Reg, src: Reg },
    Bin { op: BinOp, dst: Reg, lhs: Reg, rhs: Reg },
    Jcc { cond: Cond, lhs: Reg, rhs: Reg, target: Addr },
    Jmp { target: Addr },
    Call { target: Addr },
    Ret,
    Halt,
}

impl Instr {
    /// Static jump target, if any (`Jcc`, `Jmp`, `Call`).
    pub fn target(&self) -> Option<Addr> {
        match *self {
            Instr::Jcc { target, .. } | Instr::Jmp { target } | Instr::Call { target } => {
                Some(target)
            }
            _ => None,
        }
    }
}

/// An assembled program. Addresses are dense `0..instrs.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub instrs: Vec<Instr>,
    /// Declared seed-buffer length in bytes (`.input N`).
    pub input_len: usize,
    /// Address of the first instruction of `main`.
    pub entry: Addr,
}

impl Program {
    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn instr(&self, addr: Addr) -> Option<&Instr> {
        self.instrs.get(addr as usize)
    }

    /// Function entries: the program entry plus every `call` target,
    /// sorted and deduplicated.
    pub fn function_entries(&self) -> Vec<Addr> {
        let mut entries = vec![self.entry];
        for instr in &self.instrs {
            if let Instr::Call { target } = *instr {
                entries.push(target);
            }
        }
        entries.sort_unstable();
        entries.dedup();
        entries
    }

    /// Addresses of all conditional jumps.
    pub fn branch_sites(&self) -> Vec<Addr> {
        self.instrs
            .iter()
            .enumerate()
            .filter(|(_, i)| matches!(i, Instr::Jcc { .. }))
            .map(|(a, _)| a as Addr)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reg_bounds() {
        assert!(Reg::new(0).is_some());
        assert!(Reg::new(15).is_some());
        assert!(Reg::new(16).is_none());
    }

    #[test]
    fn cond_negate_is_complement() {
        let pairs = [
            (0u32, 0u32),
            (1, 2),
            (2, 1),
            (0x8000_0000, 1),
            (1, 0x8000_0000),
            (u32::MAX, 0),
        ];
        for cond in [
            Cond::Eq,
            Cond::Ne,
            Cond::Ult,
            Cond::Ule,
            Cond::Ugt,
            Cond::Uge,
            Cond::Slt,
            Cond::Sle,
            Cond::Sgt,
            Cond::Sge,
        ] {
            for (a, b) in pairs {
                assert_eq!(cond.negate().eval(a, b), !cond.eval(a, b), "{cond:?} {a} {b}");
            }
        }
    }

    #[test]
    fn signed_vs_unsigned_comparison() {
        // 0x8000_0000 is negative as i32
        assert!(Cond::Ugt.eval(0x8000_0000, 1));
        assert!(!Cond::Sgt.eval(0x8000_0000, 1));
        assert!(Cond::Slt.eval(0x8000_0000, 1));
    }

    #[test]
    fn shift_amount_wraps_mod_32() {
        assert_eq!(BinOp::Shl.eval(1, 32), 1);
        assert_eq!(BinOp::Shl.eval(1, 33), 2);
        assert_eq!(BinOp::Shr.eval(0x8000_0000, 63), 1);
    }
}
