//! Symbolic expressions over input bytes.
//!
//! Every expression is a finite tree whose leaves are either input bytes
//! (zero-extended to 32 bits) or 32-bit constants. Comparison nodes are
//! boolean (width 1) and only appear at the top of branch conditions;
//! everything else is 32 bits wide, mirroring the machine's semantics.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::vm::{BinOp, Cond};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymExpr {
    /// The input byte at the given index, zero-extended.
    InputByte(u32),
    Const(u32),
    Bin(BinOp, Arc<SymExpr>, Arc<SymExpr>),
    Cmp(Cond, Arc<SymExpr>, Arc<SymExpr>),
}

impl SymExpr {
    pub fn input(index: u32) -> Arc<SymExpr> {
        Arc::new(SymExpr::InputByte(index))
    }

    pub fn constant(value: u32) -> Arc<SymExpr> {
        Arc::new(SymExpr::Const(value))
    }

    pub fn bin(op: BinOp, lhs: Arc<SymExpr>, rhs: Arc<SymExpr>) -> Arc<SymExpr> {
        debug_assert!(lhs.width() == 32 && rhs.width() == 32);
        Arc::new(SymExpr::Bin(op, lhs, rhs))
    }

    pub fn cmp(cond: Cond, lhs: Arc<SymExpr>, rhs: Arc<SymExpr>) -> Arc<SymExpr> {
        debug_assert!(lhs.width() == 32 && rhs.width() == 32);
        Arc::new(SymExpr::Cmp(cond, lhs, rhs))
    }

    /// Width in bits: 1 for comparisons, 32 otherwise.
    pub fn width(&self) -> u32 {
        match self {
            SymExpr::Cmp(..) => 1,
            _ => 32,
        }
    }

    pub fn is_bool(&self) -> bool {
        self.width() == 1
    }

    /// Logical negation of a boolean expression, produced by flipping the
    /// comparison. Panics if the expression is not a comparison.
    pub fn negate(self: &Arc<SymExpr>) -> Arc<SymExpr> {
        match &**self {
            SymExpr::Cmp(cond, lhs, rhs) => {
                Arc::new(SymExpr::Cmp(cond.negate(), lhs.clone(), rhs.clone()))
            }
            other => panic!("negate called on non-boolean expression {other:?}"),
        }
    }

    /// Evaluates under a full input buffer. Comparisons yield 0 or 1.
    pub fn eval_u32(&self, input: &[u8]) -> u32 {
        match self {
            SymExpr::InputByte(i) => u32::from(input[*i as usize]),
            SymExpr::Const(v) => *v,
            SymExpr::Bin(op, lhs, rhs) => op.eval(lhs.eval_u32(input), rhs.eval_u32(input)),
            SymExpr::Cmp(cond, lhs, rhs) => {
                u32::from(cond.eval(lhs.eval_u32(input), rhs.eval_u32(input)))
            }
        }
    }

    pub fn eval_bool(&self, input: &[u8]) -> bool {
        self.eval_u32(input) != 0
    }

    /// The set of input-byte indices reachable in the tree.
    pub fn vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<u32>) {
        match self {
            SymExpr::InputByte(i) => {
                out.insert(*i);
            }
            SymExpr::Const(_) => {}
            SymExpr::Bin(_, lhs, rhs) | SymExpr::Cmp(_, lhs, rhs) => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }
}

impl fmt::Display for SymExpr {
    /// Prefix notation, e.g. `(eq (sub (input 1) (input 3)) (const 0x1))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymExpr::InputByte(i) => write!(f, "(input {i})"),
            SymExpr::Const(v) => write!(f, "(const {v:#x})"),
            SymExpr::Bin(op, lhs, rhs) => write!(f, "({} {lhs} {rhs})", op.mnemonic()),
            SymExpr::Cmp(cond, lhs, rhs) => write!(f, "({} {lhs} {rhs})", cond.op_name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vars_of_constant_is_empty() {
        assert!(SymExpr::constant(5).vars().is_empty());
    }

    #[test]
    fn vars_of_difference_comparison() {
        // (input 1) - (input 3) == 1
        let e = SymExpr::cmp(
            Cond::Eq,
            SymExpr::bin(BinOp::Sub, SymExpr::input(1), SymExpr::input(3)),
            SymExpr::constant(1),
        );
        assert_eq!(e.vars().into_iter().collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn vars_of_nested_compound() {
        // ((input 3) ^ 0x36) | ((input 0) ^ 0x35) != 0
        let e = SymExpr::cmp(
            Cond::Ne,
            SymExpr::bin(
                BinOp::Or,
                SymExpr::bin(BinOp::Xor, SymExpr::input(3), SymExpr::constant(0x36)),
                SymExpr::bin(BinOp::Xor, SymExpr::input(0), SymExpr::constant(0x35)),
            ),
            SymExpr::constant(0),
        );
        assert_eq!(e.vars().into_iter().collect::<Vec<_>>(), vec![0, 3]);
    }

    #[test]
    fn negate_flips_evaluation() {
        let e = SymExpr::cmp(Cond::Ult, SymExpr::input(0), SymExpr::constant(0x30));
        let n = e.negate();
        let input = [0x20u8];
        assert!(e.eval_bool(&input));
        assert!(!n.eval_bool(&input));
        assert_eq!(n.negate(), e);
    }

    #[test]
    fn display_prefix_notation() {
        let e = SymExpr::cmp(
            Cond::Eq,
            SymExpr::bin(BinOp::Sub, SymExpr::input(1), SymExpr::input(3)),
            SymExpr::constant(1),
        );
        assert_eq!(e.to_string(), "(eq (sub (input 1) (input 3)) (const 0x1))");
    }

    #[test]
    fn width_of_comparison_is_one_bit() {
        let e = SymExpr::cmp(Cond::Eq, SymExpr::input(0), SymExpr::constant(1));
        assert_eq!(e.width(), 1);
        assert_eq!(SymExpr::input(0).width(), 32);
    }
}
