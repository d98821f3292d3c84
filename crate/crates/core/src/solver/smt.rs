//! SMT-LIB 2 export in the quantifier-free bitvector logic.
//!
//! Each input byte becomes an 8-bit constant named `k!<index>`, widened to
//! 32 bits where used; each conjunct becomes one assertion. Output is
//! deterministic for identical queries.

use std::fmt::Write;

use crate::strategy::InversionQuery;
use crate::sym::SymExpr;
use crate::vm::{BinOp, Cond};

/// Renders `query` as an SMT-LIB 2 script (`QF_BV`), ending with
/// `(check-sat)` and `(get-model)`.
pub fn export_smt(query: &InversionQuery) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(set-logic QF_BV)");
    for var in query.vars() {
        let _ = writeln!(out, "(declare-const k!{var} (_ BitVec 8))");
    }
    for conjunct in query.exprs() {
        let _ = writeln!(out, "(assert {})", lower_bool(conjunct));
    }
    let _ = writeln!(out, "(check-sat)");
    let _ = writeln!(out, "(get-model)");
    out
}

fn lower_bool(expr: &SymExpr) -> String {
    match expr {
        SymExpr::Cmp(cond, lhs, rhs) => {
            // fold comparisons of two constants so degenerate queries read
            // as plain boolean literals
            if let (SymExpr::Const(a), SymExpr::Const(b)) = (&**lhs, &**rhs) {
                return if cond.eval(*a, *b) { "true".into() } else { "false".into() };
            }
            let l = lower_word(lhs);
            let r = lower_word(rhs);
            match cond {
                Cond::Eq => format!("(= {l} {r})"),
                Cond::Ne => format!("(not (= {l} {r}))"),
                Cond::Ult => format!("(bvult {l} {r})"),
                Cond::Ule => format!("(bvule {l} {r})"),
                Cond::Ugt => format!("(bvugt {l} {r})"),
                Cond::Uge => format!("(bvuge {l} {r})"),
                Cond::Slt => format!("(bvslt {l} {r})"),
                Cond::Sle => format!("(bvsle {l} {r})"),
                Cond::Sgt => format!("(bvsgt {l} {r})"),
                Cond::Sge => format!("(bvsge {l} {r})"),
            }
        }
        other => {
            // non-comparison conjuncts do not arise from recorded
            // branches; treat as "value is nonzero"
            format!("(not (= {} #x00000000))", lower_word_expr(other))
        }
    }
}

fn lower_word(expr: &SymExpr) -> String {
    lower_word_expr(expr)
}

fn lower_word_expr(expr: &SymExpr) -> String {
    match expr {
        SymExpr::InputByte(i) => format!("((_ zero_extend 24) k!{i})"),
        SymExpr::Const(v) => format!("#x{v:08x}"),
        SymExpr::Bin(op, lhs, rhs) => {
            let l = lower_word_expr(lhs);
            let r = lower_word_expr(rhs);
            match op {
                BinOp::Add => format!("(bvadd {l} {r})"),
                BinOp::Sub => format!("(bvsub {l} {r})"),
                BinOp::Mul => format!("(bvmul {l} {r})"),
                BinOp::And => format!("(bvand {l} {r})"),
                BinOp::Or => format!("(bvor {l} {r})"),
                BinOp::Xor => format!("(bvxor {l} {r})"),
                // the machine masks shift amounts modulo the word size
                BinOp::Shl => format!("(bvshl {l} (bvand {r} #x0000001f))"),
                BinOp::Shr => format!("(bvlshr {l} (bvand {r} #x0000001f))"),
            }
        }
        SymExpr::Cmp(..) => {
            unreachable!("boolean expression in word position")
        }
    }
}
