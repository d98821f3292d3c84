//! Shared test support: a deterministic random-program generator, an
//! independent full-enumeration satisfiability oracle, and a solve
//! wrapper that re-validates every SAT model.

// each integration-test target compiles its own copy; not every target
// uses every helper
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use concolab::solver::{merge_model, solve, SolveBudget, Status, Verdict};
use concolab::strategy::InversionQuery;
use concolab::sym::SymExpr;
use concolab::vm::{assemble, BinOp, Cond, Program};

use rand::rngs::StdRng;
use rand::Rng;

pub struct TestProgram {
    pub source: String,
    pub program: Program,
    pub seed: Vec<u8>,
}

fn random_cond(rng: &mut StdRng) -> &'static str {
    const CONDS: [&str; 10] = [
        "jeq", "jne", "jlt", "jle", "jgt", "jge", "jlts", "jles", "jgts", "jges",
    ];
    CONDS[rng.random_range(0..CONDS.len())]
}

fn random_binop(rng: &mut StdRng) -> &'static str {
    const OPS: [&str; 8] = ["add", "sub", "mul", "and", "or", "xor", "shl", "shr"];
    OPS[rng.random_range(0..OPS.len())]
}

/// Generates a loop-free program: a chain of guarded segments in `main`,
/// optionally a helper function called from guard bodies, occasional far
/// jumps past the current guard scope, and occasional concrete-only
/// guards. All conditional jumps are forward, so every run terminates.
pub fn generate(rng: &mut StdRng, input_len: usize) -> TestProgram {
    assert!((1..=3).contains(&input_len));
    let n_segments = if input_len >= 3 {
        rng.random_range(2..=3)
    } else {
        rng.random_range(2..=4)
    };
    let with_helper = rng.random_bool(0.5);

    let mut src = format!(".input {input_len}\n");
    if with_helper {
        let idx = rng.random_range(0..input_len);
        let val: u8 = rng.random();
        let cond = random_cond(rng);
        src.push_str(&format!(
            "helper:\n    input r6, {idx}\n    const r7, {val}\n    {cond} r6, r7, hret\n    const r8, 1\nhret:\n    ret\n"
        ));
    }
    src.push_str("main:\n");
    for i in 0..n_segments {
        match rng.random_range(0..10) {
            0..=3 => {
                // input byte vs constant
                let idx = rng.random_range(0..input_len);
                let val: u8 = rng.random();
                src.push_str(&format!("    input r0, {idx}\n    const r1, {val}\n"));
            }
            4..=5 => {
                // input byte vs input byte
                let a = rng.random_range(0..input_len);
                let b = rng.random_range(0..input_len);
                src.push_str(&format!("    input r0, {a}\n    input r1, {b}\n"));
            }
            6..=8 => {
                // arithmetic combination vs constant
                let a = rng.random_range(0..input_len);
                let op = random_binop(rng);
                if rng.random_bool(0.5) {
                    let b = rng.random_range(0..input_len);
                    src.push_str(&format!(
                        "    input r2, {a}\n    input r3, {b}\n    {op} r0, r2, r3\n"
                    ));
                } else {
                    let v: u8 = rng.random();
                    src.push_str(&format!(
                        "    input r2, {a}\n    const r3, {v}\n    {op} r0, r2, r3\n"
                    ));
                }
                let val: u8 = rng.random();
                src.push_str(&format!("    const r1, {val}\n"));
            }
            _ => {
                // concrete-only guard, never recorded symbolically
                let v1: u8 = rng.random();
                let v2: u8 = rng.random();
                src.push_str(&format!("    const r0, {v1}\n    const r1, {v2}\n"));
            }
        }
        let cond = random_cond(rng);
        src.push_str(&format!("    {cond} r0, r1, seg{i}\n"));

        let body = rng.random_range(0..10);
        if body < 3 && i + 1 < n_segments {
            // far jump beyond this guard's scope
            src.push_str("    jmp done\n");
        } else if body < 6 && with_helper {
            src.push_str("    call helper\n");
        } else {
            src.push_str(&format!("    const r4, {}\n", i + 1));
        }
        src.push_str(&format!("seg{i}:\n"));
    }
    src.push_str("done:\n    halt\n");

    let program = assemble(&src).unwrap_or_else(|e| panic!("generated source invalid: {e}\n{src}"));
    let seed: Vec<u8> = (0..input_len).map(|_| rng.random()).collect();
    TestProgram {
        source: src,
        program,
        seed,
    }
}

/// Independent expression evaluator: a from-scratch reimplementation of
/// the word semantics used only by tests.
pub fn independent_eval(expr: &SymExpr, input: &[u8]) -> u32 {
    match expr {
        SymExpr::InputByte(i) => u32::from(input[*i as usize]),
        SymExpr::Const(v) => *v,
        SymExpr::Bin(op, lhs, rhs) => {
            let a = independent_eval(lhs, input);
            let b = independent_eval(rhs, input);
            match op {
                BinOp::Add => a.wrapping_add(b),
                BinOp::Sub => a.wrapping_sub(b),
                BinOp::Mul => a.wrapping_mul(b),
                BinOp::And => a & b,
                BinOp::Or => a | b,
                BinOp::Xor => a ^ b,
                BinOp::Shl => a << (b % 32),
                BinOp::Shr => a >> (b % 32),
            }
        }
        SymExpr::Cmp(cond, lhs, rhs) => {
            let a = independent_eval(lhs, input);
            let b = independent_eval(rhs, input);
            let holds = match cond {
                Cond::Eq => a == b,
                Cond::Ne => a != b,
                Cond::Ult => a < b,
                Cond::Ule => a <= b,
                Cond::Ugt => a > b,
                Cond::Uge => a >= b,
                Cond::Slt => (a as i32) < (b as i32),
                Cond::Sle => (a as i32) <= (b as i32),
                Cond::Sgt => (a as i32) > (b as i32),
                Cond::Sge => (a as i32) >= (b as i32),
            };
            u32::from(holds)
        }
    }
}

fn next_input(input: &mut [u8]) -> bool {
    for byte in input.iter_mut().rev() {
        *byte = byte.wrapping_add(1);
        if *byte != 0 {
            return true;
        }
    }
    false
}

/// Ground-truth satisfiability: enumerate every assignment of the whole
/// input buffer, not just the query's bytes.
pub fn oracle_sat(conjuncts: &[Arc<SymExpr>], input_len: usize) -> bool {
    let mut input = vec![0u8; input_len];
    loop {
        if conjuncts
            .iter()
            .all(|e| independent_eval(e, &input) != 0)
        {
            return true;
        }
        if !next_input(&mut input) {
            return false;
        }
    }
}

/// Solves and, on SAT, asserts the merged input satisfies every conjunct
/// and the model's domain is exactly the query's variable set.
pub fn checked_solve(query: &InversionQuery, seed: &[u8], budget: &SolveBudget) -> Verdict {
    let verdict = solve(query, seed, budget).expect("query exceeds the exact-solver budget");
    if verdict.status == Status::Sat {
        let model = verdict.model.as_ref().expect("SAT verdict carries a model");
        let input = merge_model(model, seed);
        assert!(
            query.exprs().all(|e| e.eval_bool(&input)),
            "SAT model does not satisfy the query"
        );
        let domain: BTreeSet<u32> = model.keys().copied().collect();
        assert_eq!(domain, query.vars(), "model domain != query variables");
    }
    verdict
}
