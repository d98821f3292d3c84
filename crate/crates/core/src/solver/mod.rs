//! Query solving.
//!
//! The exact solver enumerates every byte assignment over the query's
//! symbolic bytes, so its SAT/UNSAT verdicts are ground truth within the
//! width budget. Queries can also be exported as SMT-LIB text and handed
//! to an external solver process.

mod external;
mod smt;

pub use external::{ExternalSolver, ExternalSolverError};
pub use smt::export_smt;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use crate::strategy::InversionQuery;

/// Solver verdict status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Timeout,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
            Status::Timeout => "TIMEOUT",
        }
    }
}

/// Outcome of one solver call. `model` is present iff `status` is SAT and
/// maps exactly the query's symbolic bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub model: Option<BTreeMap<u32, u8>>,
    pub candidates_tried: u64,
    pub elapsed: Duration,
}

/// Budget for one exact solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveBudget {
    /// Maximum number of symbolic bytes (2^(8n) candidates).
    pub max_bytes: usize,
    pub time_limit: Duration,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget {
            max_bytes: 3,
            time_limit: Duration::from_secs(10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("query too wide for exact solving: {vars} symbolic bytes exceeds the budget of {max_bytes}")]
    QueryTooWide { vars: usize, max_bytes: usize },
}

/// Candidates between cooperative time-limit checks.
const TIMEOUT_CHECK_INTERVAL: u64 = 4096;

/// Decides satisfiability of `query` by exhaustive enumeration.
///
/// Assignments are tried in lexicographic order over the query's symbolic
/// bytes (ascending index, leftmost byte slowest), starting from the
/// seed's values and wrapping around, so the seed itself is the first
/// candidate and all SAT models are reproducible byte for byte. Bytes
/// outside the query keep their seed values.
pub fn solve(
    query: &InversionQuery,
    seed: &[u8],
    budget: &SolveBudget,
) -> Result<Verdict, SolveError> {
    let vars: Vec<u32> = query.vars().into_iter().collect();
    if vars.len() > budget.max_bytes {
        return Err(SolveError::QueryTooWide {
            vars: vars.len(),
            max_bytes: budget.max_bytes,
        });
    }
    debug_assert!(vars.iter().all(|&v| (v as usize) < seed.len()));

    let start = Instant::now();
    let conjuncts: Vec<&crate::sym::SymExpr> = query.exprs().map(|e| &**e).collect();
    let mut scratch = seed.to_vec();
    let total: u64 = 1u64 << (8 * vars.len() as u32);
    let mut tried = 0u64;

    for candidate in 0..total {
        if candidate % TIMEOUT_CHECK_INTERVAL == 0 && start.elapsed() >= budget.time_limit {
            return Ok(Verdict {
                status: Status::Timeout,
                model: None,
                candidates_tried: tried,
                elapsed: start.elapsed(),
            });
        }
        // byte j of the candidate index is the wrapping offset for the
        // j-th variable, leftmost slowest
        for (j, &var) in vars.iter().enumerate() {
            let shift = 8 * (vars.len() - 1 - j) as u32;
            let offset = (candidate >> shift) as u8;
            scratch[var as usize] = seed[var as usize].wrapping_add(offset);
        }
        tried += 1;
        if conjuncts.iter().all(|e| e.eval_bool(&scratch)) {
            let model: BTreeMap<u32, u8> =
                vars.iter().map(|&v| (v, scratch[v as usize])).collect();
            debug_assert!(query
                .exprs()
                .all(|e| e.eval_bool(&merge_model(&model, seed))));
            return Ok(Verdict {
                status: Status::Sat,
                model: Some(model),
                candidates_tried: tried,
                elapsed: start.elapsed(),
            });
        }
    }

    Ok(Verdict {
        status: Status::Unsat,
        model: None,
        candidates_tried: tried,
        elapsed: start.elapsed(),
    })
}

/// Completes a partial model into a full input: bytes the model does not
/// mention keep their seed values.
pub fn merge_model(model: &BTreeMap<u32, u8>, seed: &[u8]) -> Vec<u8> {
    let mut out = seed.to_vec();
    for (&index, &value) in model {
        out[index as usize] = value;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{build_optimistic, build_strong_optimistic, slice};
    use crate::sym::run_concolic;
    use crate::vm::{assemble, DEFAULT_STEP_LIMIT};

    const LISTING1_SEED: [u8; 4] = [0x33, 0x11, 0x20, 0x10];

    fn listing1_predicate() -> crate::sym::PathPredicate {
        let path = format!("{}/../../corpus/listing1.asm", env!("CARGO_MANIFEST_DIR"));
        let p = assemble(&std::fs::read_to_string(path).unwrap()).unwrap();
        run_concolic(&p, &LISTING1_SEED, DEFAULT_STEP_LIMIT).unwrap()
    }

    #[test]
    fn strong_optimistic_query_has_unique_model() {
        let pred = listing1_predicate();
        let sliced = slice(&pred, 3);
        let q = build_strong_optimistic(&pred, &sliced, 3);
        let v = solve(&q, &LISTING1_SEED, &SolveBudget::default()).unwrap();
        assert_eq!(v.status, Status::Sat);
        let model = v.model.unwrap();
        let expected: BTreeMap<u32, u8> = [(0, 0x35), (1, 0x37), (3, 0x36)].into();
        assert_eq!(model, expected);
    }

    #[test]
    fn sliced_query_is_unsat() {
        let pred = listing1_predicate();
        let q = slice(&pred, 3);
        let v = solve(&q, &LISTING1_SEED, &SolveBudget::default()).unwrap();
        assert_eq!(v.status, Status::Unsat);
        assert_eq!(v.candidates_tried, 1 << 24);
    }

    #[test]
    fn optimistic_query_is_sat() {
        let pred = listing1_predicate();
        let q = build_optimistic(&pred, 3);
        let v = solve(&q, &LISTING1_SEED, &SolveBudget::default()).unwrap();
        assert_eq!(v.status, Status::Sat);
        let model = v.model.unwrap();
        assert_eq!(model, [(0, 0x35), (3, 0x36)].into());
    }

    #[test]
    fn tautology_returns_seed_values() {
        use crate::strategy::{InversionQuery, QueryConjunct, QueryKind};
        use crate::sym::SymExpr;
        use crate::vm::Cond;
        let q = InversionQuery {
            kind: QueryKind::Optimistic,
            target_seq: 0,
            conjuncts: vec![QueryConjunct {
                source_seq: None,
                expr: SymExpr::cmp(Cond::Eq, SymExpr::input(0), SymExpr::input(0)),
            }],
        };
        let v = solve(&q, &[0x7f], &SolveBudget::default()).unwrap();
        assert_eq!(v.status, Status::Sat);
        assert_eq!(v.model.unwrap(), [(0, 0x7f)].into());
        assert_eq!(v.candidates_tried, 1);
    }

    #[test]
    fn enumeration_ascends_from_seed_with_wraparound() {
        use crate::strategy::{InversionQuery, QueryConjunct, QueryKind};
        use crate::sym::SymExpr;
        use crate::vm::Cond;
        // first satisfying value above the seed
        let ge = InversionQuery {
            kind: QueryKind::Optimistic,
            target_seq: 0,
            conjuncts: vec![QueryConjunct {
                source_seq: None,
                expr: SymExpr::cmp(Cond::Uge, SymExpr::input(0), SymExpr::constant(0x30)),
            }],
        };
        let v = solve(&ge, &[0x20], &SolveBudget::default()).unwrap();
        assert_eq!(v.model.unwrap(), [(0, 0x30)].into());

        // wraparound: from seed 2 upward, the first value <= 1 is 0
        let le = InversionQuery {
            kind: QueryKind::Optimistic,
            target_seq: 0,
            conjuncts: vec![QueryConjunct {
                source_seq: None,
                expr: SymExpr::cmp(Cond::Ule, SymExpr::input(0), SymExpr::constant(1)),
            }],
        };
        let v = solve(&le, &[0x02], &SolveBudget::default()).unwrap();
        assert_eq!(v.model.unwrap(), [(0, 0)].into());
    }

    #[test]
    fn too_wide_query_is_rejected() {
        let pred = listing1_predicate();
        let q = slice(&pred, 3);
        let err = solve(
            &q,
            &LISTING1_SEED,
            &SolveBudget {
                max_bytes: 2,
                time_limit: Duration::from_secs(10),
            },
        )
        .unwrap_err();
        assert_eq!(err, SolveError::QueryTooWide { vars: 3, max_bytes: 2 });
    }

    #[test]
    fn zero_time_limit_times_out() {
        let pred = listing1_predicate();
        let q = slice(&pred, 3);
        let v = solve(
            &q,
            &LISTING1_SEED,
            &SolveBudget {
                max_bytes: 3,
                time_limit: Duration::ZERO,
            },
        )
        .unwrap();
        assert_eq!(v.status, Status::Timeout);
        assert!(v.model.is_none());
    }

    #[test]
    fn merge_model_substitutes_positionally() {
        let seed = [0x33u8, 0x11, 0x20, 0x10];
        assert_eq!(merge_model(&BTreeMap::new(), &seed), seed.to_vec());
        let partial: BTreeMap<u32, u8> = [(0, 0x35), (1, 0x37), (3, 0x36)].into();
        assert_eq!(merge_model(&partial, &seed), vec![0x35, 0x37, 0x20, 0x36]);
        let full: BTreeMap<u32, u8> = [(0, 1), (1, 2), (2, 3), (3, 4)].into();
        assert_eq!(merge_model(&full, &seed), vec![1, 2, 3, 4]);
    }

    #[test]
    fn sat_models_satisfy_every_conjunct() {
        let pred = listing1_predicate();
        for target in 0..pred.len() {
            for q in [slice(&pred, target), build_optimistic(&pred, target)] {
                let v = solve(&q, &LISTING1_SEED, &SolveBudget::default()).unwrap();
                if v.status == Status::Sat {
                    let input = merge_model(v.model.as_ref().unwrap(), &LISTING1_SEED);
                    assert!(q.exprs().all(|e| e.eval_bool(&input)));
                }
            }
        }
    }
}
