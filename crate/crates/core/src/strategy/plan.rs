//! Strategy sequencing.
//!
//! The decision flow for one target branch: a satisfiable sliced query is
//! saved directly and nothing else runs. Otherwise the optimistic query
//! is tried; if even that is unsatisfiable the target is hopeless (the
//! negated target alone already fails) and nothing is saved. On an
//! optimistic SAT the strong-optimistic predicate is built; when it
//! collapses to the optimistic one the solver is not queried twice,
//! otherwise it is queried and, on SAT, both candidate inputs are kept.

use crate::solver::Status;
use crate::sym::PathPredicate;

use super::{build_optimistic, build_strong_optimistic, slice, InversionQuery};

/// The next action for a target branch, given the verdicts so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategyPlan {
    /// Sliced query was SAT: save its test case and stop.
    SaveSliced,
    /// Sliced was UNSAT (or timed out): query the optimistic predicate.
    QueryOptimistic,
    /// Optimistic was not SAT: stop with nothing saved.
    Stop,
    /// Optimistic SAT and the strong-optimistic predicate matches it:
    /// save the optimistic test case, no second solver call.
    SaveOptimisticOnly,
    /// Optimistic SAT and the strong-optimistic predicate differs: query
    /// it; on SAT save both candidates, otherwise save the optimistic one.
    QueryStrongOptimistic(InversionQuery),
}

/// Encodes the flow above. `optimistic_verdict` is `None` while the
/// optimistic query has not been issued yet; `sliced_verdict` must be
/// known first. Timeouts count as not-SAT on both decision points.
pub fn plan_queries(
    predicate: &PathPredicate,
    target_seq: usize,
    sliced_verdict: Status,
    optimistic_verdict: Option<Status>,
) -> StrategyPlan {
    match sliced_verdict {
        Status::Sat => StrategyPlan::SaveSliced,
        Status::Unsat | Status::Timeout => match optimistic_verdict {
            None => StrategyPlan::QueryOptimistic,
            Some(Status::Sat) => {
                let sliced = slice(predicate, target_seq);
                let sopt = build_strong_optimistic(predicate, &sliced, target_seq);
                if sopt.same_conjuncts(&build_optimistic(predicate, target_seq)) {
                    StrategyPlan::SaveOptimisticOnly
                } else {
                    StrategyPlan::QueryStrongOptimistic(sopt)
                }
            }
            Some(Status::Unsat) | Some(Status::Timeout) => StrategyPlan::Stop,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::corpus_predicate;
    use super::*;

    #[test]
    fn sliced_sat_saves_and_stops() {
        let (_, pred) = corpus_predicate("listing1.asm", &[0x33, 0x11, 0x20, 0x10]);
        assert_eq!(
            plan_queries(&pred, 0, Status::Sat, None),
            StrategyPlan::SaveSliced
        );
        // the optimistic verdict is irrelevant once sliced is SAT
        assert_eq!(
            plan_queries(&pred, 0, Status::Sat, Some(Status::Sat)),
            StrategyPlan::SaveSliced
        );
    }

    #[test]
    fn sliced_unsat_moves_to_optimistic_then_stops_on_unsat() {
        let (_, pred) = corpus_predicate("listing1.asm", &[0x33, 0x11, 0x20, 0x10]);
        assert_eq!(
            plan_queries(&pred, 3, Status::Unsat, None),
            StrategyPlan::QueryOptimistic
        );
        assert_eq!(
            plan_queries(&pred, 3, Status::Unsat, Some(Status::Unsat)),
            StrategyPlan::Stop
        );
        // a sliced timeout is treated like UNSAT
        assert_eq!(
            plan_queries(&pred, 3, Status::Timeout, None),
            StrategyPlan::QueryOptimistic
        );
    }

    #[test]
    fn optimistic_sat_builds_strong_optimistic() {
        let (_, pred) = corpus_predicate("listing1.asm", &[0x33, 0x11, 0x20, 0x10]);
        match plan_queries(&pred, 3, Status::Unsat, Some(Status::Sat)) {
            StrategyPlan::QueryStrongOptimistic(q) => {
                assert_eq!(q.kept_seqs(), vec![2]);
            }
            other => panic!("expected a strong-optimistic query, got {other:?}"),
        }
    }

    #[test]
    fn matching_predicates_collapse_to_one_query() {
        let (_, pred) = corpus_predicate("listing1.asm", &[0x33, 0x11, 0x20, 0x10]);
        // target 0: the slice is empty, so the strong-optimistic predicate
        // equals the optimistic one
        assert_eq!(
            plan_queries(&pred, 0, Status::Unsat, Some(Status::Sat)),
            StrategyPlan::SaveOptimisticOnly
        );
    }
}
