//! Per-target inversion records and the counting rules.
//!
//! A target may yield several SAT verdicts (sliced, optimistic, strong
//! optimistic) and several generated inputs. For the metrics each target
//! counts at most once: one SAT-counted branch if any query was SAT, one
//! correct branch if at least one of its inputs actually inverted the
//! target.

use std::collections::BTreeMap;

use crate::solver::Status;
use crate::strategy::QueryKind;
use crate::vm::Addr;

/// How a generated input behaved on re-execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    /// Reached the target occurrence and went the inverted direction.
    Correct,
    /// Reached the target occurrence in the original direction.
    Incorrect,
    /// The target occurrence never executed.
    NotReached,
}

impl Validation {
    pub fn as_str(self) -> &'static str {
        match self {
            Validation::Correct => "correct",
            Validation::Incorrect => "incorrect",
            Validation::NotReached => "not_reached",
        }
    }
}

/// A solver model turned into a full input and validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedInput {
    pub bytes: Vec<u8>,
    pub model: BTreeMap<u32, u8>,
    pub validation: Validation,
}

/// Result of one query against one target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutcome {
    pub kind: QueryKind,
    pub status: Status,
    /// Original sequence numbers of the non-target conjuncts.
    pub kept_seqs: Vec<usize>,
    pub candidates_tried: u64,
    /// Present iff the query was SAT and its model was saved under the
    /// campaign mode.
    pub input: Option<GeneratedInput>,
}

/// One solver invocation, for conformance checks over the query flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverCall {
    pub target_seq: usize,
    pub kind: QueryKind,
    pub status: Status,
}

/// Everything recorded while trying to invert one target branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InversionOutcome {
    pub seq: usize,
    pub src: Addr,
    pub occurrence: u32,
    pub original_taken: bool,
    pub sliced: Option<QueryOutcome>,
    pub optimistic: Option<QueryOutcome>,
    pub strong_optimistic: Option<QueryOutcome>,
    /// The strong-optimistic predicate collapsed to the optimistic one,
    /// so a single solver call covered both.
    pub sopt_matched_optimistic: bool,
    /// Solver errors for this target (e.g. a too-wide query with no
    /// external fallback); they never abort the campaign.
    pub errors: Vec<String>,
}

impl InversionOutcome {
    pub fn queries(&self) -> impl Iterator<Item = &QueryOutcome> {
        self.sliced
            .iter()
            .chain(self.optimistic.iter())
            .chain(self.strong_optimistic.iter())
    }

    pub fn inputs(&self) -> impl Iterator<Item = (QueryKind, &GeneratedInput)> {
        self.queries().filter_map(|q| q.input.as_ref().map(|i| (q.kind, i)))
    }

    /// 1 iff at least one query kind returned SAT.
    pub fn counted_sat(&self) -> u32 {
        u32::from(self.queries().any(|q| q.status == Status::Sat))
    }

    /// 1 iff at least one generated input actually inverted the target.
    pub fn counted_correct(&self) -> u32 {
        u32::from(
            self.inputs()
                .any(|(_, input)| input.validation == Validation::Correct),
        )
    }
}

/// Sums the max-one-per-target counters: (SAT branches, correct branches).
pub fn count_branches(outcomes: &[InversionOutcome]) -> (u32, u32) {
    let sat = outcomes.iter().map(InversionOutcome::counted_sat).sum();
    let correct = outcomes.iter().map(InversionOutcome::counted_correct).sum();
    (sat, correct)
}
