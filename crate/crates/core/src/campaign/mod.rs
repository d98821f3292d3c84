//! Branch-inversion campaigns.
//!
//! A campaign takes one program and one seed, runs the concolic engine
//! once, and then tries to invert every recorded symbolic branch in
//! order, following the configured strategy mode. Every solver model is
//! merged into a full input, re-executed, and classified as correct
//! (target branch reached and flipped), incorrect (reached, same
//! direction), or not reached. The report aggregates the counts into the
//! correctness/accuracy/speed metrics plus edge-coverage deltas.

mod outcome;
mod report;
mod run;

pub use outcome::{
    count_branches, GeneratedInput, InversionOutcome, QueryOutcome, SolverCall, Validation,
};
pub use report::{CampaignReport, CompareRow, CompareTable, KindStats};
pub use run::{
    compare_configs, invert_all, invert_one, standard_comparison, validate, CampaignRun,
    CorpusEntry,
};

use std::fmt;
use std::time::Duration;

use crate::solver::ExternalSolver;
use crate::vm::DEFAULT_STEP_LIMIT;

/// Strategy configuration for a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Sliced queries only; nothing is tried on UNSAT.
    Default,
    /// On sliced UNSAT, solve the optimistic predicate.
    OptOnly,
    /// On sliced UNSAT, build and solve the strong-optimistic predicate
    /// directly; bare optimistic models are never saved.
    SoptOnly,
    /// The full flow: optimistic first, then strong optimistic when it
    /// differs.
    OptPlusSopt,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Default => "default",
            Mode::OptOnly => "opt",
            Mode::SoptOnly => "sopt",
            Mode::OptPlusSopt => "opt+sopt",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "default" => Some(Mode::Default),
            "opt" => Some(Mode::OptOnly),
            "sopt" => Some(Mode::SoptOnly),
            "opt+sopt" => Some(Mode::OptPlusSopt),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How generated inputs are judged against the target branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    /// The exact dynamic occurrence of the branch site must flip.
    #[default]
    Strict,
    /// Any execution of the branch site in the flipped direction counts.
    Loose,
}

/// Clock used for the speed metric. A fixed clock makes reports
/// byte-for-byte reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    Monotonic,
    Fixed(Duration),
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub mode: Mode,
    /// Per-query time limit for the exact solver.
    pub solver_timeout: Duration,
    /// Width budget for the exact solver.
    pub max_bytes: usize,
    /// Step limit for concolic runs and validation re-execution.
    pub step_limit: u64,
    /// Process at most this many target branches.
    pub budget_branches: Option<usize>,
    /// Stop starting new targets once this much wall time has passed.
    pub budget_wall: Option<Duration>,
    pub validation: ValidationMode,
    pub clock: Clock,
    /// Worker threads for query solving; 1 is fully sequential.
    pub jobs: usize,
    /// Fallback for queries wider than `max_bytes`.
    pub external_solver: Option<ExternalSolver>,
}

impl CampaignConfig {
    pub fn new(mode: Mode) -> CampaignConfig {
        CampaignConfig {
            mode,
            solver_timeout: Duration::from_secs(10),
            max_bytes: 3,
            step_limit: DEFAULT_STEP_LIMIT,
            budget_branches: None,
            budget_wall: None,
            validation: ValidationMode::Strict,
            clock: Clock::Monotonic,
            jobs: 1,
            external_solver: None,
        }
    }

    /// Fixed clock, useful wherever byte-identical reports matter.
    pub fn with_fixed_clock(mut self, elapsed: Duration) -> CampaignConfig {
        self.clock = Clock::Fixed(elapsed);
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error(transparent)]
    Vm(#[from] crate::vm::VmError),
}
