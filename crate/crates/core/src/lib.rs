//! Concolic execution laboratory on a small register machine.
//!
//! The crate is organized as a pipeline:
//!
//! * [`vm`] — the ISA, a textual assembler, and a concrete interpreter
//!   that records executed edges and branch events.
//! * [`sym`] — the concolic interpreter: it follows the concrete path of a
//!   run while building symbolic expressions over input bytes, producing a
//!   path predicate whose constraints carry call-stack snapshots and
//!   control-transfer flags.
//! * [`strategy`] — builds the inversion queries for a chosen target
//!   branch: the sliced predicate, the optimistic predicate (negated
//!   target only), and the strong-optimistic predicate that keeps exactly
//!   the constraints the target is control dependent on (or whose branch
//!   scope contains a control transfer instruction).
//! * [`solver`] — an exact brute-force solver over the query's symbolic
//!   bytes, plus SMT-LIB export and an external-solver adapter.
//! * [`campaign`] — inverts every symbolic branch of a run under a
//!   strategy configuration, validates the generated inputs, and computes
//!   correctness/accuracy/speed metrics and coverage deltas.

pub mod campaign;
pub mod solver;
pub mod strategy;
pub mod sym;
pub mod vm;

pub use campaign::{invert_all, CampaignConfig, CampaignRun, Mode};
pub use solver::{solve, SolveBudget, Status, Verdict};
pub use strategy::{build_optimistic, build_strong_optimistic, slice, InversionQuery, QueryKind};
pub use sym::{run_concolic, scan_cti, PathPredicate, SymExpr};
pub use vm::{assemble, edge_coverage, run_concrete, Addr, Program};
