pub mod engine;
pub mod expr;

pub use engine::{run_concolic, scan_cti, BranchConstraint, CallStackSnapshot, Frame, PathPredicate};
pub use expr::SymExpr;
