//! Inversion query construction.
//!
//! Inverting a target branch means asking for an input that satisfies
//! some of the constraints recorded before it, conjoined with the negated
//! target constraint. Three query shapes exist:
//!
//! * sliced — keeps the prior constraints whose variables are directly or
//!   transitively connected to the target's variables ([`slice`]);
//! * optimistic — keeps only the negated target ([`build_optimistic`]);
//! * strong optimistic — keeps exactly the sliced constraints the target
//!   is control dependent on, or whose branch scope contains a control
//!   transfer instruction ([`build_strong_optimistic`]).
//!
//! [`plan_queries`] encodes the decision flow that sequences the three.

mod plan;
mod sopt;

pub use plan::{plan_queries, StrategyPlan};
pub use sopt::{build_strong_optimistic, build_strong_optimistic_traced, SoptStep, StackRelation};

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::sym::{PathPredicate, SymExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryKind {
    Sliced,
    Optimistic,
    StrongOptimistic,
}

impl QueryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryKind::Sliced => "sliced",
            QueryKind::Optimistic => "optimistic",
            QueryKind::StrongOptimistic => "strong_optimistic",
        }
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One conjunct of an inversion query. `source_seq` is the position of
/// the originating constraint in the path predicate; the negated target
/// carries `None` and is always the last conjunct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryConjunct {
    pub source_seq: Option<usize>,
    pub expr: Arc<SymExpr>,
}

/// A solver query for inverting one target branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InversionQuery {
    pub kind: QueryKind,
    pub target_seq: usize,
    pub conjuncts: Vec<QueryConjunct>,
}

impl InversionQuery {
    fn new(
        kind: QueryKind,
        target_seq: usize,
        kept: impl IntoIterator<Item = (usize, Arc<SymExpr>)>,
        negated_target: Arc<SymExpr>,
    ) -> InversionQuery {
        let mut conjuncts: Vec<QueryConjunct> = kept
            .into_iter()
            .map(|(seq, expr)| QueryConjunct {
                source_seq: Some(seq),
                expr,
            })
            .collect();
        conjuncts.push(QueryConjunct {
            source_seq: None,
            expr: negated_target,
        });
        InversionQuery {
            kind,
            target_seq,
            conjuncts,
        }
    }

    /// Sequence numbers of the non-target conjuncts, in query order.
    pub fn kept_seqs(&self) -> Vec<usize> {
        self.conjuncts.iter().filter_map(|c| c.source_seq).collect()
    }

    /// The negated target conjunct (always present, always last).
    pub fn negated_target(&self) -> &Arc<SymExpr> {
        &self
            .conjuncts
            .last()
            .expect("query has at least the negated target")
            .expr
    }

    pub fn exprs(&self) -> impl Iterator<Item = &Arc<SymExpr>> {
        self.conjuncts.iter().map(|c| &c.expr)
    }

    /// Union of input-byte variables across all conjuncts.
    pub fn vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for c in &self.conjuncts {
            c.expr.collect_vars(&mut out);
        }
        out
    }

    /// Structural equality of the conjunct lists (expression trees
    /// compared node for node, no canonicalization).
    pub fn same_conjuncts(&self, other: &InversionQuery) -> bool {
        self.conjuncts.len() == other.conjuncts.len()
            && self
                .conjuncts
                .iter()
                .zip(&other.conjuncts)
                .all(|(a, b)| a.expr == b.expr)
    }

    /// Dump format: `kind; target_seq; [seq,seq,...,NEG]`.
    pub fn dump_line(&self) -> String {
        let parts: Vec<String> = self
            .conjuncts
            .iter()
            .map(|c| match c.source_seq {
                Some(seq) => seq.to_string(),
                None => "NEG".to_string(),
            })
            .collect();
        debug_assert_eq!(parts.last().map(String::as_str), Some("NEG"));
        format!("{}; {}; [{}]", self.kind, self.target_seq, parts.join(","))
    }
}

/// Builds the sliced query: the transitive variable closure is seeded
/// with the target's variables, where two variables are connected when
/// some constraint at or before the target mentions both. Prior
/// constraints whose variables intersect the closure are kept in their
/// original order; everything else is dropped.
pub fn slice(predicate: &PathPredicate, target_seq: usize) -> InversionQuery {
    assert!(target_seq < predicate.len(), "target out of range");
    let target = &predicate.constraints[target_seq];

    let var_sets: Vec<BTreeSet<u32>> = predicate.constraints[..=target_seq]
        .iter()
        .map(|c| c.expr.vars())
        .collect();

    let mut closure = target.expr.vars();
    let mut changed = true;
    while changed {
        changed = false;
        for vars in &var_sets {
            if !vars.is_disjoint(&closure) && !vars.is_subset(&closure) {
                closure.extend(vars.iter().copied());
                changed = true;
            }
        }
    }

    let kept = predicate.constraints[..target_seq]
        .iter()
        .zip(&var_sets)
        .filter(|(_, vars)| !vars.is_disjoint(&closure))
        .map(|(c, _)| (c.seq, c.expr.clone()))
        .collect::<Vec<_>>();

    InversionQuery::new(QueryKind::Sliced, target_seq, kept, target.expr.negate())
}

/// Builds the optimistic query: only the negated target constraint.
pub fn build_optimistic(predicate: &PathPredicate, target_seq: usize) -> InversionQuery {
    assert!(target_seq < predicate.len(), "target out of range");
    let target = &predicate.constraints[target_seq];
    InversionQuery::new(
        QueryKind::Optimistic,
        target_seq,
        std::iter::empty(),
        target.expr.negate(),
    )
}
