//! Strong-optimistic predicate construction.
//!
//! Starting from the negated target, the sliced conjuncts are visited in
//! reverse order while walking the call stack outward. A constraint
//! whose call stack is not a prefix of the current stack belongs to a
//! function that already returned and is skipped. When the constraint's
//! stack is a strict prefix, the inversion point moves to the call site
//! of the first frame distinguishing the two stacks; the constraint is
//! then kept iff the point lies inside its branch scope
//! (`src <= point < dst`) or its scope contains a control transfer
//! instruction. Backward branches can satisfy neither test and always
//! drop out.

use crate::sym::PathPredicate;
use crate::vm::Addr;

use super::{InversionQuery, QueryKind};

/// How a constraint's call stack related to the current stack when it was
/// visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackRelation {
    /// Not a prefix: the constraint's function already returned.
    NotPrefix,
    /// Strict prefix: the point moved to the distinguishing call site.
    StrictPrefix { new_point: Addr },
    /// Same frame.
    Equal,
}

/// One iteration of the reverse sweep, for golden tests and debugging.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoptStep {
    /// Sequence number of the visited constraint.
    pub seq: usize,
    pub relation: StackRelation,
    /// The point in effect when the inclusion test ran.
    pub point: Addr,
    pub included: bool,
    /// Included only because of a control transfer instruction in the
    /// branch scope (the interval test failed).
    pub via_cti: bool,
}

/// Builds the strong-optimistic query from a sliced query over the same
/// predicate and target.
pub fn build_strong_optimistic(
    predicate: &PathPredicate,
    sliced: &InversionQuery,
    target_seq: usize,
) -> InversionQuery {
    build_strong_optimistic_traced(predicate, sliced, target_seq).0
}

/// Like [`build_strong_optimistic`], also returning the per-iteration log
/// of the reverse sweep.
pub fn build_strong_optimistic_traced(
    predicate: &PathPredicate,
    sliced: &InversionQuery,
    target_seq: usize,
) -> (InversionQuery, Vec<SoptStep>) {
    assert_eq!(sliced.kind, QueryKind::Sliced, "expected a sliced query");
    assert_eq!(
        sliced.target_seq, target_seq,
        "sliced query was built for a different target"
    );
    let target = &predicate.constraints[target_seq];

    let mut point: Addr = target.src;
    let mut stack = &target.stack;
    let mut included_rev: Vec<usize> = Vec::new();
    let mut steps: Vec<SoptStep> = Vec::new();

    for &seq in sliced.kept_seqs().iter().rev() {
        let c = &predicate.constraints[seq];

        if !c.stack.is_prefix_of(stack) {
            steps.push(SoptStep {
                seq,
                relation: StackRelation::NotPrefix,
                point,
                included: false,
                via_cti: false,
            });
            continue;
        }

        let relation = if c.stack.len() < stack.len() {
            // the constraint sits in an outer frame: the target is only
            // reached if the call chain back into it executes, so the
            // point becomes the distinguishing call site
            point = stack.frames[c.stack.len()].call_site;
            stack = &c.stack;
            StackRelation::StrictPrefix { new_point: point }
        } else {
            StackRelation::Equal
        };

        let nested = c.src <= point && point < c.dst;
        let included = nested || c.has_cti;
        if included {
            included_rev.push(seq);
        }
        steps.push(SoptStep {
            seq,
            relation,
            point,
            included,
            via_cti: included && !nested,
        });
    }

    included_rev.reverse();
    let kept: Vec<_> = included_rev
        .into_iter()
        .map(|seq| (seq, predicate.constraints[seq].expr.clone()))
        .collect();
    let query = InversionQuery::new(
        QueryKind::StrongOptimistic,
        target_seq,
        kept,
        target.expr.negate(),
    );
    (query, steps)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::corpus_predicate;
    use super::super::{build_optimistic, slice};
    use super::*;

    #[test]
    fn listing1_keeps_guarding_check_and_drops_independent_one() {
        let (_, pred) = corpus_predicate("listing1.asm", &[0x33, 0x11, 0x20, 0x10]);
        let sliced = slice(&pred, 3);
        let (q, steps) = build_strong_optimistic_traced(&pred, &sliced, 3);

        // final predicate: the difference guard plus the negated target
        assert_eq!(q.kept_seqs(), vec![2]);
        assert_eq!(q.dump_line(), "strong_optimistic; 3; [2,NEG]");

        // sweep: first the guard at seq 2 pops the func frame, moving the
        // point to the call site (26), and is kept by the interval test
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].seq, 2);
        assert_eq!(steps[0].relation, StackRelation::StrictPrefix { new_point: 26 });
        assert!(steps[0].included && !steps[0].via_cti);
        // then the independent check at seq 1: same frame, interval test
        // fails (its scope ends before the call site), no CTI
        assert_eq!(steps[1].seq, 1);
        assert_eq!(steps[1].relation, StackRelation::Equal);
        assert_eq!(steps[1].point, 26);
        assert!(!steps[1].included);
    }

    #[test]
    fn goto_scope_is_kept_via_cti_despite_failing_interval() {
        let (_, pred) = corpus_predicate("cti_goto.asm", &[0x61, 0x11]);
        assert_eq!(pred.len(), 3);
        let sliced = slice(&pred, 2);
        assert_eq!(sliced.kept_seqs(), vec![0, 1]);
        let (q, steps) = build_strong_optimistic_traced(&pred, &sliced, 2);

        assert_eq!(q.kept_seqs(), vec![1]);
        // the null-style check: frame popped, point = call site 21, which
        // is outside its scope (19, 21) — kept only by the goto inside
        assert_eq!(steps[0].seq, 1);
        assert_eq!(steps[0].relation, StackRelation::StrictPrefix { new_point: 21 });
        assert!(steps[0].included && steps[0].via_cti);
        // the earlier byte check: same frame, dropped
        assert_eq!(steps[1].seq, 0);
        assert!(!steps[1].included);
    }

    #[test]
    fn nested_calls_pop_two_frames_and_skip_returned_sibling() {
        let (_, pred) = corpus_predicate("nested_calls.asm", &[0x05, 0x03, 0x09]);
        assert_eq!(pred.len(), 4);
        let sliced = slice(&pred, 3);
        assert_eq!(sliced.kept_seqs(), vec![0, 1, 2]);
        let (q, steps) = build_strong_optimistic_traced(&pred, &sliced, 3);

        assert_eq!(q.kept_seqs(), vec![1, 2]);

        // outer's guard: pops the inner frame, point = inner call site
        assert_eq!(steps[0].seq, 2);
        assert_eq!(steps[0].relation, StackRelation::StrictPrefix { new_point: 15 });
        assert!(steps[0].included);
        // main's guard: pops the outer frame, point = outer call site
        assert_eq!(steps[1].seq, 1);
        assert_eq!(steps[1].relation, StackRelation::StrictPrefix { new_point: 21 });
        assert!(steps[1].included);
        // check()'s constraint: its frame already returned — skipped
        assert_eq!(steps[2].seq, 0);
        assert_eq!(steps[2].relation, StackRelation::NotPrefix);
        assert!(!steps[2].included);
    }

    #[test]
    fn empty_slice_gives_optimistic_shaped_query() {
        let (_, pred) = corpus_predicate("listing1.asm", &[0x33, 0x11, 0x20, 0x10]);
        let sliced = slice(&pred, 0);
        let q = build_strong_optimistic(&pred, &sliced, 0);
        assert!(q.kept_seqs().is_empty());
        assert!(q.same_conjuncts(&build_optimistic(&pred, 0)));
    }

    #[test]
    fn backward_branches_never_included() {
        let (_, pred) = corpus_predicate("loop.asm", &[0x02, 0x00]);
        // constraints 0 and 1 come from the backward loop branch; target
        // the second loop iteration
        assert_eq!(pred.constraints[0].src, 4);
        assert!(pred.constraints[0].dst <= pred.constraints[0].src);
        let sliced = slice(&pred, 1);
        assert_eq!(sliced.kept_seqs(), vec![0]);
        let q = build_strong_optimistic(&pred, &sliced, 1);
        assert!(q.kept_seqs().is_empty());
        assert!(q.same_conjuncts(&build_optimistic(&pred, 1)));
    }

    #[test]
    fn subset_and_order_invariants_on_corpus() {
        for (name, seed) in [
            ("listing1.asm", vec![0x33u8, 0x11, 0x20, 0x10]),
            ("cti_goto.asm", vec![0x61, 0x11]),
            ("cti_assert.asm", vec![0x42]),
            ("loop.asm", vec![0x02, 0x00]),
            ("nested_calls.asm", vec![0x05, 0x03, 0x09]),
        ] {
            let (_, pred) = corpus_predicate(name, &seed);
            for target in 0..pred.len() {
                let sliced = slice(&pred, target);
                let q = build_strong_optimistic(&pred, &sliced, target);
                let sliced_seqs = sliced.kept_seqs();
                let sopt_seqs = q.kept_seqs();
                assert!(
                    sopt_seqs.iter().all(|s| sliced_seqs.contains(s)),
                    "{name}: strong-optimistic kept a conjunct outside the slice"
                );
                assert!(
                    sopt_seqs.windows(2).all(|w| w[0] < w[1]),
                    "{name}: original order not preserved"
                );
                assert!(
                    sliced_seqs.windows(2).all(|w| w[0] < w[1]),
                    "{name}: slice order not preserved"
                );
            }
        }
    }
}
