//! Campaign driver: solving, validation, and coverage.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::solver::{merge_model, solve, SolveBudget, Status, Verdict};
use crate::strategy::{
    build_optimistic, build_strong_optimistic, plan_queries, slice, InversionQuery, QueryKind,
    StrategyPlan,
};
use crate::sym::{run_concolic, PathPredicate};
use crate::vm::{edge_coverage, run_concrete, Addr, Program};

use super::outcome::{GeneratedInput, InversionOutcome, QueryOutcome, SolverCall, Validation};
use super::report::{build_report, CampaignReport, CompareRow, CompareTable};
use super::{CampaignConfig, CampaignError, Clock, Mode, ValidationMode};

/// A campaign's complete result: the aggregated report plus everything it
/// was computed from.
#[derive(Debug, Clone)]
pub struct CampaignRun {
    pub report: CampaignReport,
    pub outcomes: Vec<InversionOutcome>,
    /// Every solver invocation in issue order.
    pub solver_calls: Vec<SolverCall>,
    /// The path predicate the campaign inverted.
    pub predicate: PathPredicate,
}

/// One saved input, addressed by its target branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub src: Addr,
    pub occurrence: u32,
    pub kind: QueryKind,
    pub validation: Validation,
    pub bytes: Vec<u8>,
}

impl CorpusEntry {
    /// Stable corpus file name: `<src>_<occurrence>_<kind>.bin`.
    pub fn file_name(&self) -> String {
        format!("{}_{}_{}.bin", self.src, self.occurrence, self.kind)
    }
}

impl CampaignRun {
    /// All saved inputs in target order.
    pub fn corpus_entries(&self) -> Vec<CorpusEntry> {
        self.outcomes
            .iter()
            .flat_map(|o| {
                o.inputs().map(|(kind, input)| CorpusEntry {
                    src: o.src,
                    occurrence: o.occurrence,
                    kind,
                    validation: input.validation,
                    bytes: input.bytes.clone(),
                })
            })
            .collect()
    }
}

/// Re-executes a candidate input and classifies it against the target
/// branch: correct iff the target's dynamic occurrence runs in the
/// direction opposite to the original run. Loose validation accepts a
/// flip at any occurrence of the site. Runs that fault or hit the step
/// limit before the target count as not reached.
pub fn validate(
    program: &Program,
    predicate: &PathPredicate,
    target_seq: usize,
    candidate: &[u8],
    step_limit: u64,
    mode: ValidationMode,
) -> Result<Validation, crate::vm::VmError> {
    let target = &predicate.constraints[target_seq];
    let trace = run_concrete(program, candidate, step_limit)?;
    Ok(match mode {
        ValidationMode::Strict => match trace.branch_at(target.src, target.occurrence) {
            Some(event) if event.taken != target.taken => Validation::Correct,
            Some(_) => Validation::Incorrect,
            None => Validation::NotReached,
        },
        ValidationMode::Loose => {
            let mut reached = false;
            let mut flipped = false;
            for event in trace.branch_events.iter().filter(|e| e.src == target.src) {
                reached = true;
                flipped |= event.taken != target.taken;
            }
            if flipped {
                Validation::Correct
            } else if reached {
                Validation::Incorrect
            } else {
                Validation::NotReached
            }
        }
    })
}

struct DraftQuery {
    kind: QueryKind,
    status: Status,
    kept_seqs: Vec<usize>,
    candidates_tried: u64,
    /// Model to merge and validate; present iff the input is saved.
    saved_model: Option<BTreeMap<u32, u8>>,
}

impl DraftQuery {
    fn record(kind: QueryKind, query: &InversionQuery, verdict: &Verdict, save: bool) -> DraftQuery {
        DraftQuery {
            kind,
            status: verdict.status,
            kept_seqs: query.kept_seqs(),
            candidates_tried: verdict.candidates_tried,
            saved_model: if save && verdict.status == Status::Sat {
                verdict.model.clone()
            } else {
                None
            },
        }
    }
}

struct Draft {
    seq: usize,
    sliced: Option<DraftQuery>,
    optimistic: Option<DraftQuery>,
    strong: Option<DraftQuery>,
    matched: bool,
    errors: Vec<String>,
    calls: Vec<SolverCall>,
}

fn dispatch_solve(
    query: &InversionQuery,
    seed: &[u8],
    config: &CampaignConfig,
    errors: &mut Vec<String>,
    calls: &mut Vec<SolverCall>,
) -> Option<Verdict> {
    let budget = SolveBudget {
        max_bytes: config.max_bytes,
        time_limit: config.solver_timeout,
    };
    let verdict = match solve(query, seed, &budget) {
        Ok(v) => Some(v),
        Err(too_wide) => match &config.external_solver {
            Some(ext) => match ext.solve(query) {
                Ok(v) => Some(v),
                Err(e) => {
                    errors.push(format!("{}: {e}", query.kind));
                    None
                }
            },
            None => {
                errors.push(format!("{}: {too_wide}", query.kind));
                None
            }
        },
    };
    if let Some(v) = &verdict {
        calls.push(SolverCall {
            target_seq: query.target_seq,
            kind: query.kind,
            status: v.status,
        });
    }
    verdict
}

/// Runs the strategy pipeline for one target, without validation.
fn solve_target(predicate: &PathPredicate, seq: usize, config: &CampaignConfig) -> Draft {
    let mut draft = Draft {
        seq,
        sliced: None,
        optimistic: None,
        strong: None,
        matched: false,
        errors: Vec::new(),
        calls: Vec::new(),
    };
    let seed = &predicate.seed;

    let sliced_q = slice(predicate, seq);
    let Some(v_sliced) =
        dispatch_solve(&sliced_q, seed, config, &mut draft.errors, &mut draft.calls)
    else {
        return draft;
    };
    // a satisfiable sliced predicate is saved in every mode
    draft.sliced = Some(DraftQuery::record(QueryKind::Sliced, &sliced_q, &v_sliced, true));
    if v_sliced.status == Status::Sat {
        return draft;
    }

    match config.mode {
        Mode::Default => {}
        Mode::OptOnly => {
            let opt_q = build_optimistic(predicate, seq);
            if let Some(v) =
                dispatch_solve(&opt_q, seed, config, &mut draft.errors, &mut draft.calls)
            {
                draft.optimistic = Some(DraftQuery::record(QueryKind::Optimistic, &opt_q, &v, true));
            }
        }
        Mode::SoptOnly => {
            let sopt_q = build_strong_optimistic(predicate, &sliced_q, seq);
            if let Some(v) =
                dispatch_solve(&sopt_q, seed, config, &mut draft.errors, &mut draft.calls)
            {
                draft.strong =
                    Some(DraftQuery::record(QueryKind::StrongOptimistic, &sopt_q, &v, true));
            }
        }
        Mode::OptPlusSopt => match plan_queries(predicate, seq, v_sliced.status, None) {
            StrategyPlan::QueryOptimistic => {
                let opt_q = build_optimistic(predicate, seq);
                let Some(v_opt) =
                    dispatch_solve(&opt_q, seed, config, &mut draft.errors, &mut draft.calls)
                else {
                    return draft;
                };
                draft.optimistic =
                    Some(DraftQuery::record(QueryKind::Optimistic, &opt_q, &v_opt, true));
                match plan_queries(predicate, seq, v_sliced.status, Some(v_opt.status)) {
                    StrategyPlan::Stop => {}
                    StrategyPlan::SaveOptimisticOnly => {
                        draft.matched = true;
                    }
                    StrategyPlan::QueryStrongOptimistic(sopt_q) => {
                        if let Some(v) = dispatch_solve(
                            &sopt_q,
                            seed,
                            config,
                            &mut draft.errors,
                            &mut draft.calls,
                        ) {
                            draft.strong = Some(DraftQuery::record(
                                QueryKind::StrongOptimistic,
                                &sopt_q,
                                &v,
                                true,
                            ));
                        }
                    }
                    StrategyPlan::SaveSliced | StrategyPlan::QueryOptimistic => {
                        unreachable!("planner cannot revisit earlier stages")
                    }
                }
            }
            StrategyPlan::SaveSliced => unreachable!("sliced SAT already handled"),
            _ => unreachable!("planner with unknown optimistic verdict"),
        },
    }
    draft
}

/// Merges saved models into full inputs, validates them, and builds the
/// final outcome for one target.
fn finalize_draft(
    program: &Program,
    predicate: &PathPredicate,
    draft: Draft,
    config: &CampaignConfig,
) -> Result<(InversionOutcome, Vec<SolverCall>), CampaignError> {
    let seq = draft.seq;
    let target = &predicate.constraints[seq];
    let seed = &predicate.seed;
    let finalize = |dq: Option<DraftQuery>| -> Result<Option<QueryOutcome>, CampaignError> {
        let Some(dq) = dq else { return Ok(None) };
        let input = match dq.saved_model {
            Some(model) => {
                let bytes = merge_model(&model, seed);
                let validation = validate(
                    program,
                    predicate,
                    seq,
                    &bytes,
                    config.step_limit,
                    config.validation,
                )?;
                Some(GeneratedInput {
                    bytes,
                    model,
                    validation,
                })
            }
            None => None,
        };
        Ok(Some(QueryOutcome {
            kind: dq.kind,
            status: dq.status,
            kept_seqs: dq.kept_seqs,
            candidates_tried: dq.candidates_tried,
            input,
        }))
    };

    let outcome = InversionOutcome {
        seq,
        src: target.src,
        occurrence: target.occurrence,
        original_taken: target.taken,
        sliced: finalize(draft.sliced)?,
        optimistic: finalize(draft.optimistic)?,
        strong_optimistic: finalize(draft.strong)?,
        sopt_matched_optimistic: draft.matched,
        errors: draft.errors,
    };
    Ok((outcome, draft.calls))
}

/// Runs the strategy pipeline and validation for one target branch.
pub fn invert_one(
    program: &Program,
    predicate: &PathPredicate,
    target_seq: usize,
    config: &CampaignConfig,
) -> Result<InversionOutcome, CampaignError> {
    assert!(target_seq < predicate.len(), "target out of range");
    let draft = solve_target(predicate, target_seq, config);
    let (outcome, _) = finalize_draft(program, predicate, draft, config)?;
    Ok(outcome)
}

/// Inverts every symbolic branch of one run under `config`, validates all
/// generated inputs, and aggregates the metrics.
pub fn invert_all(
    program: &Program,
    seed: &[u8],
    config: &CampaignConfig,
) -> Result<CampaignRun, CampaignError> {
    let predicate = run_concolic(program, seed, config.step_limit)?;
    let total = predicate.len();
    let limit = config.budget_branches.map_or(total, |b| b.min(total));

    let start = Instant::now();
    let jobs = config.jobs.max(1);
    let mut drafts: Vec<Draft> = Vec::with_capacity(limit);
    let mut next = 0usize;
    while next < limit {
        if let Some(wall) = config.budget_wall {
            if start.elapsed() >= wall {
                break;
            }
        }
        let end = (next + jobs).min(limit);
        if jobs == 1 {
            drafts.push(solve_target(&predicate, next, config));
        } else {
            // solving is pure per target; one wave of workers per batch
            let pred = &predicate;
            let batch: Vec<Draft> = std::thread::scope(|scope| {
                let handles: Vec<_> = (next..end)
                    .map(|seq| scope.spawn(move || solve_target(pred, seq, config)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("solver worker panicked"))
                    .collect()
            });
            drafts.extend(batch);
        }
        next = end;
    }

    // validation runs sequentially over the completed drafts
    let mut outcomes = Vec::with_capacity(drafts.len());
    let mut solver_calls = Vec::new();
    for draft in drafts {
        let (outcome, calls) = finalize_draft(program, &predicate, draft, config)?;
        outcomes.push(outcome);
        solver_calls.extend(calls);
    }

    let elapsed = match config.clock {
        Clock::Monotonic => start.elapsed(),
        Clock::Fixed(d) => d,
    };

    let coverage_base = edge_coverage(program, [seed], config.step_limit)?;
    let mut corpus_inputs: Vec<&[u8]> = vec![seed];
    for o in &outcomes {
        for (_, input) in o.inputs() {
            corpus_inputs.push(&input.bytes);
        }
    }
    let coverage_generated = edge_coverage(program, corpus_inputs, config.step_limit)?;

    let report = build_report(config.mode, &outcomes, elapsed, coverage_base, coverage_generated);
    Ok(CampaignRun {
        report,
        outcomes,
        solver_calls,
        predicate,
    })
}

/// Runs one campaign per labeled configuration and tabulates coverage.
pub fn compare_configs(
    program: &Program,
    seed: &[u8],
    configs: &[(String, CampaignConfig)],
) -> Result<CompareTable, CampaignError> {
    let mut rows = Vec::with_capacity(configs.len());
    for (label, config) in configs {
        let run = invert_all(program, seed, config)?;
        rows.push(CompareRow {
            label: label.clone(),
            report: run.report,
        });
    }
    Ok(CompareTable { rows })
}

/// The standard three-way comparison: no strategies, optimistic only, and
/// optimistic plus strong optimistic.
pub fn standard_comparison(
    program: &Program,
    seed: &[u8],
    template: &CampaignConfig,
) -> Result<CompareTable, CampaignError> {
    let with_mode = |mode: Mode| -> CampaignConfig {
        let mut c = template.clone();
        c.mode = mode;
        c
    };
    compare_configs(
        program,
        seed,
        &[
            ("Base".to_string(), with_mode(Mode::Default)),
            ("Opt".to_string(), with_mode(Mode::OptOnly)),
            ("Sopt".to_string(), with_mode(Mode::OptPlusSopt)),
        ],
    )
}
