//! Command-line front end for the concolic execution laboratory.
//!
//! Subcommands: `asm` (assemble and print the resolved listing), `run`
//! (concrete execution trace), `trace` (concolic path predicate dump),
//! `invert` (single-branch inversion), `campaign` (invert every symbolic
//! branch and report metrics), `compare` (Base/Opt/Sopt coverage table),
//! and `coverage` (unique edges over a corpus of inputs).
//!
//! Exit codes: 0 on success, 1 on an analysis fault, 2 on a usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use concolab::campaign::{
    invert_one, standard_comparison, CampaignConfig, CampaignReport, CampaignRun, Clock,
    InversionOutcome, Mode, ValidationMode,
};
use concolab::solver::{export_smt, ExternalSolver};
use concolab::strategy::{build_optimistic, build_strong_optimistic, slice, QueryKind};
use concolab::sym::run_concolic;
use concolab::vm::{assemble, disassemble, edge_coverage, run_concrete, Program, Termination};

#[derive(Parser)]
#[command(name = "concolab", version, about = "Concolic branch-inversion laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ProgramArgs {
    /// Assembly source file.
    #[arg(long)]
    program: PathBuf,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    program: ProgramArgs,
    /// Raw seed file of exactly the declared input length.
    #[arg(long)]
    seed: PathBuf,
    /// Interpreter step limit.
    #[arg(long, default_value_t = concolab::vm::DEFAULT_STEP_LIMIT)]
    step_limit: u64,
}

#[derive(Args, Clone)]
struct StrategyArgs {
    /// Strategy mode.
    #[arg(long, default_value = "opt+sopt", value_parser = parse_mode)]
    mode: Mode,
    /// Per-query solver time limit in seconds.
    #[arg(long, default_value_t = 10)]
    solver_timeout: u64,
    /// Exact-solver width budget in symbolic bytes.
    #[arg(long, default_value_t = 3)]
    max_bytes: usize,
    /// Validation reading: strict (exact occurrence) or loose (any
    /// occurrence of the site).
    #[arg(long, default_value = "strict", value_parser = parse_validation)]
    validate: ValidationMode,
    /// External solver command (program plus arguments), used as a
    /// fallback for queries wider than the exact-solver budget.
    #[arg(long)]
    solver_cmd: Option<String>,
    /// Worker threads for query solving; 1 is fully deterministic.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Clock for the speed metric: `real` or `fixed:<seconds>` (the
    /// latter makes reports byte-identical across runs).
    #[arg(long, default_value = "real", value_parser = parse_clock)]
    clock: Clock,
}

impl StrategyArgs {
    fn to_config(&self) -> CampaignConfig {
        let mut config = CampaignConfig::new(self.mode);
        config.solver_timeout = Duration::from_secs(self.solver_timeout);
        config.max_bytes = self.max_bytes;
        config.validation = self.validate;
        config.jobs = self.jobs;
        config.clock = self.clock;
        config.external_solver = self
            .solver_cmd
            .as_ref()
            .map(|cmd| ExternalSolver::new(cmd.split_whitespace().map(String::from).collect()));
        config
    }
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a program and print the resolved listing.
    Asm(ProgramArgs),
    /// Run a program on a seed and print the execution trace summary.
    Run(RunArgs),
    /// Concolic run: print the recorded path predicate, one constraint
    /// per line.
    Trace(RunArgs),
    /// Build and solve the inversion queries for one target branch.
    Invert {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Position of the target constraint in the path predicate.
        #[arg(long)]
        target_seq: usize,
        /// Directory for SMT-LIB dumps of the issued queries.
        #[arg(long)]
        smt_dump: Option<PathBuf>,
    },
    /// Invert every symbolic branch and report the campaign metrics.
    Campaign {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Process at most this many target branches.
        #[arg(long)]
        budget_branches: Option<usize>,
        /// Stop starting new targets after this many wall-clock seconds.
        #[arg(long)]
        budget_seconds: Option<u64>,
        /// Output directory for the generated corpus and reports.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write SMT-LIB text for every issued query (requires --out).
        #[arg(long)]
        smt_dump: bool,
        /// Print the machine-readable CSV row instead of key=value lines.
        #[arg(long)]
        csv: bool,
    },
    /// Run Base, Opt, and Sopt campaigns and compare their coverage.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Print the machine-readable CSV table instead of aligned text.
        #[arg(long)]
        csv: bool,
    },
    /// Count unique edges over a set of input files.
    Coverage {
        #[command(flatten)]
        program: ProgramArgs,
        /// Input files (raw bytes).
        #[arg(required_unless_present = "corpus")]
        inputs: Vec<PathBuf>,
        /// Directory of input files to add to the set.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = concolab::vm::DEFAULT_STEP_LIMIT)]
        step_limit: u64,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    Mode::parse(s).ok_or_else(|| format!("unknown mode `{s}` (default|opt|sopt|opt+sopt)"))
}

fn parse_validation(s: &str) -> Result<ValidationMode, String> {
    match s {
        "strict" => Ok(ValidationMode::Strict),
        "loose" => Ok(ValidationMode::Loose),
        _ => Err(format!("unknown validation mode `{s}` (strict|loose)")),
    }
}

fn parse_clock(s: &str) -> Result<Clock, String> {
    if s == "real" {
        return Ok(Clock::Monotonic);
    }
    if let Some(secs) = s.strip_prefix("fixed:") {
        let secs: f64 = secs.parse().map_err(|_| format!("bad fixed clock `{s}`"))?;
        return Ok(Clock::Fixed(Duration::from_secs_f64(secs)));
    }
    Err(format!("unknown clock `{s}` (real|fixed:<seconds>)"))
}

enum CliError {
    /// Bad input from the user: missing files, parse errors, bad sizes.
    Usage(String),
    /// The analysis itself failed.
    Analysis(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Analysis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load_program(path: &Path) -> Result<Program, CliError> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    assemble(&source).map_err(|e| usage(format!("{}:{e}", path.display())))
}

fn load_seed(path: &Path, program: &Program) -> Result<Vec<u8>, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    if bytes.len() != program.input_len {
        return Err(usage(format!(
            "seed {} is {} bytes, program declares {}",
            path.display(),
            bytes.len(),
            program.input_len
        )));
    }
    Ok(bytes)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Asm(args) => {
            let program = load_program(&args.program)?;
            print!("{}", disassemble(&program));
            Ok(())
        }
        Command::Run(args) => {
            let program = load_program(&args.program.program)?;
            let seed = load_seed(&args.seed, &program)?;
            let trace = run_concrete(&program, &seed, args.step_limit)
                .map_err(|e| CliError::Analysis(e.to_string()))?;
            println!("terminated={}", termination_str(trace.terminated));
            println!("steps={}", trace.steps);
            let unique: std::collections::HashSet<_> = trace.edges.iter().collect();
            println!("edges={}", trace.edges.len());
            println!("unique_edges={}", unique.len());
            for event in &trace.branch_events {
                println!(
                    "branch src={} occurrence={} taken={}",
                    event.src, event.occurrence, event.taken
                );
            }
            Ok(())
        }
        Command::Trace(args) => {
            let program = load_program(&args.program.program)?;
            let seed = load_seed(&args.seed, &program)?;
            let predicate = run_concolic(&program, &seed, args.step_limit)
                .map_err(|e| CliError::Analysis(e.to_string()))?;
            print!("{}", predicate.dump());
            Ok(())
        }
        Command::Invert {
            run,
            strategy,
            target_seq,
            smt_dump,
        } => {
            let program = load_program(&run.program.program)?;
            let seed = load_seed(&run.seed, &program)?;
            let mut config = strategy.to_config();
            config.step_limit = run.step_limit;
            let predicate = run_concolic(&program, &seed, config.step_limit)
                .map_err(|e| CliError::Analysis(e.to_string()))?;
            if target_seq >= predicate.len() {
                return Err(usage(format!(
                    "target-seq {target_seq} out of range: the predicate has {} constraints",
                    predicate.len()
                )));
            }
            if let Some(dir) = &smt_dump {
                dump_queries(dir, &predicate, target_seq)?;
            }
            let outcome = invert_one(&program, &predicate, target_seq, &config)
                .map_err(|e| CliError::Analysis(e.to_string()))?;
            print!("{}", format_outcome(&outcome));
            Ok(())
        }
        Command::Campaign {
            run,
            strategy,
            budget_branches,
            budget_seconds,
            out,
            smt_dump,
            csv,
        } => {
            let program = load_program(&run.program.program)?;
            let seed = load_seed(&run.seed, &program)?;
            let mut config = strategy.to_config();
            config.step_limit = run.step_limit;
            config.budget_branches = budget_branches;
            config.budget_wall = budget_seconds.map(Duration::from_secs);
            if smt_dump && out.is_none() {
                return Err(usage("--smt-dump requires --out"));
            }
            let campaign = concolab::campaign::invert_all(&program, &seed, &config)
                .map_err(|e| CliError::Analysis(e.to_string()))?;
            if csv {
                println!("{}", CampaignReport::CSV_HEADER);
                println!("{}", campaign.report.to_csv_row());
            } else {
                print!("{}", campaign.report.to_kv());
            }
            if let Some(dir) = &out {
                write_campaign_outputs(dir, &campaign, smt_dump)?;
            }
            Ok(())
        }
        Command::Compare { run, strategy, csv } => {
            let program = load_program(&run.program.program)?;
            let seed = load_seed(&run.seed, &program)?;
            let mut config = strategy.to_config();
            config.step_limit = run.step_limit;
            let table = standard_comparison(&program, &seed, &config)
                .map_err(|e| CliError::Analysis(e.to_string()))?;
            if csv {
                print!("{}", table.to_csv());
            } else {
                print!("{}", table.to_text());
            }
            Ok(())
        }
        Command::Coverage {
            program,
            inputs,
            corpus,
            step_limit,
        } => {
            let program = load_program(&program.program)?;
            let mut files = inputs;
            if let Some(dir) = corpus {
                let entries = std::fs::read_dir(&dir)
                    .map_err(|e| usage(format!("cannot read {}: {e}", dir.display())))?;
                let mut found: Vec<PathBuf> = entries
                    .filter_map(|e| e.ok())
                    .map(|e| e.path())
                    .filter(|p| p.is_file())
                    .collect();
                found.sort();
                files.extend(found);
            }
            let mut corpus_bytes = Vec::with_capacity(files.len());
            for path in &files {
                corpus_bytes.push(load_seed(path, &program)?);
            }
            let edges = edge_coverage(&program, &corpus_bytes, step_limit)
                .map_err(|e| CliError::Analysis(e.to_string()))?;
            println!("inputs={}", corpus_bytes.len());
            println!("edges={edges}");
            Ok(())
        }
    }
}

fn termination_str(t: Termination) -> &'static str {
    match t {
        Termination::Halt => "halt",
        Termination::StepLimit => "step-limit",
        Termination::Fault(_) => "fault",
    }
}

fn hex_bytes(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn format_outcome(outcome: &InversionOutcome) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "target seq={} src={} occurrence={} taken={}",
        outcome.seq, outcome.src, outcome.occurrence, outcome.original_taken
    );
    for q in outcome.queries() {
        let mut kept: Vec<String> = q.kept_seqs.iter().map(usize::to_string).collect();
        kept.push("NEG".to_string());
        let _ = write!(
            out,
            "{}: [{}] status={} candidates={}",
            q.kind,
            kept.join(","),
            q.status.as_str(),
            q.candidates_tried
        );
        if let Some(input) = &q.input {
            let model: Vec<String> = input
                .model
                .iter()
                .map(|(k, v)| format!("{k}:0x{v:02x}"))
                .collect();
            let _ = write!(
                out,
                " model={{{}}} input={} validation={}",
                model.join(","),
                hex_bytes(&input.bytes),
                input.validation.as_str()
            );
        }
        let _ = writeln!(out);
    }
    if outcome.sopt_matched_optimistic {
        let _ = writeln!(out, "strong_optimistic: matches optimistic, not queried twice");
    }
    for err in &outcome.errors {
        let _ = writeln!(out, "error: {err}");
    }
    out
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Analysis(format!("cannot create {}: {e}", dir.display())))
}

fn dump_queries(
    dir: &Path,
    predicate: &concolab::sym::PathPredicate,
    target_seq: usize,
) -> Result<(), CliError> {
    ensure_dir(dir)?;
    let sliced = slice(predicate, target_seq);
    let optimistic = build_optimistic(predicate, target_seq);
    let strong = build_strong_optimistic(predicate, &sliced, target_seq);
    for query in [&sliced, &optimistic, &strong] {
        let path = dir.join(format!("q{}_{}.smt2", target_seq, query.kind));
        std::fs::write(&path, export_smt(query))
            .map_err(|e| CliError::Analysis(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn write_campaign_outputs(
    dir: &Path,
    campaign: &CampaignRun,
    smt_dump: bool,
) -> Result<(), CliError> {
    ensure_dir(dir)?;
    let write = |path: PathBuf, bytes: &[u8]| -> Result<(), CliError> {
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::Analysis(format!("cannot write {}: {e}", path.display())))
    };
    for entry in campaign.corpus_entries() {
        write(dir.join(entry.file_name()), &entry.bytes)?;
    }
    write(dir.join("report.txt"), campaign.report.to_kv().as_bytes())?;
    let csv = format!(
        "{}\n{}\n",
        CampaignReport::CSV_HEADER,
        campaign.report.to_csv_row()
    );
    write(dir.join("report.csv"), csv.as_bytes())?;

    if smt_dump {
        for outcome in &campaign.outcomes {
            for q in outcome.queries() {
                let query = match q.kind {
                    QueryKind::Sliced => slice(&campaign.predicate, outcome.seq),
                    QueryKind::Optimistic => build_optimistic(&campaign.predicate, outcome.seq),
                    QueryKind::StrongOptimistic => {
                        let sliced = slice(&campaign.predicate, outcome.seq);
                        build_strong_optimistic(&campaign.predicate, &sliced, outcome.seq)
                    }
                };
                let path = dir.join(format!("q{}_{}.smt2", outcome.seq, query.kind));
                write(path, export_smt(&query).as_bytes())?;
            }
        }
    }
    Ok(())
}
