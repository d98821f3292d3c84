//! External solver adapter.
//!
//! Process-boundary contract: the adapter receives an SMT-LIB script on
//! stdin and prints its verdict on stdout — first line `sat`, `unsat`, or
//! `unknown`, then for `sat` one binding per line in the form
//! `k!<index> <value>` where the value is decimal, `0x..`, `#x..`, or
//! `#b..`. Variables the adapter leaves unbound fall back to seed values
//! when the model is merged.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::process::{Command, Stdio};
use std::time::Instant;

use crate::strategy::InversionQuery;

use super::smt::export_smt;
use super::{Status, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum ExternalSolverError {
    #[error("external solver command is empty")]
    EmptyCommand,
    #[error("failed to run `{command}`: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
    #[error("external solver exited with {status} and no verdict")]
    NoVerdict { status: std::process::ExitStatus },
    #[error("unrecognized verdict line `{0}`")]
    BadVerdict(String),
    #[error("unparseable model binding `{0}`")]
    BadBinding(String),
    #[error("i/o error talking to external solver: {0}")]
    Io(#[from] std::io::Error),
}

/// Runs an external solver process per the adapter contract above.
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    /// Program followed by its arguments.
    pub command: Vec<String>,
}

impl ExternalSolver {
    pub fn new(command: Vec<String>) -> ExternalSolver {
        ExternalSolver { command }
    }

    pub fn solve(&self, query: &InversionQuery) -> Result<Verdict, ExternalSolverError> {
        let Some((program, args)) = self.command.split_first() else {
            return Err(ExternalSolverError::EmptyCommand);
        };
        let start = Instant::now();
        let script = export_smt(query);

        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| ExternalSolverError::Spawn {
                command: self.command.join(" "),
                source,
            })?;
        child
            .stdin
            .take()
            .expect("stdin was piped")
            .write_all(script.as_bytes())?;
        let output = child.wait_with_output()?;
        let stdout = String::from_utf8_lossy(&output.stdout);
        let mut lines = stdout.lines().map(str::trim).filter(|l| !l.is_empty());

        let verdict = lines
            .next()
            .ok_or(ExternalSolverError::NoVerdict { status: output.status })?;
        let status = match verdict {
            "sat" => Status::Sat,
            "unsat" => Status::Unsat,
            "unknown" => Status::Timeout,
            other => return Err(ExternalSolverError::BadVerdict(other.to_string())),
        };

        let model = if status == Status::Sat {
            let mut model = BTreeMap::new();
            for line in lines {
                let (index, value) = parse_binding(line)?;
                model.insert(index, value);
            }
            Some(model)
        } else {
            None
        };

        Ok(Verdict {
            status,
            model,
            candidates_tried: 0,
            elapsed: start.elapsed(),
        })
    }
}

fn parse_binding(line: &str) -> Result<(u32, u8), ExternalSolverError> {
    let bad = || ExternalSolverError::BadBinding(line.to_string());
    let mut parts = line.split_whitespace();
    let name = parts.next().ok_or_else(bad)?;
    let value = parts.next().ok_or_else(bad)?;
    if parts.next().is_some() {
        return Err(bad());
    }
    let index: u32 = name.strip_prefix("k!").ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let value: u8 = if let Some(hex) = value.strip_prefix("#x").or_else(|| value.strip_prefix("0x")) {
        u8::from_str_radix(hex, 16).map_err(|_| bad())?
    } else if let Some(bin) = value.strip_prefix("#b") {
        u8::from_str_radix(bin, 2).map_err(|_| bad())?
    } else {
        value.parse().map_err(|_| bad())?
    };
    Ok((index, value))
}
