//! Campaign metrics and their text forms.

use std::fmt::Write as _;
use std::time::Duration;

use crate::strategy::QueryKind;

use super::outcome::{count_branches, InversionOutcome, Validation};
use super::Mode;

/// Per-query-kind aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KindStats {
    pub kind: QueryKind,
    pub queries: u32,
    pub sat: u32,
    pub saved: u32,
    pub correct_inputs: u32,
}

/// Aggregated results of one campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub mode: Mode,
    /// Target branches processed.
    pub targets: usize,
    /// Distinct branch sites among the targets.
    pub unique_sites: usize,
    /// Targets with at least one SAT query (max one per target).
    pub sat_branches: u32,
    /// Targets with at least one correct input (max one per target).
    pub correct_branches: u32,
    /// Branch sites with at least one SAT-counted target.
    pub sat_sites: u32,
    /// Branch sites with at least one correct target.
    pub correct_sites: u32,
    /// correct_branches / sat_branches, 0 when nothing was SAT.
    pub accuracy: f64,
    /// Correct branches per minute of inversion time.
    pub speed: f64,
    pub elapsed: Duration,
    pub per_kind: Vec<KindStats>,
    /// Unique edges covered by the seed alone.
    pub coverage_base: usize,
    /// Unique edges covered by the seed plus every generated input.
    pub coverage_generated: usize,
}

pub(super) fn accuracy(correct: u32, sat: u32) -> f64 {
    if sat == 0 {
        0.0
    } else {
        f64::from(correct) / f64::from(sat)
    }
}

pub(super) fn speed(correct: u32, elapsed: Duration) -> f64 {
    let minutes = elapsed.as_secs_f64() / 60.0;
    if minutes == 0.0 {
        0.0
    } else {
        f64::from(correct) / minutes
    }
}

pub(super) fn build_report(
    mode: Mode,
    outcomes: &[InversionOutcome],
    elapsed: Duration,
    coverage_base: usize,
    coverage_generated: usize,
) -> CampaignReport {
    let (sat_branches, correct_branches) = count_branches(outcomes);

    let mut sites: Vec<u32> = outcomes.iter().map(|o| o.src).collect();
    sites.sort_unstable();
    sites.dedup();
    let sat_sites = sites
        .iter()
        .filter(|&&s| outcomes.iter().any(|o| o.src == s && o.counted_sat() == 1))
        .count() as u32;
    let correct_sites = sites
        .iter()
        .filter(|&&s| outcomes.iter().any(|o| o.src == s && o.counted_correct() == 1))
        .count() as u32;

    let per_kind = [QueryKind::Sliced, QueryKind::Optimistic, QueryKind::StrongOptimistic]
        .into_iter()
        .map(|kind| {
            let queries = outcomes
                .iter()
                .flat_map(InversionOutcome::queries)
                .filter(|q| q.kind == kind);
            let mut stats = KindStats {
                kind,
                queries: 0,
                sat: 0,
                saved: 0,
                correct_inputs: 0,
            };
            for q in queries {
                stats.queries += 1;
                if q.status == crate::solver::Status::Sat {
                    stats.sat += 1;
                }
                if let Some(input) = &q.input {
                    stats.saved += 1;
                    if input.validation == Validation::Correct {
                        stats.correct_inputs += 1;
                    }
                }
            }
            stats
        })
        .collect();

    CampaignReport {
        mode,
        targets: outcomes.len(),
        unique_sites: sites.len(),
        sat_branches,
        correct_branches,
        sat_sites,
        correct_sites,
        accuracy: accuracy(correct_branches, sat_branches),
        speed: speed(correct_branches, elapsed),
        elapsed,
        per_kind,
        coverage_base,
        coverage_generated,
    }
}

impl CampaignReport {
    /// Structured text form, one `key=value` per line.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mode={}", self.mode);
        let _ = writeln!(out, "targets={}", self.targets);
        let _ = writeln!(out, "unique_sites={}", self.unique_sites);
        let _ = writeln!(out, "sat_branches={}", self.sat_branches);
        let _ = writeln!(out, "correct_branches={}", self.correct_branches);
        let _ = writeln!(out, "sat_sites={}", self.sat_sites);
        let _ = writeln!(out, "correct_sites={}", self.correct_sites);
        let _ = writeln!(out, "accuracy={:.4}", self.accuracy);
        let _ = writeln!(out, "speed={:.4}", self.speed);
        let _ = writeln!(out, "elapsed_seconds={:.3}", self.elapsed.as_secs_f64());
        let _ = writeln!(out, "coverage_base={}", self.coverage_base);
        let _ = writeln!(out, "coverage_generated={}", self.coverage_generated);
        for stats in &self.per_kind {
            let k = stats.kind.as_str();
            let _ = writeln!(out, "{k}_queries={}", stats.queries);
            let _ = writeln!(out, "{k}_sat={}", stats.sat);
            let _ = writeln!(out, "{k}_saved={}", stats.saved);
            let _ = writeln!(out, "{k}_correct={}", stats.correct_inputs);
        }
        out
    }

    pub const CSV_HEADER: &'static str = "mode,correct,sat,accuracy,speed,coverage";

    /// Machine-readable row matching [`Self::CSV_HEADER`].
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{:.4},{:.4},{}",
            self.mode,
            self.correct_branches,
            self.sat_branches,
            self.accuracy,
            self.speed,
            self.coverage_generated
        )
    }
}

/// One row of a configuration comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub label: String,
    pub report: CampaignReport,
}

/// Coverage comparison across strategy configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
}

impl CompareTable {
    /// Percentage coverage growth of row `i` over row `i - 1`.
    pub fn growth(&self, i: usize) -> Option<f64> {
        if i == 0 || i >= self.rows.len() {
            return None;
        }
        let prev = self.rows[i - 1].report.coverage_generated as f64;
        let cur = self.rows[i].report.coverage_generated as f64;
        if prev == 0.0 {
            return None;
        }
        Some((cur - prev) / prev * 100.0)
    }

    /// Human-readable table plus growth columns.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>6} {:>9} {:>10} {:>9} {:>8}",
            "config", "correct", "sat", "accuracy", "speed", "coverage", "growth"
        );
        for (i, row) in self.rows.iter().enumerate() {
            let growth = match self.growth(i) {
                Some(g) => format!("{g:+.2}%"),
                None => "-".to_string(),
            };
            let r = &row.report;
            let _ = writeln!(
                out,
                "{:<10} {:>8} {:>6} {:>9.4} {:>10.4} {:>9} {:>8}",
                row.label,
                r.correct_branches,
                r.sat_branches,
                r.accuracy,
                r.speed,
                r.coverage_generated,
                growth
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", CampaignReport::CSV_HEADER);
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.report.to_csv_row());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_is_zero_when_nothing_sat() {
        assert_eq!(accuracy(0, 0), 0.0);
        assert_eq!(accuracy(3, 4), 0.75);
    }

    #[test]
    fn speed_is_correct_per_minute() {
        assert_eq!(speed(6, Duration::from_secs(60)), 6.0);
        assert_eq!(speed(6, Duration::from_secs(120)), 3.0);
        assert_eq!(speed(0, Duration::ZERO), 0.0);
    }
}
