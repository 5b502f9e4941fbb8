//! Aggregation of cell records into the result tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use genplan_domains::DomainId;
use genplan_synth::FeedbackKind;
use serde::{Deserialize, Serialize};

use crate::config::Approach;
use crate::records::{latest_per_cell, ReportRecord};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRow {
    pub domain: DomainId,
    pub approach: Approach,
    pub seeds: usize,
    pub mean: f64,
    pub max: f64,
}

/// Share of each error kind within one approach; columns are all trials,
/// trials whose program then solved every evaluation task, and the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub approach: Approach,
    pub kind: FeedbackKind,
    pub all: f64,
    pub success: f64,
    pub failure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTotals {
    pub approach: Approach,
    pub all: usize,
    pub success: usize,
    pub failure: usize,
}

/// Mean solve fraction had debugging stopped after `round` rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub approach: Approach,
    pub round: usize,
    pub mean: f64,
    pub stderr: f64,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistBin {
    pub approach: Approach,
    pub tasks_used: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeSample {
    pub domain: DomainId,
    pub approach: Approach,
    pub seed: u64,
    pub task: String,
    pub objects: usize,
    pub solved: bool,
    pub wall_time_s: f64,
    pub plan_time_s: Option<f64>,
}

/// A cell that solved some but not all evaluation tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fractional {
    pub domain: DomainId,
    pub seed: u64,
    pub approach: Approach,
    pub solved: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incomplete {
    pub domain: DomainId,
    pub seed: u64,
    pub approach: Approach,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub solve: Vec<SolveRow>,
    pub errors: Vec<ErrorRow>,
    pub error_totals: Vec<ErrorTotals>,
    pub debug_curve: Vec<CurvePoint>,
    pub tasks_used: Vec<HistBin>,
    pub runtime: Vec<RuntimeSample>,
    pub fractional: Vec<Fractional>,
    pub incomplete: Vec<Incomplete>,
}

fn percentages(counts: &BTreeMap<FeedbackKind, usize>) -> (BTreeMap<FeedbackKind, f64>, usize) {
    let total: usize = counts.values().sum();
    let pct = FeedbackKind::ALL
        .iter()
        .map(|k| {
            let n = counts.get(k).copied().unwrap_or(0);
            (*k, if total == 0 { 0.0 } else { 100.0 * n as f64 / total as f64 })
        })
        .collect();
    (pct, total)
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregate records. Only the last record per cell counts, and only
/// complete cells enter the tables; incomplete ones are listed separately.
pub fn compute_metrics(records: &[ReportRecord]) -> MetricsTable {
    let latest = latest_per_cell(records);
    let mut table = MetricsTable::default();
    let mut complete: Vec<&ReportRecord> = Vec::new();
    for r in &latest {
        if r.complete {
            complete.push(r);
        } else {
            table.incomplete.push(Incomplete {
                domain: r.domain,
                seed: r.seed,
                approach: r.approach,
                error: r.error.clone().unwrap_or_default(),
            });
        }
    }

    let mut by_cell: BTreeMap<(DomainId, Approach), Vec<f64>> = BTreeMap::new();
    let mut by_approach: BTreeMap<Approach, Vec<&ReportRecord>> = BTreeMap::new();
    for r in &complete {
        by_cell.entry((r.domain, r.approach)).or_default().push(r.fraction());
        by_approach.entry(r.approach).or_default().push(r);
        let solved = r.solved();
        if solved > 0 && solved < r.eval.len() {
            table.fractional.push(Fractional {
                domain: r.domain,
                seed: r.seed,
                approach: r.approach,
                solved,
                total: r.eval.len(),
            });
        }
        for e in &r.eval {
            table.runtime.push(RuntimeSample {
                domain: r.domain,
                approach: r.approach,
                seed: r.seed,
                task: e.result.task.clone(),
                objects: e.objects,
                solved: e.result.solved,
                wall_time_s: e.result.wall_time_s,
                plan_time_s: e.result.plan_time_s,
            });
        }
    }
    for ((domain, approach), fractions) in by_cell {
        table.solve.push(SolveRow {
            domain,
            approach,
            seeds: fractions.len(),
            mean: fractions.iter().sum::<f64>() / fractions.len() as f64,
            max: fractions.iter().copied().fold(0.0, f64::max),
        });
    }

    for (approach, rs) in by_approach {
        if approach.uses_llm() {
            let mut counts: [BTreeMap<FeedbackKind, usize>; 3] = Default::default();
            for r in &rs {
                let column = if r.success() { 1 } else { 2 };
                for k in r.errors() {
                    *counts[0].entry(k).or_default() += 1;
                    *counts[column].entry(k).or_default() += 1;
                }
            }
            let [(all, n_all), (success, n_success), (failure, n_failure)] = counts.each_ref().map(percentages);
            for k in FeedbackKind::ALL {
                table.errors.push(ErrorRow {
                    approach,
                    kind: k,
                    all: all[&k],
                    success: success[&k],
                    failure: failure[&k],
                });
            }
            table.error_totals.push(ErrorTotals {
                approach,
                all: n_all,
                success: n_success,
                failure: n_failure,
            });

            let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
            for r in &rs {
                *hist.entry(r.tasks_used).or_default() += 1;
            }
            table.tasks_used.extend(hist.into_iter().map(|(tasks_used, count)| HistBin {
                approach,
                tasks_used,
                count,
            }));
        }

        let last = rs.iter().map(|r| r.settle_round()).max().unwrap_or(0);
        for round in 0..=last {
            let xs: Vec<f64> = rs
                .iter()
                .map(|r| if r.settle_round() <= round { r.fraction() } else { 0.0 })
                .collect();
            let (mean, stderr) = mean_stderr(&xs);
            table.debug_curve.push(CurvePoint {
                approach,
                round,
                mean,
                stderr,
                records: xs.len(),
            });
        }
    }
    table
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Config(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_path(path).map_err(io)?;
    if rows.is_empty() {
        w.write_record(header).map_err(io)?;
    }
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(path.to_owned(), e))
}

/// One CSV per table plus `metrics.json` with everything.
pub fn write_report(table: &MetricsTable, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_owned(), e))?;
    write_csv(&dir.join("solve.csv"), &table.solve, &["domain", "approach", "seeds", "mean", "max"])?;
    write_csv(&dir.join("errors.csv"), &table.errors, &["approach", "kind", "all", "success", "failure"])?;
    write_csv(&dir.join("error_totals.csv"), &table.error_totals, &["approach", "all", "success", "failure"])?;
    write_csv(
        &dir.join("debug_curve.csv"),
        &table.debug_curve,
        &["approach", "round", "mean", "stderr", "records"],
    )?;
    write_csv(&dir.join("tasks_used.csv"), &table.tasks_used, &["approach", "tasks_used", "count"])?;
    write_csv(
        &dir.join("runtime.csv"),
        &table.runtime,
        &["domain", "approach", "seed", "task", "objects", "solved", "wall_time_s", "plan_time_s"],
    )?;
    write_csv(
        &dir.join("fractional.csv"),
        &table.fractional,
        &["domain", "seed", "approach", "solved", "total"],
    )?;
    write_csv(
        &dir.join("incomplete.csv"),
        &table.incomplete,
        &["domain", "seed", "approach", "error"],
    )?;
    let mut json = serde_json::to_string_pretty(table).expect("metrics serialize");
    json.push('\n');
    let path = dir.join("metrics.json");
    fs::write(&path, json).map_err(|e| CliError::Io(path, e))
}
