//! One JSON line per (domain, seed, approach) cell, appended as cells finish.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use genplan_domains::DomainId;
use genplan_synth::{FeedbackKind, TaskResult};
use serde::{Deserialize, Serialize};

use crate::config::Approach;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    #[serde(flatten)]
    pub result: TaskResult,
    pub objects: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub domain: DomainId,
    pub seed: u64,
    pub approach: Approach,
    /// False when a provider or executor error stopped the cell.
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub eval: Vec<EvalOutcome>,
    pub rounds_used: usize,
    pub max_rounds: usize,
    /// Whether the final program passed every training task.
    pub validated: bool,
    /// Failures fed back during debugging, in order.
    pub error_history: Vec<FeedbackKind>,
    /// The failure still present when debugging stopped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_failure: Option<FeedbackKind>,
    pub tasks_used: usize,
}

pub type CellKey = (DomainId, u64, Approach);

impl ReportRecord {
    pub fn key(&self) -> CellKey {
        (self.domain, self.seed, self.approach)
    }

    pub fn solved(&self) -> usize {
        self.eval.iter().filter(|e| e.result.solved).count()
    }

    pub fn fraction(&self) -> f64 {
        if self.eval.is_empty() {
            0.0
        } else {
            self.solved() as f64 / self.eval.len() as f64
        }
    }

    /// Every evaluation task solved.
    pub fn success(&self) -> bool {
        !self.eval.is_empty() && self.solved() == self.eval.len()
    }

    /// Every training error met, fed back or not.
    pub fn errors(&self) -> impl Iterator<Item = FeedbackKind> + '_ {
        self.error_history.iter().copied().chain(self.final_failure)
    }

    /// The debug round after which the program stopped changing.
    pub fn settle_round(&self) -> usize {
        if self.validated {
            self.rounds_used
        } else {
            self.max_rounds.max(self.rounds_used)
        }
    }
}

/// Serializes record writes from parallel workers into one file.
pub struct RecordSink {
    path: PathBuf,
    file: Mutex<File>,
}

impl RecordSink {
    pub fn open(path: &Path) -> Result<Self, CliError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_owned(), e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| CliError::Io(path.to_owned(), e))?;
        Ok(RecordSink {
            path: path.to_owned(),
            file: Mutex::new(file),
        })
    }

    pub fn push(&self, record: &ReportRecord) -> Result<(), CliError> {
        let mut line = serde_json::to_string(record).expect("record serializes");
        line.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(line.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| CliError::Io(self.path.clone(), e))
    }
}

/// Read a records file. A torn final line, left by a crash mid-write, is
/// skipped; a malformed line anywhere else is an error.
pub fn load_records(path: &Path) -> Result<Vec<ReportRecord>, CliError> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::Io(path.to_owned(), e)),
    };
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(e) if i + 1 == lines.len() && !text.ends_with('\n') => {
                log::warn!("{}: skipping torn last line: {e}", path.display());
            }
            Err(e) => return Err(CliError::Config(format!("{}:{}: {e}", path.display(), i + 1))),
        }
    }
    Ok(out)
}

/// The last record written for each cell, in cell order.
pub fn latest_per_cell(records: &[ReportRecord]) -> Vec<ReportRecord> {
    let mut latest: BTreeMap<CellKey, &ReportRecord> = BTreeMap::new();
    for r in records {
        latest.insert(r.key(), r);
    }
    latest.into_values().cloned().collect()
}
