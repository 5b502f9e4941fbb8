//! Experiment configuration: one TOML file, with per-approach overrides and
//! command-line flags layered on top.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use genplan_domains::{DomainId, DEFAULT_HORIZON};
use genplan_synth::{PromptMode, ProviderConfig, SynthesisConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approach {
    Full,
    NoCot,
    NoDebug,
    NoNames,
    Random,
    Oracle,
}

impl Approach {
    pub const ALL: [Approach; 6] = [
        Approach::Full,
        Approach::NoCot,
        Approach::NoDebug,
        Approach::NoNames,
        Approach::Random,
        Approach::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Approach::Full => "full",
            Approach::NoCot => "no-cot",
            Approach::NoDebug => "no-debug",
            Approach::NoNames => "no-names",
            Approach::Random => "random",
            Approach::Oracle => "oracle",
        }
    }

    /// Whether the approach talks to a chat provider.
    pub fn uses_llm(self) -> bool {
        !matches!(self, Approach::Random | Approach::Oracle)
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Approach {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Approach::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| CliError::Config(format!("unknown approach `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    /// A fresh shim process per call.
    #[default]
    Shim,
    /// In-process stand-in driven by `# genplan-sim:` directives.
    Simulate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutorConfig {
    pub mode: ExecMode,
    pub command: Vec<String>,
}

pub const DEFAULT_SHIM: &str = "genplan-shim";

impl Default for ExecutorConfig {
    fn default() -> Self {
        ExecutorConfig {
            mode: ExecMode::Shim,
            command: vec![DEFAULT_SHIM.into()],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub budget_s: Option<f64>,
    pub max_rounds: Option<usize>,
    pub provider: Option<ProviderConfig>,
    pub executor: Option<ExecutorConfig>,
    pub synthesis: Option<SynthesisConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub out_dir: PathBuf,
    pub domains: Vec<DomainId>,
    pub seeds: Vec<u64>,
    pub approaches: Vec<Approach>,
    pub budget_s: f64,
    pub max_rounds: usize,
    /// Parallel cells; 0 lets the thread pool decide.
    pub workers: usize,
    pub horizon: usize,
    pub executor: ExecutorConfig,
    pub provider: ProviderConfig,
    pub synthesis: SynthesisConfig,
    pub overrides: BTreeMap<Approach, Overrides>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            out_dir: "runs".into(),
            domains: DomainId::ALL.to_vec(),
            seeds: (0..10).collect(),
            approaches: vec![Approach::Oracle, Approach::Random],
            budget_s: 30.0,
            max_rounds: 4,
            workers: 0,
            horizon: DEFAULT_HORIZON,
            executor: ExecutorConfig::default(),
            provider: ProviderConfig::default(),
            synthesis: SynthesisConfig::default(),
            overrides: BTreeMap::new(),
        }
    }
}

/// Everything one (domain, seed, approach) cell needs.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSettings {
    pub budget: Duration,
    pub horizon: usize,
    pub synthesis: SynthesisConfig,
    pub provider: ProviderConfig,
    pub executor: ExecutorConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_owned(), e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn settings(&self, approach: Approach) -> CellSettings {
        let o = self.overrides.get(&approach).cloned().unwrap_or_default();
        let budget_s = o.budget_s.unwrap_or(self.budget_s);
        let mut synthesis = o.synthesis.unwrap_or_else(|| self.synthesis.clone());
        synthesis.max_debug_rounds = o.max_rounds.unwrap_or(self.max_rounds);
        synthesis.exec_budget_s = budget_s;
        match approach {
            Approach::NoCot => synthesis.mode = PromptMode::Merged,
            Approach::NoDebug => synthesis.debug_enabled = false,
            _ => {}
        }
        CellSettings {
            budget: Duration::from_secs_f64(budget_s.max(0.0)),
            horizon: self.horizon,
            synthesis,
            provider: o.provider.unwrap_or_else(|| self.provider.clone()),
            executor: o.executor.unwrap_or_else(|| self.executor.clone()),
        }
    }
}

/// `3`, `0-9` or `0,2,5-7`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Config(format!("bad seed list `{s}`"));
    let mut seeds = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    if seeds.is_empty() {
        return Err(bad());
    }
    seeds.dedup();
    Ok(seeds)
}

/// `all` or a comma-separated list of domain names.
pub fn parse_domains(s: &str) -> Result<Vec<DomainId>, CliError> {
    if s.trim() == "all" {
        return Ok(DomainId::ALL.to_vec());
    }
    s.split(',')
        .map(|d| d.parse::<DomainId>().map_err(|e| CliError::Config(e.to_string())))
        .collect()
}

pub fn parse_approaches(s: &str) -> Result<Vec<Approach>, CliError> {
    if s.trim() == "all" {
        return Ok(Approach::ALL.to_vec());
    }
    s.split(',').map(str::parse).collect()
}
