//! Running (domain, seed, approach) cells: generate tasks, synthesize or run
//! a baseline, evaluate, and append a record.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use genplan_core::{ablate_names, validate, Domain, NameMap, Plan, Task, ValidationResult};
use genplan_domains::{generate, oracle_plan, random_rollout, DomainId, GenParams, Split};
use genplan_synth::exec::OracleFn;
use genplan_synth::llm::transcript_file_name;
use genplan_synth::{
    evaluate, synthesize, ChatProvider, Executor, FeedbackKind, ProcessExecutor, ProviderConfig, ProviderKind,
    ReplayProvider, SessionState, SimulatedExecutor, TaskResult, Transcript,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Approach, CellSettings, ExecMode, ExecutorConfig, ExperimentConfig};
use crate::records::{latest_per_cell, load_records, EvalOutcome, RecordSink, ReportRecord};
use crate::CliError;

/// Where a run directory keeps its files.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn tasks(&self) -> PathBuf {
        self.root.join("tasks")
    }

    pub fn records(&self) -> PathBuf {
        self.root.join("records.jsonl")
    }

    pub fn sessions(&self) -> PathBuf {
        self.root.join("sessions")
    }

    pub fn programs(&self) -> PathBuf {
        self.root.join("programs")
    }

    pub fn report(&self) -> PathBuf {
        self.root.join("report")
    }

    pub fn bench(&self) -> PathBuf {
        self.root.join("bench")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cell {
    pub domain: DomainId,
    pub seed: u64,
    pub approach: Approach,
}

impl Cell {
    pub fn stem(&self) -> String {
        let file = transcript_file_name(self.domain.name(), self.seed, self.approach.name());
        file.trim_end_matches(".json").to_owned()
    }
}

pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &domain in &cfg.domains {
        for &seed in &cfg.seeds {
            for &approach in &cfg.approaches {
                out.push(Cell { domain, seed, approach });
            }
        }
    }
    out
}

/// The domain and tasks a cell works on; renamed for the no-names ablation.
pub struct CellTasks {
    pub domain: Domain,
    pub train: Vec<Task>,
    pub eval: Vec<Task>,
    pub names: Option<NameMap>,
}

pub fn cell_tasks(cell: &Cell) -> Result<CellTasks, CliError> {
    let train = generate(&GenParams::new(cell.domain, Split::Train, cell.seed))?;
    let eval = generate(&GenParams::new(cell.domain, Split::Eval, cell.seed))?;
    let domain = cell.domain.domain();
    if cell.approach != Approach::NoNames {
        return Ok(CellTasks {
            domain: domain.clone(),
            train,
            eval,
            names: None,
        });
    }
    let n_train = train.len();
    let all: Vec<Task> = train.into_iter().chain(eval).collect();
    let (domain, mut renamed, map) = ablate_names(domain, &all);
    let eval = renamed.split_off(n_train);
    Ok(CellTasks {
        domain,
        train: renamed,
        eval,
        names: Some(map),
    })
}

/// The simulated executor's oracle; under renaming it maps the task back,
/// plans, and renames the plan.
fn sim_oracle(domain: DomainId, names: Option<&NameMap>) -> OracleFn {
    match names {
        None => Arc::new(move |t: &Task| oracle_plan(domain, t).ok()),
        Some(map) => {
            let (forward, inverse) = (map.clone(), map.inverse());
            Arc::new(move |t: &Task| {
                let plan = oracle_plan(domain, &inverse.apply_task(t)).ok()?;
                Some(plan.iter().map(|a| forward.apply_action(a)).collect())
            })
        }
    }
}

pub fn build_executor(cfg: &ExecutorConfig, domain: DomainId, names: Option<&NameMap>) -> Box<dyn Executor> {
    match cfg.mode {
        ExecMode::Simulate => Box::new(SimulatedExecutor::new(sim_oracle(domain, names))),
        ExecMode::Shim => Box::new(ProcessExecutor::new(cfg.command.clone())),
    }
}

/// The configured provider for a cell; a replay path naming a directory
/// picks the cell's transcript inside it.
fn build_provider(cfg: &ProviderConfig, cell: &Cell) -> Result<Box<dyn ChatProvider>, CliError> {
    let mut cfg = cfg.clone();
    if cfg.provider == ProviderKind::Replay {
        if let Some(dir) = cfg.replay_path.as_ref().filter(|p| p.is_dir()) {
            cfg.replay_path = Some(dir.join(format!("{}.json", cell.stem())));
        }
    }
    Ok(cfg.build()?)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_owned(), e))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(path.to_owned(), e))
}

/// Synthesize a cell's program, or load it if a finished session is on
/// disk. A transcript left by an interrupted session is replayed first and
/// the configured provider takes over where it ends.
pub fn synthesize_cell(
    layout: &Layout,
    settings: &CellSettings,
    cell: &Cell,
    tasks: &CellTasks,
) -> Result<SessionState, CliError> {
    let dir = layout.sessions();
    let stem = cell.stem();
    let state_path = dir.join(format!("{stem}.state.json"));
    if state_path.exists() {
        let text = fs::read_to_string(&state_path).map_err(|e| CliError::Io(state_path.clone(), e))?;
        return serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", state_path.display())));
    }
    let transcript_path = dir.join(format!("{stem}.json"));
    let mut provider = build_provider(&settings.provider, cell)?;
    if transcript_path.exists() {
        log::info!("{stem}: resuming from saved transcript");
        provider = Box::new(ReplayProvider::with_fallback(Transcript::load(&transcript_path)?, provider));
    }
    let executor = build_executor(&settings.executor, cell.domain, tasks.names.as_ref());
    match synthesize(&stem, &tasks.domain, &tasks.train, &settings.synthesis, provider.as_mut(), executor.as_ref()) {
        Ok(session) => {
            fs::create_dir_all(&dir).map_err(|e| CliError::Io(dir.clone(), e))?;
            session.persist(&dir, &stem)?;
            write_file(&layout.programs().join(format!("{stem}.py")), &session.program.text)?;
            Ok(session.state())
        }
        Err(e) => {
            // Keep the transcript only, so the next run resumes rather than
            // treating the cell as finished.
            e.session.transcript.persist(&transcript_path)?;
            Err(CliError::Session(e.to_string()))
        }
    }
}

fn result(task: &Task, plan: Option<&Plan>, elapsed: Duration, budget: Duration, valid: bool) -> TaskResult {
    let solved = valid && elapsed <= budget;
    TaskResult {
        task: task.name.clone(),
        solved,
        wall_time_s: elapsed.as_secs_f64(),
        plan_time_s: Some(elapsed.as_secs_f64()),
        failure: match (solved, elapsed > budget) {
            (true, _) => None,
            (false, true) => Some(FeedbackKind::Timeout),
            (false, false) => Some(FeedbackKind::PlanSemantics),
        },
        plan_len: plan.filter(|_| solved).map(Vec::len),
    }
}

/// The hand-written generalized plan, run and validated in-process.
pub fn eval_oracle(domain: DomainId, tasks: &[Task], budget: Duration) -> Vec<TaskResult> {
    tasks
        .iter()
        .map(|task| {
            let start = Instant::now();
            let plan = oracle_plan(domain, task).ok();
            let elapsed = start.elapsed();
            let valid = plan
                .as_ref()
                .is_some_and(|p| validate(p, domain.domain(), task) == ValidationResult::Valid);
            result(task, plan.as_ref(), elapsed, budget, valid)
        })
        .collect()
}

/// RNG for the random baseline on one task of a cell.
pub fn rollout_rng(domain: DomainId, seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 32) | index as u64);
    rng
}

/// Uniformly random applicable actions until goal, dead end or horizon.
pub fn eval_random(domain: DomainId, seed: u64, tasks: &[Task], horizon: usize, budget: Duration) -> Vec<TaskResult> {
    tasks
        .iter()
        .enumerate()
        .map(|(i, task)| {
            let start = Instant::now();
            let plan = random_rollout(domain.domain(), task, horizon, &mut rollout_rng(domain, seed, i));
            let elapsed = start.elapsed();
            let valid = plan
                .as_ref()
                .is_some_and(|p| validate(p, domain.domain(), task) == ValidationResult::Valid);
            result(task, plan.as_ref(), elapsed, budget, valid)
        })
        .collect()
}

fn outcomes(tasks: &[Task], results: Vec<TaskResult>) -> Vec<EvalOutcome> {
    tasks
        .iter()
        .zip(results)
        .map(|(t, result)| EvalOutcome {
            result,
            objects: t.objects.len(),
        })
        .collect()
}

fn baseline_record(cell: &Cell, eval: Vec<EvalOutcome>) -> ReportRecord {
    ReportRecord {
        domain: cell.domain,
        seed: cell.seed,
        approach: cell.approach,
        complete: true,
        error: None,
        eval,
        rounds_used: 0,
        max_rounds: 0,
        validated: true,
        error_history: vec![],
        final_failure: None,
        tasks_used: 0,
    }
}

/// Rounds the cell could have used; none when debugging is off.
fn round_budget(settings: &CellSettings) -> usize {
    if settings.synthesis.debug_enabled {
        settings.synthesis.max_debug_rounds
    } else {
        0
    }
}

fn incomplete(cell: &Cell, settings: &CellSettings, error: String) -> ReportRecord {
    ReportRecord {
        domain: cell.domain,
        seed: cell.seed,
        approach: cell.approach,
        complete: false,
        error: Some(error),
        eval: vec![],
        rounds_used: 0,
        max_rounds: round_budget(settings),
        validated: false,
        error_history: vec![],
        final_failure: None,
        tasks_used: 0,
    }
}

/// Run one cell to a record. Errors become incomplete records.
pub fn run_cell(cfg: &ExperimentConfig, layout: &Layout, cell: &Cell) -> ReportRecord {
    let settings = cfg.settings(cell.approach);
    let tasks = match cell_tasks(cell) {
        Ok(t) => t,
        Err(e) => return incomplete(cell, &settings, e.to_string()),
    };
    match cell.approach {
        Approach::Oracle => baseline_record(cell, outcomes(&tasks.eval, eval_oracle(cell.domain, &tasks.eval, settings.budget))),
        Approach::Random => baseline_record(
            cell,
            outcomes(
                &tasks.eval,
                eval_random(cell.domain, cell.seed, &tasks.eval, settings.horizon, settings.budget),
            ),
        ),
        _ => {
            let state = match synthesize_cell(layout, &settings, cell, &tasks) {
                Ok(s) => s,
                Err(e) => return incomplete(cell, &settings, e.to_string()),
            };
            let executor = build_executor(&settings.executor, cell.domain, tasks.names.as_ref());
            let results = match evaluate(&state.program, &tasks.domain, &tasks.eval, executor.as_ref(), settings.budget) {
                Ok(r) => r,
                Err(e) => return incomplete(cell, &settings, format!("evaluation: {e}")),
            };
            ReportRecord {
                domain: cell.domain,
                seed: cell.seed,
                approach: cell.approach,
                complete: true,
                error: None,
                eval: outcomes(&tasks.eval, results),
                rounds_used: state.rounds_used,
                max_rounds: round_budget(&settings),
                validated: state.validated,
                error_history: state.error_history.iter().map(|e| e.kind).collect(),
                final_failure: state.final_failure.as_ref().map(|e| e.kind),
                tasks_used: state.tasks_used.len(),
            }
        }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Run every cell that has no complete record yet, appending records as
/// cells finish. Returns the latest record of every cell on disk.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReportRecord>, CliError> {
    let layout = Layout::new(&cfg.out_dir);
    let done: BTreeSet<_> = load_records(&layout.records())?
        .iter()
        .filter(|r| r.complete)
        .map(ReportRecord::key)
        .collect();
    let todo: Vec<Cell> = cells(cfg)
        .into_iter()
        .filter(|c| !done.contains(&(c.domain, c.seed, c.approach)))
        .collect();
    log::info!("{} cell(s) to run, {} already complete", todo.len(), done.len());
    let sink = RecordSink::open(&layout.records())?;
    let written: Vec<Result<(), CliError>> = pool(cfg.workers)?.install(|| {
        todo.par_iter()
            .map(|cell| {
                let record = run_cell(cfg, &layout, cell);
                match &record.error {
                    Some(e) => log::warn!("{}: incomplete: {e}", cell.stem()),
                    None => log::info!("{}: {}/{} solved", cell.stem(), record.solved(), record.eval.len()),
                }
                sink.push(&record)
            })
            .collect()
    });
    written.into_iter().collect::<Result<(), _>>()?;
    Ok(latest_per_cell(&load_records(&layout.records())?))
}

/// Synthesize programs for every LLM cell without evaluating them.
pub fn synthesize_all(cfg: &ExperimentConfig) -> Result<Vec<(Cell, Result<SessionState, String>)>, CliError> {
    let layout = Layout::new(&cfg.out_dir);
    let todo: Vec<Cell> = cells(cfg).into_iter().filter(|c| c.approach.uses_llm()).collect();
    Ok(pool(cfg.workers)?.install(|| {
        todo.par_iter()
            .map(|cell| {
                let settings = cfg.settings(cell.approach);
                let out = cell_tasks(cell)
                    .and_then(|tasks| synthesize_cell(&layout, &settings, cell, &tasks))
                    .map_err(|e| e.to_string());
                (*cell, out)
            })
            .collect()
    }))
}
