//! Runtime against problem size: fresh tasks per size, median plan time,
//! optionally next to an external planner run on the same files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use genplan_core::{render_domain, render_task, Task};
use genplan_domains::{generate, DomainId, GenError, GenParams, Split};
use genplan_synth::{evaluate, ProgramSource, TaskResult};
use serde::{Deserialize, Serialize};

use crate::config::ExecutorConfig;
use crate::experiment::{build_executor, eval_oracle};
use crate::CliError;

pub const TASKS_PER_SIZE: usize = 10;

pub enum BenchSource {
    Oracle,
    Program { program: ProgramSource, executor: ExecutorConfig },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSample {
    pub domain: DomainId,
    /// `program` or `planner`.
    pub source: String,
    pub size: usize,
    pub tasks: usize,
    pub median_objects: f64,
    pub solved: usize,
    /// Median per-task time; unset when the curve was cut short here.
    pub median_s: Option<f64>,
    /// This size failed and larger sizes were skipped.
    pub partial: bool,
}

pub fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[mid] } else { (xs[mid - 1] + xs[mid]) / 2.0 })
}

/// The evaluation range plus two and four times its maximum.
pub fn default_grid(domain: DomainId) -> Vec<usize> {
    let (lo, hi) = domain.object_range(Split::Eval);
    let mut grid = vec![lo, hi, 2 * hi, 4 * hi];
    grid.dedup();
    grid
}

/// `count` fresh tasks of about `size` objects. Sizes some generators cannot
/// hit exactly fall back to a ±10% window.
pub fn tasks_at(domain: DomainId, size: usize, count: usize, seed: u64) -> Result<Vec<Task>, GenError> {
    let mut params = GenParams {
        domain,
        split: Split::Eval,
        objects: (size, size),
        count,
        seed,
        heavy_covering_only: false,
    };
    match generate(&params) {
        Err(GenError::Infeasible { .. }) => {
            params.objects = (size - size / 10, size + size / 10);
            generate(&params)
        }
        other => other,
    }
}

fn planner_times(template: &str, dir: &Path, domain: DomainId, tasks: &[Task], budget: Duration) -> Result<Vec<Option<f64>>, CliError> {
    let domain_file = dir.join("domain.pddl");
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_owned(), e))?;
    fs::write(&domain_file, render_domain(domain.domain())).map_err(|e| CliError::Io(domain_file.clone(), e))?;
    let mut out = Vec::new();
    for task in tasks {
        let problem = dir.join(format!("{}.pddl", task.name));
        fs::write(&problem, render_task(task)).map_err(|e| CliError::Io(problem.clone(), e))?;
        let cmd = template
            .replace("{domain}", &domain_file.display().to_string())
            .replace("{problem}", &problem.display().to_string());
        let start = Instant::now();
        let mut child = Command::new("sh")
            .args(["-c", &cmd])
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| CliError::Io(PathBuf::from("sh"), e))?;
        let status = loop {
            if let Some(status) = child.try_wait().map_err(|e| CliError::Io(PathBuf::from("sh"), e))? {
                break Some(status);
            }
            if start.elapsed() > budget {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let elapsed = start.elapsed().as_secs_f64();
        out.push(status.filter(|s| s.success()).map(|_| elapsed));
    }
    Ok(out)
}

fn sample(domain: DomainId, source: &str, size: usize, tasks: &[Task], times: &[Option<f64>]) -> BenchSample {
    let mut objects: Vec<f64> = tasks.iter().map(|t| t.objects.len() as f64).collect();
    let solved = times.iter().flatten().count();
    let mut ok: Vec<f64> = times.iter().flatten().copied().collect();
    let partial = solved < tasks.len();
    BenchSample {
        domain,
        source: source.into(),
        size,
        tasks: tasks.len(),
        median_objects: median(&mut objects).unwrap_or(0.0),
        solved,
        median_s: if partial { None } else { median(&mut ok) },
        partial,
    }
}

fn program_times(source: &BenchSource, domain: DomainId, tasks: &[Task], budget: Duration) -> Result<Vec<Option<f64>>, CliError> {
    let results: Vec<TaskResult> = match source {
        BenchSource::Oracle => eval_oracle(domain, tasks, budget),
        BenchSource::Program { program, executor } => {
            let exec = build_executor(executor, domain, None);
            evaluate(program, domain.domain(), tasks, exec.as_ref(), budget)?
        }
    };
    // Plan time is measured around the call itself, so spawn cost is left out.
    Ok(results
        .iter()
        .map(|r| r.solved.then(|| r.plan_time_s.unwrap_or(r.wall_time_s)))
        .collect())
}

/// One sample per size for the program and, with a planner template, one
/// for the planner. A curve stops at the first size with a failure.
pub fn bench(
    domain: DomainId,
    sizes: &[usize],
    per_size: usize,
    seed: u64,
    source: &BenchSource,
    planner: Option<(&str, &Path)>,
    budget: Duration,
) -> Result<Vec<BenchSample>, CliError> {
    let mut out = Vec::new();
    let (mut program_live, mut planner_live) = (true, planner.is_some());
    for &size in sizes {
        if !program_live && !planner_live {
            break;
        }
        let tasks = tasks_at(domain, size, per_size, seed)?;
        if program_live {
            let s = sample(domain, "program", size, &tasks, &program_times(source, domain, &tasks, budget)?);
            program_live = !s.partial;
            out.push(s);
        }
        if let (true, Some((template, dir))) = (planner_live, planner) {
            let times = planner_times(template, &dir.join(size.to_string()), domain, &tasks, budget)?;
            let s = sample(domain, "planner", size, &tasks, &times);
            planner_live = !s.partial;
            out.push(s);
        }
    }
    Ok(out)
}

pub fn write_samples(path: &Path, samples: &[BenchSample]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_owned(), e))?;
    }
    let err = |e: csv::Error| CliError::Config(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for s in samples {
        w.serialize(s).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Io(path.to_owned(), e))
}
