//! Writing generated and renamed PDDL to disk.

use std::fs;
use std::path::{Path, PathBuf};

use genplan_core::{ablate_names, parse_domain, parse_task, render_domain, render_task, Domain, Task};
use genplan_domains::{generate, DomainId, GenParams, Split};

use crate::CliError;

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_owned(), e))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(path.to_owned(), e))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_owned(), e))
}

/// `<root>/<domain>/domain.pddl` and `<root>/<domain>/<seed>/<split>/<task>.pddl`.
/// Returns the task files written.
pub fn gen_tasks(root: &Path, domains: &[DomainId], seeds: &[u64]) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for &d in domains {
        write(&root.join(d.name()).join("domain.pddl"), &render_domain(d.domain()))?;
        for &seed in seeds {
            for split in [Split::Train, Split::Eval] {
                for task in generate(&GenParams::new(d, split, seed))? {
                    let path = root
                        .join(d.name())
                        .join(seed.to_string())
                        .join(split.name())
                        .join(format!("{}.pddl", task.name));
                    write(&path, &render_task(&task))?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

/// Rename a domain and its tasks and write them with the name map.
pub fn write_ablated(out: &Path, domain: &Domain, tasks: &[Task]) -> Result<(), CliError> {
    let (domain, tasks, map) = ablate_names(domain, tasks);
    write(&out.join("domain.pddl"), &render_domain(&domain))?;
    for task in &tasks {
        write(&out.join(format!("{}.pddl", task.name)), &render_task(task))?;
    }
    let mut json = serde_json::to_string_pretty(&map).expect("name map serializes");
    json.push('\n');
    write(&out.join("names.json"), &json)
}

pub fn ablate_files(out: &Path, domain_file: &Path, task_files: &[PathBuf]) -> Result<(), CliError> {
    let domain = parse_domain(&read(domain_file)?)?;
    let tasks = task_files
        .iter()
        .map(|p| Ok(parse_task(&read(p)?, &domain)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    write_ablated(out, &domain, &tasks)
}

/// Renamed train and eval tasks under `<out>/<domain>/<seed>/`.
pub fn ablate_generated(out: &Path, domains: &[DomainId], seeds: &[u64]) -> Result<(), CliError> {
    for &d in domains {
        for &seed in seeds {
            let mut tasks = generate(&GenParams::new(d, Split::Train, seed))?;
            tasks.extend(generate(&GenParams::new(d, Split::Eval, seed))?);
            write_ablated(&out.join(d.name()).join(seed.to_string()), d.domain(), &tasks)?;
        }
    }
    Ok(())
}
