use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use genplan_cli::bench::{self, BenchSource, TASKS_PER_SIZE};
use genplan_cli::config::{parse_approaches, parse_domains, parse_seeds};
use genplan_cli::{
    compute_metrics, load_records, run_experiment, synthesize_all, tasks, write_report, CliError, ExecMode,
    ExperimentConfig, Layout,
};
use genplan_synth::{ProgramSource, ProviderKind};

#[derive(Parser)]
#[command(name = "genplan", version, about = "Generalized planning with LLM-written programs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `all` or a comma-separated list.
    #[arg(long)]
    domains: Option<String>,
    /// E.g. `0-9` or `0,3,5`.
    #[arg(long)]
    seeds: Option<String>,
    /// Comma-separated: full, no-cot, no-debug, no-names, random, oracle.
    #[arg(long)]
    approach: Option<String>,
    /// live, replay or scripted.
    #[arg(long)]
    provider: Option<String>,
    #[arg(long)]
    budget_s: Option<f64>,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Run programs in-process from simulation directives instead of the shim.
    #[arg(long)]
    simulate: bool,
    /// Shim command line, split on whitespace.
    #[arg(long)]
    shim_cmd: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write generated train and eval tasks as PDDL.
    GenTasks(Common),
    /// Synthesize programs for the LLM approaches without evaluating them.
    Synthesize(Common),
    /// Run every cell (synthesizing where needed) and append records.
    Evaluate(Common),
    /// Compute metrics from the records file.
    Report(Common),
    /// Runtime against problem size.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated object counts; defaults span the eval range up to 4x.
        #[arg(long)]
        sizes: Option<String>,
        /// Program to time instead of the oracle.
        #[arg(long)]
        program: Option<PathBuf>,
        #[arg(long, default_value_t = TASKS_PER_SIZE)]
        tasks_per_size: usize,
        /// Shell template run per task, with `{domain}` and `{problem}` paths.
        #[arg(long)]
        planner_cmd: Option<String>,
    },
    /// Rename every symbol in a domain and its tasks.
    AblateNames {
        #[command(flatten)]
        common: Common,
        #[arg(long, requires = "task_file")]
        domain_file: Option<PathBuf>,
        #[arg(long)]
        task_file: Vec<PathBuf>,
    },
}

fn resolve(c: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(d) = &c.domains {
        cfg.domains = parse_domains(d)?;
    }
    if let Some(s) = &c.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(a) = &c.approach {
        cfg.approaches = parse_approaches(a)?;
    }
    if let Some(p) = &c.provider {
        cfg.provider.provider = match p.as_str() {
            "live" => ProviderKind::Live,
            "replay" => ProviderKind::Replay,
            "scripted" => ProviderKind::Scripted,
            other => return Err(CliError::Config(format!("unknown provider `{other}`"))),
        };
    }
    if let Some(b) = c.budget_s {
        cfg.budget_s = b;
    }
    if let Some(r) = c.max_rounds {
        cfg.max_rounds = r;
    }
    if let Some(o) = &c.out_dir {
        cfg.out_dir = o.clone();
    }
    if c.simulate {
        cfg.executor.mode = ExecMode::Simulate;
    }
    if let Some(cmd) = &c.shim_cmd {
        cfg.executor.command = cmd.split_whitespace().map(String::from).collect();
    }
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn report(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let layout = Layout::new(&cfg.out_dir);
    let records = load_records(&layout.records())?;
    if records.is_empty() {
        return Err(CliError::Config(format!("no records in {}", layout.records().display())));
    }
    let table = compute_metrics(&records);
    write_report(&table, &layout.report())?;
    for row in &table.solve {
        println!("{:<9} {:<9} mean {:.2} max {:.2} ({} seeds)", row.domain, row.approach, row.mean, row.max, row.seeds);
    }
    if !table.fractional.is_empty() {
        println!("{} cell(s) with fractional success; see fractional.csv", table.fractional.len());
    }
    if !table.incomplete.is_empty() {
        println!("{} incomplete cell(s); see incomplete.csv", table.incomplete.len());
    }
    println!("report written to {}", layout.report().display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Cmd::GenTasks(c) => {
            let cfg = resolve(&c)?;
            let layout = Layout::new(&cfg.out_dir);
            let written = tasks::gen_tasks(&layout.tasks(), &cfg.domains, &cfg.seeds)?;
            println!("{} task file(s) under {}", written.len(), layout.tasks().display());
        }
        Cmd::Synthesize(c) => {
            let cfg = resolve(&c)?;
            for (cell, out) in synthesize_all(&cfg)? {
                match out {
                    Ok(s) => println!("{}: {} round(s), validated {}", cell.stem(), s.rounds_used, s.validated),
                    Err(e) => println!("{}: {e}", cell.stem()),
                }
            }
        }
        Cmd::Evaluate(c) => {
            let cfg = resolve(&c)?;
            let records = run_experiment(&cfg)?;
            let incomplete = records.iter().filter(|r| !r.complete).count();
            println!("{} record(s), {incomplete} incomplete", records.len());
            report(&cfg)?;
        }
        Cmd::Report(c) => report(&resolve(&c)?)?,
        Cmd::Bench {
            common,
            sizes,
            program,
            tasks_per_size,
            planner_cmd,
        } => {
            let cfg = resolve(&common)?;
            let layout = Layout::new(&cfg.out_dir);
            let source = match program {
                Some(path) => BenchSource::Program {
                    program: ProgramSource {
                        text: std::fs::read_to_string(&path).map_err(|e| CliError::Io(path.clone(), e))?,
                        origins: vec![0],
                    },
                    executor: cfg.executor.clone(),
                },
                None => BenchSource::Oracle,
            };
            let seed = cfg.seeds.first().copied().unwrap_or(0);
            for &d in &cfg.domains {
                let grid = match &sizes {
                    Some(s) => s
                        .split(',')
                        .map(|n| n.trim().parse().map_err(|_| CliError::Config(format!("bad size `{n}`"))))
                        .collect::<Result<Vec<usize>, _>>()?,
                    None => bench::default_grid(d),
                };
                let planner_dir = layout.bench().join("pddl").join(d.name());
                let planner = planner_cmd.as_deref().map(|t| (t, planner_dir.as_path()));
                let samples = bench::bench(d, &grid, tasks_per_size, seed, &source, planner, cfg.settings(cfg.approaches[0]).budget)?;
                let path = layout.bench().join(format!("{d}.csv"));
                bench::write_samples(&path, &samples)?;
                for s in &samples {
                    let t = s.median_s.map_or("partial".to_owned(), |t| format!("{t:.4}s"));
                    println!("{d} {} size {} median {t}", s.source, s.size);
                }
            }
        }
        Cmd::AblateNames {
            common,
            domain_file,
            task_file,
        } => {
            let cfg = resolve(&common)?;
            let out = Layout::new(&cfg.out_dir).root.join("ablated");
            match domain_file {
                Some(d) => tasks::ablate_files(&out, &d, &task_file)?,
                None => tasks::ablate_generated(&out, &cfg.domains, &cfg.seeds)?,
            }
            println!("renamed files under {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
