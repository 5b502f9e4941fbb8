use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use genplan_cli::bench::{self, BenchSource};
use genplan_cli::config::{parse_approaches, parse_domains, parse_seeds};
use genplan_cli::experiment::{cell_tasks, eval_oracle, eval_random};
use genplan_cli::{
    run_cell, run_experiment, tasks, Approach, Cell, ExecMode, ExecutorConfig, ExperimentConfig, Layout,
};
use genplan_core::{parse_domain, parse_task, render_task};
use genplan_domains::{generate, DomainId, GenParams, Split};
use genplan_synth::{FeedbackKind, ProgramSource, PromptMode, ProviderConfig, ProviderKind, SessionState};

fn fence(code: &str) -> String {
    format!("```python\n{code}\n```")
}

fn sim(directive: &str) -> String {
    fence(&format!("# genplan-sim: {directive}\ndef get_plan(objects, init, goal):\n    ..."))
}

fn write_script(dir: &Path, name: &str, responses: &[String]) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(responses).unwrap()).unwrap();
    path
}

fn scripted(path: PathBuf) -> ProviderConfig {
    ProviderConfig {
        provider: ProviderKind::Scripted,
        script_path: Some(path),
        ..Default::default()
    }
}

fn config(out: &Path, domains: &[DomainId], seeds: &[u64], approaches: &[Approach]) -> ExperimentConfig {
    ExperimentConfig {
        out_dir: out.to_owned(),
        domains: domains.to_vec(),
        seeds: seeds.to_vec(),
        approaches: approaches.to_vec(),
        workers: 2,
        executor: ExecutorConfig {
            mode: ExecMode::Simulate,
            command: vec![],
        },
        ..Default::default()
    }
}

fn line_count(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn config_file_and_overrides() {
    let text = r#"
        out_dir = "runs/x"
        domains = ["gripper", "heavy"]
        seeds = [0, 1]
        approaches = ["full", "no-cot", "no-debug"]
        budget_s = 10.0

        [executor]
        mode = "simulate"

        [provider]
        provider = "replay"
        replay_path = "sessions"

        [overrides.no-cot]
        budget_s = 5.0
        max_rounds = 2
    "#;
    let cfg: ExperimentConfig = toml::from_str(text).unwrap();
    assert_eq!(cfg.domains, [DomainId::Gripper, DomainId::Heavy]);
    let full = cfg.settings(Approach::Full);
    assert_eq!(full.budget, Duration::from_secs(10));
    assert_eq!((full.synthesis.mode, full.synthesis.max_debug_rounds), (PromptMode::Cot, 4));
    assert!(full.synthesis.debug_enabled);
    let no_cot = cfg.settings(Approach::NoCot);
    assert_eq!(no_cot.synthesis.mode, PromptMode::Merged);
    assert_eq!((no_cot.budget, no_cot.synthesis.max_debug_rounds), (Duration::from_secs(5), 2));
    assert_eq!(no_cot.synthesis.exec_budget_s, 5.0);
    assert!(!cfg.settings(Approach::NoDebug).synthesis.debug_enabled);
    assert_eq!(full.provider.provider, ProviderKind::Replay);

    assert!(toml::from_str::<ExperimentConfig>("budget = 3").is_err(), "unknown keys are rejected");
    let default = ExperimentConfig::default();
    assert_eq!(default.executor.command, ["genplan-shim"]);
    assert_eq!((default.budget_s, default.max_rounds, default.seeds.len()), (30.0, 4, 10));
}

#[test]
fn flag_lists() {
    assert_eq!(parse_seeds("0-3").unwrap(), [0, 1, 2, 3]);
    assert_eq!(parse_seeds("5, 1,2-3").unwrap(), [5, 1, 2, 3]);
    assert!(parse_seeds("3-1").is_err() && parse_seeds("").is_err() && parse_seeds("x").is_err());
    assert_eq!(parse_domains("all").unwrap().len(), 7);
    assert_eq!(parse_domains("Ferry,heavy").unwrap(), [DomainId::Ferry, DomainId::Heavy]);
    assert!(parse_domains("blocks").is_err());
    assert_eq!(parse_approaches("no-names,random").unwrap(), [Approach::NoNames, Approach::Random]);
    assert_eq!(parse_approaches("all").unwrap().len(), 6);
    assert!(parse_approaches("gpt").is_err());
}

#[test]
fn baselines() {
    let tasks = generate(&GenParams::new(DomainId::Gripper, Split::Eval, 0)).unwrap();
    let oracle = eval_oracle(DomainId::Gripper, &tasks, Duration::from_secs(30));
    assert!(oracle.iter().all(|r| r.solved && r.plan_len.is_some()));
    let zero = eval_oracle(DomainId::Gripper, &tasks[..1], Duration::ZERO);
    assert_eq!(zero[0].failure, Some(FeedbackKind::Timeout));

    let tasks = generate(&GenParams::new(DomainId::Delivery, Split::Eval, 0)).unwrap();
    let random = eval_random(DomainId::Delivery, 0, &tasks, 1000, Duration::from_secs(30));
    assert_eq!(random.len(), 30);
    assert_eq!(random.iter().filter(|r| r.solved).count(), 0);
    let again = eval_random(DomainId::Delivery, 0, &tasks, 1000, Duration::from_secs(30));
    let shape = |rs: &[genplan_synth::TaskResult]| rs.iter().map(|r| (r.solved, r.failure)).collect::<Vec<_>>();
    assert_eq!(shape(&random), shape(&again));
}

#[test]
fn experiment_resumes_by_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &[DomainId::Ferry, DomainId::Spanner], &[0], &[Approach::Oracle]);
    let records = run_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.complete && r.success() && r.eval.len() == 30));
    let layout = Layout::new(dir.path());
    assert_eq!(line_count(&layout.records()), 2);
    run_experiment(&cfg).unwrap();
    assert_eq!(line_count(&layout.records()), 2, "finished cells are not rerun");

    let more = config(dir.path(), &[DomainId::Ferry, DomainId::Spanner], &[0, 1], &[Approach::Oracle]);
    assert_eq!(run_experiment(&more).unwrap().len(), 4);
    assert_eq!(line_count(&layout.records()), 4);
}

#[test]
fn provider_failure_marks_cell_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let bug = sim("raise ValueError: nope");
    let full = vec!["s".to_owned(), "t".to_owned(), bug.clone(), bug, sim("oracle")];
    let mut cfg = config(&dir.path().join("run"), &[DomainId::Gripper], &[2], &[Approach::Full]);
    cfg.provider = scripted(write_script(dir.path(), "short.json", &full[..4]));
    let records = run_experiment(&cfg).unwrap();
    assert!(!records[0].complete);
    assert!(records[0].error.as_deref().unwrap().contains("script"), "{:?}", records[0].error);
    let sessions = Layout::new(&cfg.out_dir).sessions();
    assert!(sessions.join("gripper_2_full.json").exists());
    assert!(!sessions.join("gripper_2_full.state.json").exists());

    // The saved transcript is replayed and the new script continues it.
    cfg.provider = scripted(write_script(dir.path(), "rest.json", &full[4..]));
    let resumed = run_experiment(&cfg).unwrap();
    assert!(resumed[0].complete && resumed[0].success());

    let mut fresh = config(&dir.path().join("fresh"), &[DomainId::Gripper], &[2], &[Approach::Full]);
    fresh.provider = scripted(write_script(dir.path(), "full.json", &full));
    let straight = run_experiment(&fresh).unwrap();
    let strip = |r: &genplan_cli::ReportRecord| (r.rounds_used, r.error_history.clone(), r.tasks_used, r.solved());
    assert_eq!(strip(&resumed[0]), strip(&straight[0]));
    assert_eq!(resumed[0].rounds_used, 2);
}

#[test]
fn replayed_session_reproduces_record() {
    let dir = tempfile::tempdir().unwrap();
    let responses = vec!["s".into(), "t".into(), sim("unparenthesized"), sim("drop-last"), sim("oracle")];
    let mut first = config(&dir.path().join("a"), &[DomainId::Gripper], &[0], &[Approach::Full]);
    first.provider = scripted(write_script(dir.path(), "s.json", &responses));
    let recorded = run_experiment(&first).unwrap().remove(0);
    assert_eq!(recorded.rounds_used, 2);

    let mut second = config(&dir.path().join("b"), &[DomainId::Gripper], &[0], &[Approach::Full]);
    second.provider = ProviderConfig {
        provider: ProviderKind::Replay,
        replay_path: Some(Layout::new(&first.out_dir).sessions()),
        ..Default::default()
    };
    let replayed = run_experiment(&second).unwrap().remove(0);
    assert_eq!(replayed.rounds_used, recorded.rounds_used);
    assert_eq!(replayed.error_history, recorded.error_history);
    let state = |cfg: &ExperimentConfig| -> SessionState {
        let path = Layout::new(&cfg.out_dir).sessions().join("gripper_0_full.state.json");
        serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
    };
    assert_eq!(state(&first), state(&second));
}

#[test]
fn no_names_cells_see_only_renamed_symbols() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), &[DomainId::Gripper], &[0], &[Approach::NoNames]);
    cfg.provider = scripted(write_script(dir.path(), "s.json", &["s".into(), "t".into(), sim("oracle")]));
    let cell = Cell {
        domain: DomainId::Gripper,
        seed: 0,
        approach: Approach::NoNames,
    };
    let tasks = cell_tasks(&cell).unwrap();
    assert_eq!((tasks.train.len(), tasks.eval.len()), (10, 30));
    let record = run_cell(&cfg, &Layout::new(dir.path()), &cell);
    assert!(record.complete && record.success(), "{record:?}");
    let path = dir.path().join("sessions/gripper_0_no-names.json");
    let transcript = genplan_synth::Transcript::load(&path).unwrap();
    for turn in transcript.user_turns() {
        for word in ["gripper", "ball", "room", "pick", "rooma"] {
            assert!(!turn.text.contains(word), "{word} leaked");
        }
    }
}

const GRIPPER_SOLVER: &str = r#"def get_plan(objects, init, goal):
    grippers = sorted(a[1] for a in init if a[0] == 'gripper')
    robby = next(a[1] for a in init if a[0] == 'at-robby')
    where = {a[1]: a[2] for a in init if a[0] == 'at'}
    plan = []
    for _, ball, target in sorted(a for a in goal if a[0] == 'at'):
        src = where[ball]
        if src == target:
            continue
        if robby != src:
            plan.append('(move %s %s)' % (robby, src))
        plan.append('(pick %s %s %s)' % (ball, src, grippers[0]))
        plan.append('(move %s %s)' % (src, target))
        plan.append('(drop %s %s %s)' % (ball, target, grippers[0]))
        robby = target
    return plan"#;

fn stub_shim() -> Vec<String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../synth/tests/fixtures/stub_shim.py");
    vec!["python3".into(), path.display().to_string()]
}

#[test]
fn python_program_through_the_shim() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), &[DomainId::Gripper], &[0], &[Approach::Full]);
    cfg.executor = ExecutorConfig {
        mode: ExecMode::Shim,
        command: stub_shim(),
    };
    cfg.budget_s = 10.0;
    let responses = vec![
        "s".into(),
        "t".into(),
        fence("def get_plan(objects, init, goal):\n    return []"),
        format!("The plan was empty.\n\n{}", fence(GRIPPER_SOLVER)),
    ];
    cfg.provider = scripted(write_script(dir.path(), "s.json", &responses));
    let r = run_experiment(&cfg).unwrap().remove(0);
    assert!(r.complete, "{:?}", r.error);
    assert_eq!(r.error_history, [FeedbackKind::PlanSemantics]);
    assert!(r.validated && r.success());
    assert!(r.eval.iter().all(|e| e.result.plan_time_s.unwrap() < e.result.wall_time_s));
    let program = fs::read_to_string(dir.path().join("programs/gripper_0_full.py")).unwrap();
    assert!(program.contains("# --- response 1 ---") && program.contains("return []"));
}

#[test]
fn generated_files_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let written = tasks::gen_tasks(dir.path(), &[DomainId::Miconic, DomainId::Forest], &[3]).unwrap();
    assert_eq!(written.len(), 2 * 30 + 10 + 4);
    let domain = parse_domain(&fs::read_to_string(dir.path().join("miconic/domain.pddl")).unwrap()).unwrap();
    assert_eq!(&domain, DomainId::Miconic.domain());
    let eval = generate(&GenParams::new(DomainId::Miconic, Split::Eval, 3)).unwrap();
    let path = dir.path().join("miconic/3/eval").join(format!("{}.pddl", eval[7].name));
    assert_eq!(parse_task(&fs::read_to_string(path).unwrap(), &domain).unwrap(), eval[7]);

    let out = dir.path().join("ablated");
    tasks::ablate_generated(&out, &[DomainId::Ferry], &[0]).unwrap();
    let cell = out.join("ferry/0");
    let renamed = parse_domain(&fs::read_to_string(cell.join("domain.pddl")).unwrap()).unwrap();
    assert!(!render_task(&parse_task(&fs::read_to_string(cell.join("problem1.pddl")).unwrap(), &renamed).unwrap())
        .contains("ferry"));
    let names: serde_json::Value = serde_json::from_str(&fs::read_to_string(cell.join("names.json")).unwrap()).unwrap();
    assert_eq!(names["predicates"].as_object().unwrap().len(), renamed.predicates.len());
}

#[test]
fn bench_samples() {
    let one = bench::bench(DomainId::Gripper, &[20], 3, 0, &BenchSource::Oracle, None, Duration::from_secs(30)).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!((one[0].tasks, one[0].solved, one[0].partial), (3, 3, false));
    assert!(one[0].median_s.is_some());

    let dir = tempfile::tempdir().unwrap();
    let with_planner = bench::bench(
        DomainId::Ferry,
        &[20, 40],
        2,
        0,
        &BenchSource::Oracle,
        Some(("test -s {domain} && test -s {problem}", dir.path())),
        Duration::from_secs(30),
    )
    .unwrap();
    let sources: Vec<&str> = with_planner.iter().map(|s| s.source.as_str()).collect();
    assert_eq!(sources, ["program", "planner", "program", "planner"]);
    assert!(with_planner.iter().all(|s| !s.partial));

    let failing = bench::bench(
        DomainId::Ferry,
        &[20, 40],
        2,
        0,
        &BenchSource::Oracle,
        Some(("exit 1", dir.path())),
        Duration::from_secs(30),
    )
    .unwrap();
    assert_eq!(failing.len(), 3, "planner curve stops after its first failure");
    assert!(failing[1].partial && failing[1].median_s.is_none());

    let broken = BenchSource::Program {
        program: ProgramSource {
            text: "# genplan-sim: raise E".into(),
            origins: vec![0],
        },
        executor: ExecutorConfig {
            mode: ExecMode::Simulate,
            command: vec![],
        },
    };
    let cut = bench::bench(DomainId::Ferry, &[20, 40], 2, 0, &broken, None, Duration::from_secs(30)).unwrap();
    assert_eq!(cut.len(), 1);
    assert!(cut[0].partial);

    assert_eq!(bench::median(&mut [3.0, 1.0, 2.0]), Some(2.0));
    assert_eq!(bench::median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
    assert_eq!(bench::median(&mut []), None);
    let grid = bench::default_grid(DomainId::Heavy);
    assert_eq!(*grid.last().unwrap(), 4 * DomainId::Heavy.object_range(Split::Eval).1);
}

#[test]
fn gripper_oracle_scales_about_linearly() {
    let time = |n| {
        let mut best = f64::MAX;
        for seed in 0..3 {
            let s = bench::bench(DomainId::Gripper, &[n], 10, seed, &BenchSource::Oracle, None, Duration::from_secs(30))
                .unwrap();
            best = best.min(s[0].median_s.unwrap());
        }
        best
    };
    let (small, large) = (time(400), time(800));
    assert!(large <= 2.0 * small * 1.5 + 1e-4, "{small} -> {large}");
}
