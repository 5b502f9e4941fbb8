use std::sync::{Arc, Mutex};
use std::time::Duration;

use genplan_core::{Domain, RawPlanOutput, Task};
use genplan_domains::{generate, oracle_plan, DomainId, GenParams, Split};
use genplan_synth::exec::OracleFn;
use genplan_synth::{
    classify, evaluate, synthesize, ExecError, ExecutionOutcome, Executor, FeedbackDetail, FeedbackKind, LlmError,
    OutcomeKind, ProgramSource, PromptMode, ReplayProvider, ScriptedProvider, SessionState, SimulatedExecutor,
    SynthesisConfig, SynthesisSession, Verdict,
};

const D: DomainId = DomainId::Delivery;

fn simulator(d: DomainId) -> SimulatedExecutor {
    let oracle: OracleFn = Arc::new(move |t: &Task| oracle_plan(d, t).ok());
    SimulatedExecutor::new(oracle)
}

fn code(directive: &str) -> String {
    format!("Here is the code.\n\n```python\n# genplan-sim: {directive}\ndef get_plan(objects, init, goal):\n    ...\n```\n")
}

fn script(implementations: &[&str]) -> Vec<String> {
    let mut out = vec!["A summary.".to_owned(), "A strategy.".to_owned()];
    out.extend(implementations.iter().map(|d| code(d)));
    out
}

fn tasks(split: Split) -> Vec<Task> {
    generate(&GenParams::new(D, split, 1)).unwrap()
}

fn run(responses: Vec<String>, cfg: &SynthesisConfig) -> SynthesisSession {
    let mut provider = ScriptedProvider::new(responses);
    synthesize("delivery_1_full", D.domain(), &tasks(Split::Train), cfg, &mut provider, &simulator(D)).unwrap()
}

fn kinds(s: &SynthesisSession) -> Vec<FeedbackKind> {
    s.error_history.iter().map(|e| e.kind).collect()
}

fn first_two() -> Vec<String> {
    tasks(Split::Train).iter().take(2).map(|t| t.name.clone()).collect()
}

#[test]
fn correct_first_try() {
    let s = run(script(&["oracle"]), &SynthesisConfig::default());
    assert_eq!(s.rounds_used, 0);
    assert!(s.validated && s.error_history.is_empty() && s.final_failure.is_none());
    assert_eq!(s.tasks_used.iter().cloned().collect::<Vec<_>>(), first_two());
    assert_eq!(s.transcript.turns.len(), 6);
    let eval = tasks(Split::Eval);
    let results = evaluate(&s.program, D.domain(), &eval, &simulator(D), Duration::from_secs(30)).unwrap();
    assert_eq!(results.len(), 30);
    assert!(results.iter().all(|r| r.solved));
}

#[test]
fn four_kinds_of_bug_then_fixed() {
    let s = run(
        script(&[
            "raise IndexError: tuple index out of range",
            "timeout",
            "unparenthesized",
            "drop-first",
            "oracle",
        ]),
        &SynthesisConfig::default(),
    );
    assert_eq!(s.rounds_used, 4);
    assert_eq!(
        kinds(&s),
        [
            FeedbackKind::PythonException,
            FeedbackKind::Timeout,
            FeedbackKind::PlanSyntax,
            FeedbackKind::PlanSemantics
        ]
    );
    assert_eq!(s.error_history.iter().map(|e| e.round).collect::<Vec<_>>(), [0, 1, 2, 3]);
    assert!(s.validated);
    assert_eq!(s.program.origins, [0, 1, 2, 3, 4]);
    let user: Vec<&str> = s.transcript.user_turns().map(|t| t.text.as_str()).collect();
    assert!(user[3].contains("IndexError: tuple index out of range"));
    assert!(user[4].contains("timed out (possible infinite loop)"));
    assert!(user[5].contains("NOTE: the valid operators are:"));
    assert!(user[6].contains("(Set "));
    let results =
        evaluate(&s.program, D.domain(), &tasks(Split::Eval), &simulator(D), Duration::from_secs(30)).unwrap();
    assert!(results.iter().all(|r| r.solved));
}

#[test]
fn never_fixed_stops_after_four_rounds() {
    let bug = "raise ValueError: still broken";
    let s = run(script(&[bug, bug, bug, bug, "timeout", "oracle"]), &SynthesisConfig::default());
    assert_eq!(s.rounds_used, 4);
    assert_eq!(s.error_history.len(), 4);
    assert!(!s.validated);
    // The fifth implementation is kept even though it fails.
    let last = s.final_failure.as_ref().unwrap();
    assert_eq!((last.round, last.kind), (4, FeedbackKind::Timeout));
    assert_eq!(s.program.origins, [0, 1, 2, 3, 4]);
    assert!(s.program.text.trim_end().ends_with("...") && s.program.text.contains("# genplan-sim: timeout"));
    assert_eq!(s.transcript.turns.len(), 2 * (3 + 4));
    let results =
        evaluate(&s.program, D.domain(), &tasks(Split::Eval), &simulator(D), Duration::from_secs(30)).unwrap();
    assert!(results.iter().all(|r| !r.solved && r.failure == Some(FeedbackKind::Timeout)));
}

#[test]
fn program_only_grows() {
    let s = run(script(&["raise E", "raise E", "oracle"]), &SynthesisConfig::default());
    let mut prefix = String::new();
    for chunk in s.program.text.split_inclusive("# --- response") {
        prefix.push_str(chunk);
        assert!(s.program.text.starts_with(&prefix));
    }
    assert_eq!(s.program.text.matches("# --- response").count(), 3);
}

#[test]
fn no_debug_evaluates_first_program() {
    let cfg = SynthesisConfig {
        debug_enabled: false,
        ..Default::default()
    };
    let s = run(script(&["raise E", "oracle"]), &cfg);
    assert_eq!(s.rounds_used, 0);
    assert!(s.error_history.is_empty());
    assert_eq!(s.final_failure.as_ref().unwrap().kind, FeedbackKind::PythonException);
    assert_eq!(s.transcript.turns.len(), 6);
}

#[test]
fn merged_mode_sends_one_prompt() {
    let cfg = SynthesisConfig {
        mode: PromptMode::Merged,
        ..Default::default()
    };
    let s = run(vec![code("oracle")], &cfg);
    assert_eq!(s.transcript.turns.len(), 2);
    assert!(s.validated);
}

/// A training set whose first two tasks are smaller than some later one,
/// with the size limit that separates them and the first task over it.
fn uneven_training_set() -> (Vec<Task>, usize, usize) {
    (0..50)
        .find_map(|seed| {
            let train = generate(&GenParams::new(D, Split::Train, seed)).unwrap();
            let limit = train[..2].iter().map(|t| t.objects.len()).max().unwrap();
            let failing = train.iter().position(|t| t.objects.len() > limit)?;
            Some((train, limit, failing))
        })
        .expect("some seed has a larger later task")
}

#[test]
fn later_task_failure_enters_tasks_used() {
    let (train, limit, failing) = uneven_training_set();
    let mut provider = ScriptedProvider::new(script(&[&format!("limit {limit}"), "oracle"]));
    let s = synthesize("s", D.domain(), &train, &SynthesisConfig::default(), &mut provider, &simulator(D)).unwrap();
    assert_eq!(s.rounds_used, 1);
    assert_eq!(s.error_history[0].task, train[failing].name);
    let mut expected: Vec<String> = train[..2].iter().map(|t| t.name.clone()).collect();
    expected.push(train[failing].name.clone());
    expected.sort();
    assert_eq!(s.tasks_used.iter().cloned().collect::<Vec<_>>(), expected);
}

/// Records which tasks ran, in order.
struct Counting {
    inner: SimulatedExecutor,
    seen: Mutex<Vec<String>>,
}

impl Executor for Counting {
    fn execute(
        &self,
        program: &ProgramSource,
        domain: &Domain,
        task: &Task,
        budget: Duration,
    ) -> Result<ExecutionOutcome, ExecError> {
        self.seen.lock().unwrap().push(task.name.clone());
        self.inner.execute(program, domain, task, budget)
    }
}

#[test]
fn restart_policy() {
    let (train, limit, failing) = uneven_training_set();
    for restart in [true, false] {
        let cfg = SynthesisConfig {
            restart_at_first: restart,
            ..Default::default()
        };
        let exec = Counting {
            inner: simulator(D),
            seen: Mutex::new(vec![]),
        };
        let mut provider = ScriptedProvider::new(script(&[&format!("limit {limit}"), "oracle"]));
        let s = synthesize("s", D.domain(), &train, &cfg, &mut provider, &exec).unwrap();
        assert!(s.validated);
        let seen = exec.seen.into_inner().unwrap();
        let after_fix = &seen[failing + 1];
        let expected = if restart { &train[0].name } else { &train[failing].name };
        assert_eq!(after_fix, expected);
        let runs = if restart { failing + 1 + train.len() } else { train.len() + 1 };
        assert_eq!(seen.len(), runs);
    }
}

#[test]
fn replayed_session_is_identical() {
    let responses = script(&["raise E: x", "unparenthesized", "oracle"]);
    let first = run(responses, &SynthesisConfig::default());
    let mut replay = ReplayProvider::new(first.transcript.clone());
    let second = synthesize(
        "delivery_1_full",
        D.domain(),
        &tasks(Split::Train),
        &SynthesisConfig::default(),
        &mut replay,
        &simulator(D),
    )
    .unwrap();
    assert_eq!(second.state(), first.state());
    assert_eq!(second.transcript.turns, first.transcript.turns);
}

#[test]
fn interrupted_session_resumes() {
    let bug = "raise E";
    let full = script(&[bug, bug, "oracle"]);
    let complete = run(full.clone(), &SynthesisConfig::default());

    let mut short = ScriptedProvider::new(full[..4].to_vec());
    let err = synthesize(
        "delivery_1_full",
        D.domain(),
        &tasks(Split::Train),
        &SynthesisConfig::default(),
        &mut short,
        &simulator(D),
    )
    .unwrap_err();
    assert!(matches!(err.source, genplan_synth::session::SessionFailure::Llm(LlmError::ScriptExhausted { .. })));
    assert_eq!(err.session.rounds_used, 1);
    assert_eq!(err.session.transcript.turns.len(), 8, "partial transcript kept");

    let mut resumed = ReplayProvider::with_fallback(
        err.session.transcript.clone(),
        Box::new(ScriptedProvider::new(full[4..].to_vec())),
    );
    let s = synthesize(
        "delivery_1_full",
        D.domain(),
        &tasks(Split::Train),
        &SynthesisConfig::default(),
        &mut resumed,
        &simulator(D),
    )
    .unwrap();
    assert_eq!(s.state(), complete.state());
}

#[test]
fn state_file_written() {
    let s = run(script(&["raise E", "oracle"]), &SynthesisConfig::default());
    let dir = tempfile::tempdir().unwrap();
    s.persist(dir.path(), "delivery_1_full").unwrap();
    let state: SessionState =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("delivery_1_full.state.json")).unwrap()).unwrap();
    assert_eq!(state, s.state());
    assert!(dir.path().join("delivery_1_full.json").exists());
}

#[test]
fn response_without_code_is_a_missing_function() {
    let s = run(vec!["s".into(), "t".into(), "I would walk everywhere.".into(), code("oracle")], &SynthesisConfig::default());
    assert_eq!(kinds(&s), [FeedbackKind::PythonException]);
    let feedback = &s.transcript.turns[6].text;
    assert!(feedback.contains("NameError: name 'get_plan' is not defined"), "{feedback}");
    assert!(s.validated);
}

fn outcome(kind: OutcomeKind) -> ExecutionOutcome {
    ExecutionOutcome {
        kind,
        wall_time: Duration::ZERO,
        plan_time: None,
    }
}

#[test]
fn classification() {
    let task = &tasks(Split::Train)[0];
    let domain = D.domain();
    let timed_out = outcome(OutcomeKind::TimedOut {
        traceback: "KeyboardInterrupt".into(),
    });
    assert!(matches!(classify(&timed_out, domain, task), Verdict::Failed(FeedbackDetail::Timeout { .. })));
    let syntax = outcome(OutcomeKind::Returned(RawPlanOutput::Strings(vec!["walk a b".into()])));
    assert!(matches!(classify(&syntax, domain, task), Verdict::Failed(FeedbackDetail::Syntax { .. })));
    let plan: Vec<String> = oracle_plan(D, task).unwrap().iter().map(ToString::to_string).collect();
    let good = outcome(OutcomeKind::Returned(RawPlanOutput::Strings(plan.clone())));
    assert!(matches!(classify(&good, domain, task), Verdict::Solved(p) if p.len() == plan.len()));
    let bad = outcome(OutcomeKind::Returned(RawPlanOutput::Strings(plan[1..].to_vec())));
    assert!(matches!(classify(&bad, domain, task), Verdict::Failed(FeedbackDetail::Semantics { .. })));
    let raised = outcome(OutcomeKind::Raised { traceback: "E".into() });
    assert_eq!(
        match classify(&raised, domain, task) {
            Verdict::Failed(d) => d.kind(),
            _ => panic!(),
        },
        FeedbackKind::PythonException
    );
}

#[test]
fn simulated_directives() {
    let exec = simulator(D);
    let task = &tasks(Split::Train)[0];
    let run = |text: &str| {
        exec.execute(
            &ProgramSource {
                text: text.into(),
                origins: vec![0],
            },
            D.domain(),
            task,
            Duration::from_secs(3),
        )
        .unwrap()
    };
    assert_eq!(run("# genplan-sim: empty\n").kind, OutcomeKind::Returned(RawPlanOutput::Strings(vec![])));
    assert!(matches!(
        run("# genplan-sim: return 3").kind,
        OutcomeKind::Returned(RawPlanOutput::Malformed { bad_element: None, .. })
    ));
    let out = run("# genplan-sim: oracle\nx\n# genplan-sim: timeout\n");
    assert_eq!(out.wall_time, Duration::from_secs(3));
    let OutcomeKind::TimedOut { traceback } = out.kind else { panic!() };
    assert!(traceback.contains("line 3, in get_plan"));
    assert!(matches!(run("def get_plan(): pass").kind, OutcomeKind::Raised { .. }));
    let empty = ProgramSource {
        text: String::new(),
        origins: vec![],
    };
    assert!(matches!(
        exec.execute(&empty, D.domain(), task, Duration::from_secs(1)),
        Err(ExecError::EmptyProgram)
    ));
}
