use std::path::PathBuf;
use std::time::Duration;

use genplan_core::{parse_domain, parse_task, Domain, RawPlanOutput, Task};
use genplan_synth::exec::wire::{raw_from_value, ShimRequest, WireObject};
use genplan_synth::{ExecError, Executor, OutcomeKind, ProcessExecutor, ProgramSource};
use serde_json::json;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn shim() -> ProcessExecutor {
    ProcessExecutor::new(["python3".to_owned(), fixture("stub_shim.py")])
}

fn program(text: &str) -> ProgramSource {
    ProgramSource {
        text: text.to_owned(),
        origins: vec![0],
    }
}

fn delivery() -> (Domain, Task) {
    let domain = parse_domain(
        "(define (domain delivery) (:requirements :strips :typing)
          (:types loc paper)
          (:predicates (at ?l - loc) (unpacked ?p - paper))
          (:action noop :parameters (?l - loc) :precondition (and (at ?l)) :effect (and (at ?l))))",
    )
    .unwrap();
    let task = parse_task(
        "(define (problem t) (:domain delivery)
          (:objects paper1 - paper loc4 loc-0 - loc)
          (:init (unpacked paper1) (at loc-0))
          (:goal (and (at loc-0))))",
        &domain,
    )
    .unwrap();
    (domain, task)
}

fn forest() -> (Domain, Task) {
    let domain = parse_domain(
        "(define (domain forest) (:requirements :strips)
          (:predicates (at ?x) (adjacent ?x ?y))
          (:action walk :parameters (?from ?to)
            :precondition (and (at ?from) (adjacent ?from ?to))
            :effect (and (at ?to) (not (at ?from)))))",
    )
    .unwrap();
    let task = parse_task(
        "(define (problem f) (:domain forest)
          (:objects r0_c1 r0_c0)
          (:init (at r0_c0) (adjacent r0_c0 r0_c1))
          (:goal (and (at r0_c1))))",
        &domain,
    )
    .unwrap();
    (domain, task)
}

fn run(code: &str, budget: f64) -> genplan_synth::ExecutionOutcome {
    let (domain, task) = delivery();
    shim()
        .execute(&program(code), &domain, &task, Duration::from_secs_f64(budget))
        .unwrap()
}

#[test]
fn empty_plan_returned() {
    let out = run("def get_plan(o, i, g):\n    return []\n", 5.0);
    assert_eq!(out.kind, OutcomeKind::Returned(RawPlanOutput::Strings(vec![])));
    assert!(out.plan_time.is_some());
}

#[test]
fn plan_strings_pass_through() {
    let out = run("def get_plan(o, i, g):\n    return ['(pick-up paper1 loc4)']\n", 5.0);
    assert_eq!(
        out.kind,
        OutcomeKind::Returned(RawPlanOutput::Strings(vec!["(pick-up paper1 loc4)".into()]))
    );
}

#[test]
fn exception_traceback_has_type_and_line() {
    let code = "def get_plan(objects, init, goal):\n    atom = ('lift-at', 'f1')\n    return [atom[2]]\n";
    let OutcomeKind::Raised { traceback } = run(code, 5.0).kind else {
        panic!("expected exception")
    };
    assert!(traceback.contains("IndexError: tuple index out of range"), "{traceback}");
    assert!(traceback.contains("line 3, in get_plan"), "{traceback}");
}

#[test]
fn spin_times_out_with_traceback() {
    let code = "def get_plan(objects, init, goal):\n    while True:\n        pass\n";
    let out = run(code, 1.0);
    let OutcomeKind::TimedOut { traceback } = &out.kind else {
        panic!("expected timeout, got {:?}", out.kind)
    };
    assert!(traceback.contains("KeyboardInterrupt"), "{traceback}");
    assert!(traceback.contains("line 2") || traceback.contains("line 3"), "{traceback}");
    assert!(out.wall_time >= Duration::from_secs(1));
    assert!(out.wall_time < Duration::from_secs(2), "{:?}", out.wall_time);
}

#[test]
fn budgets_are_enforced() {
    let code = "def get_plan(objects, init, goal):\n    n = 0\n    while True:\n        n += 1\n";
    for budget in [1.0, 2.0, 5.0] {
        let out = run(code, budget);
        assert!(matches!(out.kind, OutcomeKind::TimedOut { .. }));
        let wall = out.wall_time.as_secs_f64();
        assert!(wall >= budget && wall <= budget + 1.0, "budget {budget}: {wall}");
    }
}

#[test]
fn silent_child_is_escalated() {
    let mut exec = ProcessExecutor::new(["python3".to_owned(), fixture("silent_spin.py")]);
    exec.interrupt_wait = Duration::from_millis(500);
    exec.terminate_wait = Duration::from_millis(500);
    let (domain, task) = delivery();
    let out = exec
        .execute(&program("x = 1"), &domain, &task, Duration::from_secs(1))
        .unwrap();
    assert!(matches!(out.kind, OutcomeKind::TimedOut { .. }), "{:?}", out.kind);
    // Budget, grace, then an ignored interrupt before terminate lands.
    assert!(out.wall_time >= Duration::from_millis(2400), "{:?}", out.wall_time);
    assert!(out.wall_time < Duration::from_secs(4), "{:?}", out.wall_time);
}

#[test]
fn crash_without_response_is_an_exception() {
    let code = "import os, sys\nsys.stderr.write('dying\\n')\nos._exit(3)\n";
    let OutcomeKind::Raised { traceback } = run(code, 5.0).kind else {
        panic!("expected exception")
    };
    assert!(traceback.contains("dying"), "{traceback}");
}

#[test]
fn extra_protocol_output_is_rejected() {
    let code = "import os\nos.write(1, b'stray line\\n')\ndef get_plan(o, i, g):\n    return []\n";
    let (domain, task) = delivery();
    let err = shim()
        .execute(&program(code), &domain, &task, Duration::from_secs(5))
        .unwrap_err();
    assert!(matches!(err, ExecError::Protocol { .. }), "{err}");

    let garbage = ProcessExecutor::new(["python3".to_owned(), fixture("echo_garbage.py")]);
    let err = garbage
        .execute(&program("x"), &domain, &task, Duration::from_secs(5))
        .unwrap_err();
    assert!(matches!(err, ExecError::Protocol { .. }), "{err}");
}

#[test]
fn program_prints_go_to_stderr() {
    let out = run("print('hello')\ndef get_plan(o, i, g):\n    print('inside')\n    return []\n", 5.0);
    assert_eq!(out.kind, OutcomeKind::Returned(RawPlanOutput::Strings(vec![])));
}

#[test]
fn typed_objects_arrive_as_pairs() {
    let code = "import json\ndef get_plan(objects, init, goal):\n    return [json.dumps([sorted(objects), sorted(init), sorted(goal)])]\n";
    let OutcomeKind::Returned(RawPlanOutput::Strings(s)) = run(code, 5.0).kind else {
        panic!()
    };
    let seen: serde_json::Value = serde_json::from_str(&s[0]).unwrap();
    assert_eq!(
        seen,
        json!([
            [["loc-0", "loc"], ["loc4", "loc"], ["paper1", "paper"]],
            [["at", "loc-0"], ["unpacked", "paper1"]],
            [["at", "loc-0"]]
        ])
    );
}

#[test]
fn untyped_objects_arrive_as_names() {
    let (domain, task) = forest();
    let code = "def get_plan(objects, init, goal):\n    assert all(isinstance(o, str) for o in objects)\n    return sorted(objects)\n";
    let out = shim()
        .execute(&program(code), &domain, &task, Duration::from_secs(5))
        .unwrap();
    assert_eq!(
        out.kind,
        OutcomeKind::Returned(RawPlanOutput::Strings(vec!["r0_c0".into(), "r0_c1".into()]))
    );
}

#[test]
fn non_list_results_are_described() {
    let out = run("def get_plan(o, i, g):\n    return 3\n", 5.0);
    let OutcomeKind::Returned(RawPlanOutput::Malformed { bad_element: None, .. }) = out.kind else {
        panic!("{:?}", out.kind)
    };
    let out = run("def get_plan(o, i, g):\n    return ['(a)', 4]\n", 5.0);
    let OutcomeKind::Returned(RawPlanOutput::Malformed { bad_element: Some(1), .. }) = out.kind else {
        panic!("{:?}", out.kind)
    };
}

#[test]
fn calls_do_not_share_state() {
    let first = "import builtins\nbuiltins.LEAK = 1\nopen('marker', 'w').write('x')\ndef get_plan(o, i, g):\n    return []\n";
    run(first, 5.0);
    let second = "import builtins, os\ndef get_plan(o, i, g):\n    return [str(hasattr(builtins, 'LEAK')), str(os.path.exists('marker'))]\n";
    let OutcomeKind::Returned(RawPlanOutput::Strings(s)) = run(second, 5.0).kind else {
        panic!()
    };
    assert_eq!(s, ["False", "False"]);
}

#[test]
fn credentials_are_not_inherited() {
    std::env::set_var("GENPLAN_TEST_SECRET", "hunter2");
    let code = "import os\ndef get_plan(o, i, g):\n    return [os.environ.get('GENPLAN_TEST_SECRET', 'absent')]\n";
    let OutcomeKind::Returned(RawPlanOutput::Strings(s)) = run(code, 5.0).kind else {
        panic!()
    };
    assert_eq!(s, ["absent"]);
}

#[test]
fn later_definitions_win_and_helpers_survive() {
    let code = "# --- response 0 ---\ndef helper(x):\n    return '(' + x + ')'\n\ndef get_plan(o, i, g):\n    raise ValueError('first try')\n\n# --- response 1 ---\ndef get_plan(o, i, g):\n    return [helper('noop loc-0')]\n";
    let out = run(code, 5.0);
    assert_eq!(
        out.kind,
        OutcomeKind::Returned(RawPlanOutput::Strings(vec!["(noop loc-0)".into()]))
    );
}

#[test]
fn missing_get_plan_is_reported() {
    let OutcomeKind::Raised { traceback } = run("x = 1\n", 5.0).kind else {
        panic!()
    };
    assert!(traceback.contains("get_plan"), "{traceback}");
}

#[test]
fn request_lines_round_trip() {
    let (domain, task) = delivery();
    let request = ShimRequest::new("code", &domain, &task, 30.0);
    let line = request.to_line();
    assert!(line.ends_with('\n') && line.matches('\n').count() == 1);
    let back = ShimRequest::from_line(&line).unwrap();
    assert_eq!(back, request);
    assert_eq!(back.to_line(), line);
    let (objects, init, goal) = back.decode();
    let mut expected = task.objects.clone();
    expected.sort_by(|a, b| a.name.cmp(&b.name));
    assert_eq!(objects, expected);
    assert_eq!((init, goal), (task.init.clone(), task.goal.clone()));
    assert!(matches!(request.objects[0], WireObject::Typed(_)));

    let (domain, task) = forest();
    let request = ShimRequest::new("code", &domain, &task, 1.0);
    assert!(!request.typed);
    assert_eq!(
        request.objects,
        vec![WireObject::Name("r0_c0".into()), WireObject::Name("r0_c1".into())]
    );
    let value: serde_json::Value = serde_json::from_str(&request.to_line()).unwrap();
    assert_eq!(value["init"], json!([["adjacent", "r0_c0", "r0_c1"], ["at", "r0_c0"]]));
}

#[test]
fn raw_values_classified() {
    assert_eq!(raw_from_value(&json!(["(a)"])), RawPlanOutput::Strings(vec!["(a)".into()]));
    assert!(matches!(raw_from_value(&json!(null)), RawPlanOutput::Malformed { bad_element: None, .. }));
    assert!(matches!(raw_from_value(&json!("(a)")), RawPlanOutput::Malformed { bad_element: None, .. }));
}
