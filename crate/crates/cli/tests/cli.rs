use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn coop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coop")).args(args).env_remove("COOP_SEED").output().expect("coop runs")
}

fn corpus(file: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(file).display().to_string()
}

fn fixture(file: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(file).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fs_config(dir: &Path, json: &str) -> PathBuf {
    let p = dir.join("fs.json");
    std::fs::write(&p, json).unwrap();
    p
}

#[test]
fn check_accepts_fileio() {
    let o = coop(&["check", &corpus("fileio.coop")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn check_emits_binding_types() {
    let o = coop(&["check", "--emit-types", &corpus("fileio.coop")]);
    assert_eq!(stdout(&o), "fileIO : runner {write} => ({fwrite}, {IOError}, int)\n");
}

#[test]
fn check_rejects_missing_kill_clause() {
    let o = coop(&["check", &corpus("neg/missing_finally.coop")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error[TyUser-Run]"), "{}", stderr(&o));
}

#[test]
fn check_rejects_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.coop");
    std::fs::write(&p, "").unwrap();
    let o = coop(&["check", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no main computation"));
}

#[test]
fn unreadable_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("missing.coop");
    assert_eq!(coop(&["check", p.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(coop(&["run", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn run_tick_counter() {
    let o = coop(&["run", &fixture("tick.coop")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "return (1, 2)\n");
}

#[test]
fn fileio_under_quota_closes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fs_config(dir.path(), r#"{"quota": 5}"#);
    let o = coop(&["run", &corpus("fileio.coop"), "--container", "fs-sim", "--fs-config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "return ()\n");
    assert!(stderr(&o).contains(r#""closes":1"#), "{}", stderr(&o));
}

#[test]
fn fileio_under_io_error_leaves_the_file_open() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fs_config(dir.path(), r#"{"failAtWrite": 0}"#);
    let trace = dir.path().join("trace.json");
    let o = coop(&[
        "run",
        &corpus("fileio.coop"),
        "--container",
        "fs-sim",
        "--fs-config",
        cfg.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&o), "return ()\n");
    assert!(stderr(&o).contains(r#""open_handles":1,"closes":0"#), "{}", stderr(&o));
    let events: Value = serde_json::from_str(&std::fs::read_to_string(trace).unwrap()).unwrap();
    let last = events.as_array().unwrap().last().unwrap();
    assert_eq!(last["event"], "finally");
    assert_eq!(last["signal"], "IOError");
}

#[test]
fn fs_real_writes_inside_the_sandbox() {
    let dir = tempfile::tempdir().unwrap();
    let o = coop(&["run", &corpus("fileio.coop"), "--container", "fs-real", "--sandbox", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(dir.path().join("hello.txt")).unwrap(), "Hello, world.");
}

#[test]
fn raise_and_kill_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let raise = dir.path().join("raise.coop");
    std::fs::write(&raise, "exception Oops\nraise Oops\n").unwrap();
    let o = coop(&["run", raise.to_str().unwrap()]);
    assert_eq!((o.status.code(), stdout(&o)), (Some(1), "raise Oops\n".into()));
    let segfault = dir.path().join("segfault.coop");
    std::fs::write(&segfault, "operation memread : int ~> int\nmemread 999\n").unwrap();
    let o = coop(&["run", "--container", "state", segfault.to_str().unwrap()]);
    assert_eq!((o.status.code(), stdout(&o)), (Some(3), "kill SegFault\n".into()));
}

#[test]
fn static_errors_and_missing_operations_exit_4() {
    let o = coop(&["run", &corpus("neg/state_mismatch.coop")]);
    assert_eq!(o.status.code(), Some(4));
    let o = coop(&["run", &corpus("mlrefs.coop")]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("not provided by the pure container"));
    let o = coop(&["run", "--no-check", &corpus("mlrefs.coop")]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn no_check_runs_well_typed_programs_alike() {
    let o = coop(&["run", "--no-check", "--container", "state", &corpus("mlrefs.coop")]);
    assert_eq!(stdout(&o), "return (11, 2)\n");
}

fn valid_event(e: &Value) -> bool {
    let Some(obj) = e.as_object() else { return false };
    let kinds = ["op", "coop-return", "coop-raise", "coop-kill", "finally"];
    obj.keys().all(|k| ["event", "op", "exception", "signal", "runDepth"].contains(&k.as_str()))
        && obj.get("event").and_then(Value::as_str).is_some_and(|k| kinds.contains(&k))
        && obj.get("runDepth").is_some_and(Value::is_u64)
        && ["op", "exception", "signal"].iter().all(|k| obj.get(*k).is_none_or(Value::is_string))
}

#[test]
fn traces_follow_the_event_schema() {
    for (file, container) in [
        ("fileio.coop", "fs-sim"),
        ("nesting.coop", "fs-sim"),
        ("instrumentation.coop", "state"),
        ("mlrefs.coop", "state"),
        ("monotonic.coop", "state"),
        ("pairing.coop", "pure"),
    ] {
        let o = coop(&["trace", &corpus(file), "--container", container]);
        assert_eq!(o.status.code(), Some(0), "{file}: {}", stderr(&o));
        let events: Value = serde_json::from_str(&stdout(&o)).unwrap();
        let events = events.as_array().unwrap();
        assert!(!events.is_empty(), "{file}");
        assert!(events.iter().all(valid_event), "{file}: {events:?}");
    }
}

#[test]
fn eq_test_single_schema() {
    let o = coop(&["eq-test", "--schema", "run-return", "--cases", "500"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("run-return"));
}

#[test]
fn eq_test_catches_every_mutation() {
    let o = coop(&["eq-test", "--mutations"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn eq_test_is_deterministic_under_seed() {
    let a = coop(&["eq-test", "--seed", "5", "--cases", "20"]);
    let b = Command::new(env!("CARGO_BIN_EXE_coop"))
        .args(["eq-test", "--cases", "20"])
        .env("COOP_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn corpus_passes() {
    let o = coop(&["corpus"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
