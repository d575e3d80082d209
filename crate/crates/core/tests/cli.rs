// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};

use smc::cli;

fn corpus(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

fn smc(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("smc").chain(args.iter().copied());
    let status = cli::run(argv, &mut out, &mut err);
    (
        status.code(),
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_clean_model_is_silent() {
    let (code, out, err) = smc(&["validate", &corpus("pingpong/pingpong.sm")]);
    assert_eq!((code, out.as_str(), err.as_str()), (0, "", ""));
}

#[test]
fn validate_reports_one_line_per_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(
        dir.path(),
        "dup.sm",
        "class A { statemachine { initial S; state S { } } } class A { statemachine { initial S; state S { } } }",
    );
    let (code, out, err) = smc(&["validate", &model]);
    assert_eq!(code, 1);
    assert_eq!(out, "");
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error E_DUP_CLASS A: "), "{err}");
}

#[test]
fn validate_parse_error_and_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "bad.sm", "class {");
    let (code, _, err) = smc(&["validate", &model]);
    assert_eq!(code, 1);
    assert!(err.contains("E_PARSE") && err.contains("1:7"), "{err}");
    assert_eq!(smc(&["validate", "/nonexistent/x.sm"]).0, 4);
}

#[test]
fn run_pingpong() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let (code, out, _) = smc(&[
        "run",
        &corpus("pingpong/pingpong.sm"),
        "--scenario",
        &corpus("pingpong/pingpong.scn"),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "outcome=quiescent steps=2 expectations=2/2");
    assert_eq!(fs::read_to_string(&trace).unwrap().lines().count(), 3);
}

#[test]
fn run_random_seed_defaults_to_zero() {
    let base = [
        "run",
        &corpus("counter/counter.sm"),
        "--scenario",
        &corpus("counter/long.scn"),
        "--scheduler",
        "random",
    ]
    .map(String::from);
    let args: Vec<&str> = base.iter().map(String::as_str).collect();
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let mut with_a = args.clone();
    with_a.extend(["--trace", a.to_str().unwrap()]);
    let mut with_b = args.clone();
    with_b.extend(["--seed", "0", "--trace", b.to_str().unwrap()]);
    assert_eq!(smc(&with_a).0, 0);
    assert_eq!(smc(&with_b).0, 0);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn run_failures() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(
        dir.path(),
        "u.sm",
        "class A { signal Go(); signal Other(); statemachine { initial S; state S { on Go -> S { } } } } instance a: A;",
    );
    let scn = write(dir.path(), "u.scn", "at 0 send a.Other();");
    let (code, _, err) = smc(&["run", &model, "--scenario", &scn]);
    assert_eq!(code, 2);
    assert!(err.contains("E_UNHANDLED"), "{err}");
    let (code, out, _) = smc(&["run", &model, "--scenario", &scn, "--mode", "lenient"]);
    assert_eq!(code, 0, "{out}");

    let wrong = write(dir.path(), "w.scn", "at 0 send a.Go(); expect a.nope == 1;");
    assert_eq!(smc(&["run", &model, "--scenario", &wrong]).0, 2);

    let failing = write(
        dir.path(),
        "f.scn",
        "at 0 send ping.Hit(); expect ping.hits == 2;",
    );
    let (code, out, err) = smc(&["run", &corpus("pingpong/pingpong.sm"), "--scenario", &failing]);
    assert_eq!(code, 2);
    assert!(out.contains("expectations=0/1"), "{out}");
    assert!(err.contains("E_EXPECTATION"), "{err}");

    assert_eq!(smc(&["run", &model, "--scenario", &scn, "--bogus"]).0, 4);
    assert_eq!(smc(&["run", &model]).0, 4);
    assert_eq!(smc(&["frobnicate"]).0, 4);
}

#[test]
fn run_step_limit() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(
        dir.path(),
        "loop.sm",
        "class A { signal Go(); statemachine { initial S; state S { on Go -> S { send a.Go(); } } } } instance a: A;",
    );
    let scn = write(dir.path(), "l.scn", "at 0 send a.Go();");
    let (code, out, err) = smc(&["run", &model, "--scenario", &scn, "--max-steps", "5"]);
    assert_eq!(code, 2);
    assert!(out.starts_with("outcome=step-limit steps=5"), "{out}");
    assert!(err.contains("E_STEP_LIMIT"), "{err}");
}

#[test]
fn partition_lists_classes_then_boundary() {
    let (code, out, _) = smc(&[
        "partition",
        &corpus("pingpong/pingpong.sm"),
        "--marks",
        &corpus("pingpong/pong_hw.marks"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "Ping SW\nPong HW\nPong.Hit sw_to_hw\n");

    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "e.marks", "");
    let (code, out, _) = smc(&["partition", &corpus("pingpong/pingpong.sm"), "--marks", &empty]);
    assert_eq!((code, out.as_str()), (0, "Ping SW\nPong SW\n"));

    let bad = write(dir.path(), "b.marks", "mark isHardware on Nope;");
    let (code, _, err) = smc(&["partition", &corpus("pingpong/pingpong.sm"), "--marks", &bad]);
    assert_eq!(code, 1);
    assert!(err.contains("E_MARK_PATH"), "{err}");
}

#[test]
fn cosim_pingpong_and_race() {
    let (code, out, _) = smc(&[
        "cosim",
        &corpus("pingpong/pingpong.sm"),
        "--marks",
        &corpus("pingpong/pong_hw.marks"),
        "--scenario",
        &corpus("pingpong/pingpong.scn"),
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("L1 pass L2 pass L3 pass\n"), "{out}");

    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "e.marks", "");
    let (code, out, _) = smc(&[
        "cosim",
        &corpus("counter/counter.sm"),
        "--marks",
        &empty,
        "--scenario",
        &corpus("counter/long.scn"),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("crossings=0"), "{out}");

    let (code, out, _) = smc(&[
        "cosim",
        &corpus("race/race.sm"),
        "--marks",
        &corpus("race/left_hw.marks"),
        "--scenario",
        &corpus("race/race.scn"),
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("L1 pass L2 pass L3 fail (informative)\n"), "{out}");
    assert!(out.contains("sink.last: reference 2 vs partitioned 1"), "{out}");

    let (code, _, _) = smc(&[
        "cosim",
        &corpus("pingpong/pingpong.sm"),
        "--marks",
        &corpus("pingpong/pong_hw.marks"),
        "--scenario",
        &corpus("pingpong/pingpong.scn"),
        "--latency",
        "0",
    ]);
    assert_eq!(code, 4);
}

#[test]
fn cosim_trace_has_bus_keys() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("c.jsonl");
    let (code, _, _) = smc(&[
        "cosim",
        &corpus("pingpong/pingpong.sm"),
        "--marks",
        &corpus("pingpong/pong_hw.marks"),
        "--scenario",
        &corpus("pingpong/pingpong.scn"),
        "--latency",
        "2",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(trace).unwrap();
    let pong: serde_json::Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
    assert_eq!(pong["receiver"], "pong");
    assert_eq!(pong["bus_enqueue_step"], 0);
    assert_eq!(pong["bus_deliver_step"], 2);
}

fn gen(model: &str, marks: &str, out: &Path) -> (i32, String, String) {
    smc(&["gen", model, "--marks", marks, "-o", out.to_str().unwrap()])
}

const FILES: [&str; 4] = [
    "pingpong_sw.c",
    "pingpong_sw.h",
    "pingpong_hw.vhd",
    "pingpong_interface.json",
];

#[test]
fn gen_writes_four_files_and_repartitions() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = gen(&corpus("pingpong/pingpong.sm"), &corpus("pingpong/pong_hw.marks"), dir.path());
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 4);
    for f in FILES {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let header = fs::read_to_string(dir.path().join("pingpong_sw.h")).unwrap();
    assert!(header.contains("#define SIG_PONG_HIT 0"));

    let (code, _, _) = gen(&corpus("pingpong/pingpong.sm"), &corpus("pingpong/ping_hw.marks"), dir.path());
    assert_eq!(code, 0);
    let header = fs::read_to_string(dir.path().join("pingpong_sw.h")).unwrap();
    let vhdl = fs::read_to_string(dir.path().join("pingpong_hw.vhd")).unwrap();
    assert!(vhdl.contains("entity sm_Ping is") && !vhdl.contains("entity sm_Pong"));
    assert!(header.contains("#define SIG_PONG_HIT 0"));
    assert_eq!(smc(&["checkgen", dir.path().to_str().unwrap()]).0, 0);
}

#[test]
fn gen_input_and_output_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "b.marks", "mark isHardware = 1 on Pong;");
    assert_eq!(gen(&corpus("pingpong/pingpong.sm"), &bad, dir.path()).0, 1);

    let blocker = PathBuf::from(write(dir.path(), "file", "not a directory"));
    let (code, _, _) = gen(&corpus("pingpong/pingpong.sm"), &corpus("pingpong/pong_hw.marks"), &blocker.join("out"));
    assert_eq!(code, 4);
}

#[test]
fn checkgen_detects_tampering_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gen(&corpus("pingpong/pingpong.sm"), &corpus("pingpong/pong_hw.marks"), dir.path()).0, 0);
    let d = dir.path().to_str().unwrap();
    let (code, out, _) = smc(&["checkgen", d]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "ok 1 boundary signal(s)");

    let header = dir.path().join("pingpong_sw.h");
    let text = fs::read_to_string(&header).unwrap();
    fs::write(&header, text.replace("#define SIG_PONG_HIT 0", "#define SIG_PONG_HIT 1")).unwrap();
    let (code, out, _) = smc(&["checkgen", d]);
    assert_eq!(code, 3);
    assert!(out.contains("divergence c_header: SIG_PONG_HIT: 1 ≠ 0"), "{out}");

    fs::write(&header, text).unwrap();
    assert_eq!(smc(&["checkgen", d]).0, 0);
    fs::remove_file(dir.path().join("pingpong_interface.json")).unwrap();
    assert_eq!(smc(&["checkgen", d]).0, 4);
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = smc(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("checkgen"));
    assert_eq!(smc(&["--version"]).0, 0);
}
