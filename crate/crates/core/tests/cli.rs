//! End-to-end checks of the command line binary: output shapes, exit
//! codes, and run-to-run determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dattc::fixtures;
use dattc::format::parse_certificate;
use dattc::{parse_instance, parse_match, serialize_match};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dattc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("dattc-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let path = self.0.join(name);
        std::fs::write(&path, contents).unwrap();
        path.to_str().unwrap().to_string()
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_str().unwrap().to_string()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

#[test]
fn solve_is_deterministic_and_exact() {
    let first = run(&["solve", &fixture("ex1.txt")]);
    let second = run(&["solve", &fixture("ex1.txt")]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let inst = fixtures::ex1();
    assert_eq!(
        stdout(&first),
        serialize_match(&inst, &fixtures::ex1_final_match(&inst))
    );
}

#[test]
fn solve_trace_stays_parseable() {
    let output = run(&["solve", &fixture("ex2.txt"), "--trace"]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.lines().any(|l| l.starts_with("# ")));
    let inst = fixtures::ex2();
    let m = parse_match(&text, &inst).unwrap();
    assert_eq!(m, fixtures::ex2_stage1_match(&inst));
}

#[test]
fn solve_writes_output_files() {
    let scratch = Scratch::new("solve");
    let out = scratch.path("stage1.match");
    let status = run(&["solve", &fixture("ex1.txt"), "--stage", "da", "-o", &out]);
    assert!(status.status.success());
    let inst = fixtures::ex1();
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        written,
        serialize_match(&inst, &fixtures::ex1_stage1_match(&inst))
    );
}

#[test]
fn verify_exit_codes_cover_all_three_verdicts() {
    let inst = fixtures::ex1();
    let scratch = Scratch::new("verify");
    let uc = scratch.file(
        "uc.match",
        &serialize_match(&inst, &fixtures::ex1_final_match(&inst)),
    );
    let gs = scratch.file(
        "gs.match",
        &serialize_match(&inst, &fixtures::ex1_stage1_match(&inst)),
    );
    let traded = scratch.file(
        "traded.match",
        &serialize_match(&inst, &fixtures::ex1_single_group_match(&inst)),
    );

    let ok = run(&["verify", &fixture("ex1.txt"), &uc, "--core", "unified"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok).trim(), "in");

    let blocked = run(&["verify", &fixture("ex1.txt"), &gs, "--core", "unified"]);
    assert_eq!(blocked.status.code(), Some(1));
    let cert = parse_certificate(&stdout(&blocked), &inst).expect("printed certificate parses");
    assert!(!cert.members.is_empty());

    let between = run(&["verify", &fixture("ex1.txt"), &traded, "--core", "unified"]);
    assert_eq!(between.status.code(), Some(1));
    assert!(stdout(&between).starts_with("kind : between"));

    let unknown = run(&[
        "verify",
        &fixture("ex1.txt"),
        &uc,
        "--core",
        "unified",
        "--budget",
        "3",
    ]);
    assert_eq!(unknown.status.code(), Some(2));

    let unfair = run(&["verify", &fixture("ex1.txt"), &uc, "--core", "fair"]);
    assert_eq!(unfair.status.code(), Some(1));
    assert!(stdout(&unfair).contains("student : 3"));

    let fair = run(&["verify", &fixture("ex1.txt"), &gs, "--core", "fair"]);
    assert_eq!(fair.status.code(), Some(0));

    let coarse_inst = fixtures::ex1_coarse();
    let coarse_match = scratch.file(
        "coarse.match",
        &serialize_match(
            &coarse_inst,
            &fixtures::ex1_single_group_match(&coarse_inst),
        ),
    );
    let efficient = run(&[
        "verify",
        &fixture("ex1_coarse.txt"),
        &coarse_match,
        "--core",
        "efficient",
    ]);
    assert_eq!(efficient.status.code(), Some(0));

    // The stage-1 match is dominated, so the efficient core rejects it.
    let coarse_stage1 = scratch.file(
        "coarse_stage1.match",
        &serialize_match(&coarse_inst, &fixtures::ex1_stage1_match(&coarse_inst)),
    );
    let rejected = run(&[
        "verify",
        &fixture("ex1_coarse.txt"),
        &coarse_stage1,
        "--core",
        "efficient",
    ]);
    assert_eq!(rejected.status.code(), Some(1));
    assert!(stdout(&rejected).starts_with("kind : efficient"));
}

#[test]
fn verify_replays_its_own_certificates() {
    let inst = fixtures::ex1();
    let scratch = Scratch::new("replay");
    let traded = scratch.file(
        "traded.match",
        &serialize_match(&inst, &fixtures::ex1_single_group_match(&inst)),
    );
    let blocked = run(&["verify", &fixture("ex1.txt"), &traded, "--core", "unified"]);
    assert_eq!(blocked.status.code(), Some(1));

    // The certificate's alternative match is itself a readable match file.
    let cert_file = scratch.file("cert.match", &stdout(&blocked));
    let replay = run(&["verify", &fixture("ex1.txt"), &cert_file, "--core", "fair"]);
    assert!(replay.status.code().is_some());
    parse_match(&stdout(&blocked), &inst).expect("certificate readable as a match");
}

#[test]
fn gen_is_seed_deterministic_and_valid() {
    let a = run(&["gen", "--seed", "7", "--students", "6", "--schools", "4"]);
    let b = run(&["gen", "--seed", "7", "--students", "6", "--schools", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let inst = parse_instance(&stdout(&a)).expect("generated instance validates");
    assert_eq!(inst.n_students(), 6);
    assert_eq!(inst.n_schools(), 4);

    let c = run(&["gen", "--seed", "8", "--students", "6", "--schools", "4"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn gen_honors_range_flags() {
    let out = run(&[
        "gen",
        "--seed",
        "5",
        "--students",
        "4",
        "--schools",
        "3",
        "--capacities",
        "2:2",
        "--list-len",
        "3:3",
        "--groups",
        "4:4",
    ]);
    assert!(out.status.success());
    let inst = parse_instance(&stdout(&out)).unwrap();
    for s in 0..inst.n_schools() {
        assert_eq!(inst.capacity(s), 2);
        assert_eq!(inst.groups(s).len(), 4);
    }
    for i in 0..inst.n_students() {
        assert_eq!(inst.pref_list(i).len(), 3);
    }

    let infeasible = run(&[
        "gen",
        "--seed",
        "5",
        "--students",
        "4",
        "--schools",
        "3",
        "--list-len",
        "0:9",
    ]);
    assert_eq!(infeasible.status.code(), Some(3));
}

#[test]
fn compare_emits_text_and_json() {
    let text = run(&["compare", &fixture("ex1.txt")]);
    assert!(text.status.success());
    assert!(stdout(&text).contains("improved     2"));

    let json = run(&["compare", &fixture("ex1.txt"), "--json"]);
    assert!(json.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(value["da_ttc"]["improved_by_stage2"], 2);
    assert_eq!(value["da"]["core"]["fair"], "fair");

    let trials = run(&["compare", &fixture("ex1.txt"), "--trials", "3", "--json"]);
    assert!(trials.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&trials)).unwrap();
    assert_eq!(value["trials"], 3);
    assert_eq!(value["runs"].as_array().unwrap().len(), 3);

    let trials_text = run(&["compare", &fixture("ex1.txt"), "--trials", "2"]);
    assert!(trials_text.status.success());
    let text = stdout(&trials_text);
    assert!(text.contains("lottery seed 1"));
    assert!(text.contains("lottery seed 2"));
    assert!(text.contains("mean improved by stage 2"));

    // Trial runs are deterministic in the lottery seeds.
    let again = run(&["compare", &fixture("ex1.txt"), "--trials", "2"]);
    assert_eq!(trials_text.stdout, again.stdout);
}

#[test]
fn operational_errors_exit_with_three() {
    assert_eq!(run(&["solve", "/no/such/file"]).status.code(), Some(3));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(
        run(&["verify", &fixture("ex1.txt"), &fixture("ex1.txt")])
            .status
            .code(),
        Some(3) // --core missing
    );
    let garbage = Scratch::new("garbage").file("bad.txt", "students x\nschool x capacity 1\n");
    assert_eq!(run(&["solve", &garbage]).status.code(), Some(3));
}

#[test]
fn help_prints_usage() {
    let help = run(&["--help"]);
    assert!(help.status.success());
    assert!(stdout(&help).contains("usage:"));
    assert!(Path::new(&fixture("ex1.txt")).exists());
}
