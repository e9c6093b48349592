use std::process::Command;

use sspkit::bench::read_csv;
use sspkit::cli::run;
use sspkit::domains::{fig2_example, read_grounded, serialize_grounded};

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run(std::iter::once("sspkit").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sspkit"))
}

#[test]
fn solve_prints_the_initial_value() {
    let (code, out) = run_cli(&["solve", "--problem", "fig2", "--algo", "cg-ilao"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("v_s0 = 4"), "{out}");
}

#[test]
fn every_algorithm_agrees_on_small_tire_world() {
    for algo in ["vi", "ilao", "cg-ilao", "lrtdp"] {
        let (code, out) = run_cli(&["solve", "--problem", "tw:1,2", "--algo", algo]);
        assert_eq!(code, 0, "{algo}: {out}");
        assert!(out.contains("v_s0 = 6.25"), "{algo}: {out}");
    }
}

#[test]
fn trace_flag_emits_json_iterations() {
    let (code, out) = run_cli(&["solve", "--problem", "fig2", "--heuristic", "given", "--trace"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"values_after_fix\""), "{out}");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["solve", "--problem", "fig2", "--algo", "nosuch"][..],
        &["solve", "--problem", "tw:9,1"],
        &["solve", "--problem", "fig2", "--heuristic", "pert:1.5"],
        &["solve", "--problem", "fig2", "--epsilon", "-1"],
        &["solve", "--problem", "file:/definitely/not/here.json"],
        &["density", "--problem", "fig2", "--algo", "vi"],
        &["frobnicate"],
    ] {
        assert_eq!(run_cli(args).0, 2, "{args:?}");
    }
}

#[test]
fn unsolved_verification_exits_with_one() {
    let (code, _) = run_cli(&["verify", "--problem", "tw:2,2", "--timeout", "0"]);
    assert_eq!(code, 1);
}

#[test]
fn verify_passes_for_each_solver() {
    for algo in ["vi", "ilao", "cg-ilao", "lrtdp"] {
        let (code, out) = run_cli(&["verify", "--problem", "tw:2,3", "--algo", algo]);
        assert_eq!(code, 0, "{algo}: {out}");
        assert!(out.contains("all certificates passed"), "{out}");
    }
}

#[test]
fn density_reports_a_fraction() {
    let (code, out) = run_cli(&["density", "--problem", "tw:2,4", "--algo", "ilao"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.to_lowercase().contains("density"), "{out}");
}

#[test]
fn gen_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.json");
    let p = path.to_str().unwrap();
    let (code, _) = run_cli(&["gen", "--problem", "fig2", "--out", p]);
    assert_eq!(code, 0);
    let loaded = read_grounded(&path).unwrap();
    assert_eq!(serialize_grounded(&loaded), serialize_grounded(&fig2_example().0));

    let selector = format!("file:{p}");
    let (code, out) = run_cli(&["solve", "--problem", &selector, "--algo", "vi"]);
    assert_eq!(code, 0);
    assert!(out.contains("v_s0 = 4"), "{out}");
}

#[test]
fn malformed_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"states": ["a"], "initial": "a", "goals": ["b"], "actions": {}}"#)
        .unwrap();
    let selector = format!("file:{}", path.display());
    assert_eq!(run_cli(&["solve", "--problem", &selector]).0, 2);
}

#[test]
fn bench_writes_a_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let (code, _) = run_cli(&[
        "bench",
        "--problems",
        "fig2;tw:1,1",
        "--algos",
        "vi,cg-ilao",
        "--heuristics",
        "zero,det",
        "--seeds",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let rows = read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 2 * 2);
    assert!(rows.iter().all(|r| r.solved));
}

#[test]
fn binary_help_and_version() {
    let help = binary().arg("--help").output().unwrap();
    assert!(help.status.success());
    let text = String::from_utf8_lossy(&help.stdout);
    for sub in ["gen", "solve", "bench", "verify", "density"] {
        assert!(text.contains(sub), "{text}");
    }
    let version = binary().arg("--version").output().unwrap();
    assert!(version.status.success());
    assert!(String::from_utf8_lossy(&version.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn binary_exit_codes() {
    let ok = binary().args(["solve", "--problem", "fig2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let usage = binary().args(["solve"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let failed = binary()
        .args(["verify", "--problem", "tw:2,2", "--timeout", "0"])
        .output()
        .unwrap();
    assert_eq!(failed.status.code(), Some(1));
}
