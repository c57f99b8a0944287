use std::path::Path;
use std::process::{Command, Output};

use sobolev_lab::harness::{run_cli, ExperimentConfig, Suite};

fn lab(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sobolev-lab"));
    cmd.args(args).env_remove("SOBOLEV_LAB_OUT").env_remove("SOBOLEV_LAB_THREADS");
    if let Some(out) = out {
        cmd.arg("--out").arg(out);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn list_and_print_default_config() {
    let o = lab(&["list-suites"], None);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for suite in Suite::ALL {
        assert!(text.contains(suite.name()));
    }
    let o = lab(&["print-default-config", "cutoff"], None);
    assert_eq!(code(&o), 0);
    let cfg = ExperimentConfig::from_toml(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(cfg, ExperimentConfig::for_suite(Suite::Cutoff));
    assert_eq!(code(&lab(&["print-default-config", "nope"], None)), 2);
    assert_eq!(run_cli(["sobolev-lab", "list-suites"]), 0);
    assert_eq!(run_cli(["sobolev-lab", "frobnicate"]), 2);
}

#[test]
fn configuration_errors_exit_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "grids = [64\n").unwrap();
    let o = lab(&["run", "norm", "--config", bad.to_str().unwrap()], Some(&out));
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    std::fs::write(&bad, "unknown_key = 3\n").unwrap();
    assert_eq!(code(&lab(&["run", "norm", "--config", bad.to_str().unwrap()], Some(&out))), 2);
    std::fs::write(&bad, "suite = \"cutoff\"\n").unwrap();
    assert_eq!(code(&lab(&["run", "norm", "--config", bad.to_str().unwrap()], Some(&out))), 2);
    assert_eq!(code(&lab(&["run", "no-such-suite"], Some(&out))), 2);
    assert_eq!(code(&lab(&["run", "norm", "--grid", "48"], Some(&out))), 2);
    assert_eq!(code(&lab(&["run", "norm", "--threads", "0"], Some(&out))), 2);
    assert!(!out.exists());
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = lab(&["run", "slice-roundtrip"], Some(&blocker.join("sub")));
    assert_eq!(code(&o), 2);
}

#[test]
fn failing_checks_exit_1_and_still_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    std::fs::write(&cfg, "samples = 1\n[tolerances]\nfield-error = -1.0\n").unwrap();
    let out = dir.path().join("out");
    let o = lab(&["run", "slice-roundtrip", "--config", cfg.to_str().unwrap()], Some(&out));
    assert_eq!(code(&o), 1);
    let csv = std::fs::read_to_string(out.join("slice-roundtrip.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.lines().any(|l| l.contains("field-error") && l.ends_with("false")));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("slice-roundtrip.json")).unwrap()).unwrap();
    assert_eq!(json["all_passed"], false);
    assert_eq!(json["counts"]["failed"], 1);
}

#[test]
fn environment_sets_output_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let env_out = dir.path().join("env");
    let o = Command::new(env!("CARGO_BIN_EXE_sobolev-lab"))
        .args(["run", "slice-roundtrip", "--grid", "32", "--seed", "5", "--plot"])
        .env("SOBOLEV_LAB_OUT", &env_out)
        .env("SOBOLEV_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.code().unwrap() <= 1);
    assert!(env_out.join("slice-roundtrip.csv").exists());
    assert!(env_out.join("slice-roundtrip_plot.py").exists());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(env_out.join("slice-roundtrip.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["chart_n"], 32);
    assert_eq!(json["config"]["seed"], 5);
    assert_eq!(json["config"]["threads"], 1);
    assert_eq!(json["schema_version"], 1);
    let flag_out = dir.path().join("flag");
    let o = Command::new(env!("CARGO_BIN_EXE_sobolev-lab"))
        .args(["run", "loss-of-derivatives", "--out", flag_out.to_str().unwrap()])
        .env("SOBOLEV_LAB_OUT", &env_out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_out.join("loss-of-derivatives.csv").exists());
    assert!(!env_out.join("loss-of-derivatives.csv").exists());
}

#[test]
fn sweep_has_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, "grids = [32, 64]\nregularities = [7.0, 5.0, 4.25]\norders = [1, 2]\n").unwrap();
    let out = dir.path().join("out");
    let o = lab(&["run", "loss-of-derivatives", "--config", cfg.to_str().unwrap()], Some(&out));
    assert!(code(&o) <= 1);
    let csv = std::fs::read_to_string(out.join("loss-of-derivatives.csv")).unwrap();
    assert_eq!(csv.lines().count() - 1, 2 * 3 * 2);
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&lab(&["run", "action-derivative", "--seed", "99"], Some(out))), 0);
    }
    for name in ["action-derivative.csv", "action-derivative.json"] {
        let (x, y) = (std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
        assert!(x == y, "{name} differs");
    }
}
