use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopbandit")).args(args).env("COOPBANDIT_THREADS", "2").output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("cfg.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{"variant": "rcl_lf", "graph": "erdos_renyi(8,0.5)", "K": 3, "T": 50, "reps": 3, "link_p": 0.8}"#;

#[test]
fn graph_info_matches_golden() {
    let out = bin(&["graph-info", "--graph", "multi_star(2,3)", "--seed", "0"]);
    assert!(out.status.success());
    let golden = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/graph_info_multi_star.txt")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}

#[test]
fn graph_info_writes_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.txt");
    let out = bin(&["graph-info", "--graph", "path(4)", "--edges", edges.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(edges).unwrap();
    assert_eq!(text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).count(), 3);
}

#[test]
fn simulate_writes_bundle_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = bin(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["traces.csv", "summary.txt", "plot.svg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(a.join("traces.csv")).unwrap();
    assert!(csv.starts_with("t,mean_regret,std_regret"));
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn tiny_run_has_header_plus_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("o");
    let o = bin(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--reps", "1", "--no-plot"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("traces.csv")).unwrap();
    assert!(!out.join("plot.svg").exists());
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("0")));

    let cfg2 = write_config(dir.path(), &SMALL.replace(r#""T": 50"#, r#""T": 2"#));
    let out2 = dir.path().join("o2");
    assert!(bin(&["simulate", "--config", &cfg2, "--out", out2.to_str().unwrap(), "--reps", "1"]).status.success());
    assert_eq!(fs::read_to_string(out2.join("traces.csv")).unwrap().lines().count(), 3);
}

#[test]
fn bad_config_fails_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("link_p", "link_q"));
    let o = bin(&["simulate", "--config", &cfg, "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error:") && err.contains("link_q"), "{err}");
}

#[test]
fn sweep_writes_one_dir_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("s");
    let o = bin(&[
        "sweep", "--config", &cfg, "--param", "link_p", "--values", "0.2,1", "--param", "xi", "--values", "1.1,2",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let subdirs = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count();
    assert_eq!(subdirs, 4);
    assert!(out.join("summary.txt").exists() && out.join("plot.svg").exists());

    let bad = bin(&["sweep", "--config", &cfg, "--param", "colour", "--values", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn repro_rejects_unknown_id() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["repro", "z", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("a, b, c, d, e"));
}

#[test]
fn repro_runs_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["repro", "e", "--out", dir.path().to_str().unwrap(), "--reps", "2", "--no-plot"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("reps=2"), "{summary}");
}
