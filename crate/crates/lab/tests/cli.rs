use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dnlab(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_dnlab"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn synthetic_sweep_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dnlab(dir.path(), "family=synthetic\nmu=0.3\nmu=0.6\nmu=0.9\n", &["sweep"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/synthetic.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn partial_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dnlab(dir.path(), "family=synthetic\nmu=0.5\nmu=0.9999\n", &["sweep"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in ["family=klein-bottle\n", "colour=blue\n", "eps=0.1\neps=0.2\n", "eps=0.45\n"] {
        let out = dnlab(dir.path(), cfg, &["sweep"]);
        assert_eq!(out.status.code(), Some(1), "{cfg:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn torus_sweep_reruns_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "family=torus-hole\ntau_lat=0e0+1e0i\neps=0.3\neps=0.2\nworkers=2\n";
    let first = dnlab(dir.path(), cfg, &["sweep"]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let csv = fs::read(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(first.stdout, csv);

    let second = dnlab(dir.path(), cfg, &["sweep"]);
    assert_eq!(second.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&second.stderr).contains("0 FEM solve"));
    assert_eq!(fs::read(dir.path().join("out/report.csv")).unwrap(), csv);

    for name in dnlab::sweep::PLOT_NAMES {
        let svg = fs::read_to_string(dir.path().join(format!("out/plots/{name}.svg"))).unwrap();
        roxmltree::Document::parse(&svg).unwrap();
    }

    let report = dnlab(dir.path(), cfg, &["report"]);
    assert_eq!(report.status.code(), Some(0));
    assert_eq!(report.stdout, csv);
}
