use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn smm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smm"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = "env = load_unload\nagent = smm\nruns = 3\nepisodes = 20\noutput = out/ll\n";

#[test]
fn run_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ll.cfg", SMALL);
    let out = smm(&["run", &cfg], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let runs = fs::read_to_string(dir.path().join("out/ll.runs.csv")).unwrap();
    let agg = fs::read_to_string(dir.path().join("out/ll.aggregate.csv")).unwrap();
    assert!(
        runs.starts_with("run,episode,steps,extrinsic_return,intrinsic_return,memory_changes\n")
    );
    assert_eq!(runs.lines().count(), 1 + 3 * 20);
    assert!(agg.starts_with("episode,metric,mean,ci_low,ci_high\n"));
    assert_eq!(agg.lines().count(), 1 + 4 * 20);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ll.cfg", SMALL);
    let read = |prefix: &str| {
        let out = smm(&["run", &cfg, "--seed", "7", "--out", prefix], dir.path());
        assert!(out.status.success());
        (
            fs::read(dir.path().join(format!("{prefix}.runs.csv"))).unwrap(),
            fs::read(dir.path().join(format!("{prefix}.aggregate.csv"))).unwrap(),
        )
    };
    let a = read("a");
    assert_eq!(a, read("b"));
    let out = smm(&["run", &cfg, "--seed", "8", "--out", "c"], dir.path());
    assert!(out.status.success());
    assert_ne!(a.0, fs::read(dir.path().join("c.runs.csv")).unwrap());
}

#[test]
fn missing_map_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "m.cfg",
        "env = meuleau\n[env]\nmap = absent.map\n",
    );
    let out = smm(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.map"));
}

#[test]
fn bad_map_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.map"), "#####\n#S.G\n#####\n").unwrap();
    let cfg = write_config(dir.path(), "m.cfg", "env = meuleau\n[env]\nmap = bad.map\n");
    let out = smm(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.map") && err.contains("line 2"), "{err}");
}

#[test]
fn sweep_writes_one_set_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tm.cfg",
        "env = tree_maze\ncapacity = 2\nruns = 2\nepisodes = 10\noutput = tm\n",
    );
    let out = smm(
        &["sweep", &cfg, "--param", "beta", "--values", "0,0.2,1.0"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for v in ["0", "0.2", "1.0"] {
        assert!(dir
            .path()
            .join(format!("tm_beta_{v}.aggregate.csv"))
            .exists());
    }
    let out = smm(
        &["sweep", &cfg, "--param", "lambda", "--values", "0,0.9"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(dir.path().join("tm_lambda_0.9.runs.csv").exists());
}

#[test]
fn sweep_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ll.cfg", SMALL);
    assert_eq!(
        smm(
            &["sweep", &cfg, "--param", "beta", "--values", ""],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        smm(
            &["sweep", &cfg, "--param", "depth", "--values", "1"],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        smm(
            &["sweep", &cfg, "--param", "beta", "--values", "2"],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn audit_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = smm(&["audit", "tree_maze"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout)
        .starts_with("tree_maze: states=140 observations=14 actions=3"));
    assert_eq!(
        smm(&["audit", "atlantis"], dir.path()).status.code(),
        Some(1)
    );
}

#[test]
fn aggregate_recomputes_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ll.cfg", SMALL);
    assert!(smm(&["run", &cfg], dir.path()).status.success());
    let out = smm(
        &["aggregate", "out/ll.runs.csv", "--out", "again.csv"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        fs::read(dir.path().join("again.csv")).unwrap(),
        fs::read(dir.path().join("out/ll.aggregate.csv")).unwrap()
    );
    assert_eq!(
        smm(&["aggregate", "nothing.csv"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(smm(&[], dir.path()).status.code(), Some(1));
    assert_eq!(smm(&["fly"], dir.path()).status.code(), Some(1));
    assert_eq!(smm(&["--help"], dir.path()).status.code(), Some(0));
}
