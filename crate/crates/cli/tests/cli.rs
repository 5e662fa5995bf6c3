use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "map = chain11\nstart = 0,0\ngoal = 10,10\nruns = 2\nepisodes = 30\nmax_steps = 300\ntasks = 4\n\
                     task_episodes = 300\noption_episodes = 300\nseed = 3\n";

fn hstrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hstrl")).args(args).output().unwrap()
}

fn failed_stage(o: &Output) -> Option<String> {
    String::from_utf8_lossy(&o.stderr)
        .lines()
        .find_map(|l| l.split_once(" failed: ").map(|(stage, _)| stage.to_string()))
}

fn small_config(dir: &Path) -> String {
    let p = dir.join("small.cfg");
    fs::write(&p, SMALL).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn golden_reproduces_stored_hierarchy() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    let o = hstrl(&["golden", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("matches"));
    let txt = fs::read_to_string(d.path().join("hierarchy.txt")).unwrap();
    assert!(txt.starts_with("T2 root"));
    let rules = fs::read_to_string(d.path().join("rules.csv")).unwrap();
    assert!(rules.lines().any(|l| l.starts_with("7 27 34|54|1|1|")), "{rules}");
    for f in ["hierarchy.adj", "visits.csv", "visits.pgm", "transactions.csv"] {
        assert!(d.path().join(f).exists(), "{f}");
    }
}

#[test]
fn golden_with_loose_threshold_reports_mismatch() {
    let d = tempfile::tempdir().unwrap();
    let o = hstrl(&["golden", "--minsup", "0.1", "--out", d.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert_eq!(failed_stage(&o).as_deref(), Some("build-hst"));
}

#[test]
fn bad_config_fails_with_stage_name() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("bad.cfg");
    fs::write(&p, "minsup = 2\n").unwrap();
    let o = hstrl(&["experiment", "--config", p.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(failed_stage(&o).as_deref(), Some("config"));
    let o = hstrl(&["train", "--config", "/no/such/file"]);
    assert!(!o.status.success());
    assert_eq!(failed_stage(&o).as_deref(), Some("config"));
}

#[test]
fn flat_experiment_writes_curves_only() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small_config(d.path());
    let out = d.path().join("run");
    let o = hstrl(&["experiment", "--config", &cfg, "--method", "flat", "--runs", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let curves = fs::read_to_string(out.join("curves.csv")).unwrap();
    assert!(curves.starts_with("episode,flat_steps_0,flat_steps_1,flat_steps_2,"));
    assert_eq!(curves.lines().count(), 31);
    assert!(!out.join("hierarchy.txt").exists());
    assert!(fs::read_to_string(out.join("config.txt")).unwrap().contains("runs = 3"));
}

#[test]
fn mine_and_build_write_their_artifacts() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small_config(d.path());
    let m = d.path().join("mine");
    let o = hstrl(&["mine", "--config", &cfg, "--out", m.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rules = fs::read_to_string(m.join("rules.csv")).unwrap();
    assert_eq!(rules.lines().next(), Some("premise|consequent|support|confidence|order_freq"));
    assert!(!m.join("hierarchy.txt").exists());

    // rebuild from the written trajectories
    let b = d.path().join("build");
    let input = m.join("transactions.csv");
    let o = hstrl(&["build-hst", "--config", &cfg, "--input", input.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(b.join("rules.csv")).unwrap(), rules);
    assert!(b.join("hierarchy.txt").exists() && b.join("hierarchy.adj").exists());
    assert!(fs::read_to_string(b.join("visits.pgm")).unwrap().starts_with("P2\n"));
}

#[test]
fn train_and_run_hrl() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small_config(d.path());
    let t = d.path().join("train");
    let o = hstrl(&["train", "--config", &cfg, "--episodes", "20", "--out", t.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(t.join("curves.csv")).unwrap().lines().count(), 21);
    assert!(t.join("qtable.csv").exists());

    let h = d.path().join("hrl");
    let o = hstrl(&["run-hrl", "--config", &cfg, "--seed", "4", "--out", h.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(h.join("curves.csv")).unwrap().starts_with("episode,hier_steps_0"));
    assert!(h.join("hierarchy.txt").exists());
}
