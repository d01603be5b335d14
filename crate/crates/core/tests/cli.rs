use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_phantomdr"));
    c.env_remove("PHANTOMDR_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_feasible() {
    let o = run(&["solve", "--beta", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("alpha=0.3 lambda=1.1 effort=0.4"), "{}", stdout(&o));
}

#[test]
fn solve_infeasible_target() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, "[scenario]\nbeta = 1\ngamma = 0.6\n").unwrap();
    let o = run(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_beta_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, "[scenario]\nn = 2\n").unwrap();
    let o = run(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta"));
    assert_eq!(run(&["solve"]).status.code(), Some(1));
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, "[scenario]\nbeta = 1\nsigma = lots\n").unwrap();
    let o = run(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(run(&["verify", "--beta", "1"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--beta", "1", "--perturb-effort", "0.05"]).status.code(), Some(3));
    let demo = run(&["verify", "--demo"]);
    assert_eq!(demo.status.code(), Some(0));
    assert!(stdout(&demo).contains("linear_bonus_inflation"));
}

#[test]
fn fig2_sweep_shape() {
    let o = run(&["sweep", "fig2", "--beta", "0.25,0.5,0.75", "--n", "1..20", "--reps", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("kind,param_name,param_value,n,beta"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 60);
    assert!(rows.iter().all(|r| r.starts_with("fig2_beta_N,")));
}

#[test]
fn simulate_is_reproducible() {
    let a = run(&["simulate", "--beta", "1", "--seed", "42", "--reps", "20000"]);
    let b = run(&["simulate", "--beta", "1", "--seed", "42", "--reps", "20000"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["simulate", "--beta", "1", "--seed", "7", "--reps", "20000"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn environment_seed_overrides_flag() {
    let flag = run(&["simulate", "--beta", "1", "--seed", "9", "--reps", "5000"]);
    let env = bin()
        .args(["simulate", "--beta", "1", "--seed", "1", "--reps", "5000"])
        .env("PHANTOMDR_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn emitted_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(&["solve", "--beta", "0.75", "--seed", "5", "--emit-config"]);
    assert_eq!(first.status.code(), Some(0));
    let path = dir.path().join("emitted.toml");
    std::fs::write(&path, &first.stdout).unwrap();
    let second = run(&["solve", "--config", path.to_str().unwrap(), "--emit-config"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn output_file_and_unwritable_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("row.csv");
    let o = run(&["simulate", "--beta", "1", "--reps", "1000", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("kind,"));
    let bad = dir.path().join("missing").join("row.csv");
    let o = run(&["simulate", "--beta", "1", "--reps", "1000", "--out", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
