use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn pplab(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pplab"))
        .current_dir(cwd)
        .env_remove("PPLAB_CACHE")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const ENVELOPE: [&str; 7] = ["envelope", "--set", "ball:0,1", "--degree", "64", "--eval", "2,0"];

#[test]
fn envelope_prints_log_two_and_writes_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pplab(tmp.path(), &ENVELOPE);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("0.6931"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(tmp.path().join("pplab-out/envelope.csv")).unwrap();
    assert!(csv.lines().count() >= 2);
    assert!(tmp.path().join("pplab-out/job.toml").exists());
}

#[test]
fn rerun_hits_cache_and_changed_degree_misses() {
    let tmp = tempfile::tempdir().unwrap();
    let first = pplab(tmp.path(), &ENVELOPE);
    assert_eq!(first.status.code(), Some(0));
    let t = Instant::now();
    let again = pplab(tmp.path(), &ENVELOPE);
    let took = t.elapsed().as_secs_f64();
    assert_eq!(again.status.code(), Some(0));
    assert!(stderr(&again).contains("cache hit"), "{}", stderr(&again));
    assert_eq!(stdout(&first), stdout(&again));
    assert!(took < 0.5, "cache hit took {took:.3} s");

    let mut changed = ENVELOPE;
    changed[4] = "32";
    let other = pplab(tmp.path(), &changed);
    assert_eq!(other.status.code(), Some(0));
    assert!(!stderr(&other).contains("cache hit"));
}

#[test]
fn cache_flag_beats_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pplab"))
        .current_dir(tmp.path())
        .env("PPLAB_CACHE", tmp.path().join("from-env"))
        .args(["--cache", "from-flag"])
        .args(ENVELOPE)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(tmp.path().join("from-flag").is_dir());
    assert!(!tmp.path().join("from-env").exists());
}

#[test]
fn truncated_field_in_cache_is_a_miss_with_warning() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["--cache", "c", "relative", "--set", "ball:0,0.5", "--domain", "ball:0,1", "--res", "64"];
    let o = pplab(tmp.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let entry = std::fs::read_dir(tmp.path().join("c")).unwrap().next().unwrap().unwrap().path();
    let field = entry.join("relative.pplab");
    let bytes = std::fs::read(&field).unwrap();
    std::fs::write(&field, &bytes[..bytes.len() / 2]).unwrap();

    let again = pplab(tmp.path(), &args);
    assert_eq!(again.status.code(), Some(0));
    let err = stderr(&again);
    assert!(err.contains("warning") && !err.contains("cache hit"), "{err}");
    assert_eq!(std::fs::read(&field).unwrap(), bytes);
}

#[test]
fn usage_and_config_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(pplab(tmp.path(), &["--bogus"]).status.code(), Some(2));
    assert_eq!(pplab(tmp.path(), &["envelope", "--set", "blob"]).status.code(), Some(2));
    assert_eq!(pplab(tmp.path(), &["verify", "--set", "ball:0,1"]).status.code(), Some(2));
    assert_eq!(pplab(tmp.path(), &["run", "missing.toml"]).status.code(), Some(2));
}

#[test]
fn verify_convex_prints_pass_row() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pplab(
        tmp.path(),
        &["--no-cache", "verify", "--claim", "THM15_CONVEX", "--set", "ball:0,1", "--anchor", "1,0"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let row = stdout(&o).lines().next().unwrap().to_string();
    assert!(row.starts_with("THM15_CONVEX"), "{row}");
    assert!(row.contains("PASS") && row.contains("predicted          1"), "{row}");
    let verdict = std::fs::read_to_string(tmp.path().join("pplab-out/verdict.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&verdict).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
}

#[test]
fn config_job_matches_flags_and_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let flags = pplab(tmp.path(), &["--no-cache", "--out", "a"].iter().chain(&ENVELOPE).copied().collect::<Vec<_>>());
    assert_eq!(flags.status.code(), Some(0));
    // the recorded job file is itself a runnable config
    let job = tmp.path().join("a/job.toml");
    let from_file = pplab(tmp.path(), &["--no-cache", "--out", "b", "run", job.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    assert_eq!(stdout(&flags), stdout(&from_file));
    for name in ["envelope.csv", "job.toml"] {
        let a = std::fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }

    std::fs::write(tmp.path().join("bad.toml"), "command = \"envelope\"\n[numeric]\ndegre = 3\n").unwrap();
    assert_eq!(pplab(tmp.path(), &["run", "bad.toml"]).status.code(), Some(2));
}

#[test]
fn independent_runs_are_bitwise_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec!["--no-cache", "--out", out, "modulus", "--set", "ball:0,1", "--spacing", "0.05", "--res", "64"]
    };
    assert_eq!(pplab(tmp.path(), &args("x")).status.code(), Some(0));
    assert_eq!(pplab(tmp.path(), &args("y")).status.code(), Some(0));
    for name in ["modulus.csv", "modulus.svg", "fit.json"] {
        let a = std::fs::read(tmp.path().join("x").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("y").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}
