use std::path::Path;
use std::process::{Command, Output};

use drsplit_cli::trace_csv::{read_scan_csv, read_trace_csv};

fn drsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drsplit")).args(args).output().expect("spawn drsplit")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn lad_writes_one_row_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let out = drsplit(&[
        "lad", "--m", "200", "--n", "100", "--lambda", "1.0", "--policy", "ts-adaptive", "--t0", "1", "--s0", "1",
        "--max-iter", "1000", "--seed", "42", "--out", path_str(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = read_trace_csv(&csv).unwrap();
    assert_eq!(trace.len(), 1000);
    assert!(trace.records.iter().enumerate().all(|(k, r)| r.k == k));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("k,objective,t,s,residual\n") && text.ends_with('\n'));
    // stepsizes settle: the multiplier is exactly 1 long before the end
    let tail = &trace.records[900..];
    assert!(tail.iter().all(|r| r.t.to_bits() == tail[0].t.to_bits() && r.s.to_bits() == tail[0].s.to_bits()));
}

#[test]
fn resolved_config_goes_to_stderr() {
    let out = drsplit(&["lad", "--m", "12", "--n", "5", "--max-iter", "3"]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    for needle in ["seed: 0", "cap: 10000.0", "omega_rate: 0.5", "policy: TsAdaptive", "max_iter: 3"] {
        assert!(err.contains(needle), "missing {needle} in {err}");
    }
    assert!(String::from_utf8_lossy(&out.stdout).contains("iterations 3"));
}

#[test]
fn tv_strong_penalty_hits_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tv.csv");
    let signal = dir.path().join("signal.csv");
    let out = drsplit(&[
        "tv", "--n", "500", "--lambda", "10", "--policy", "ts-adaptive", "--cap", "1e4", "--out", path_str(&csv),
        "--signal-out", path_str(&signal),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = read_trace_csv(&csv).unwrap();
    assert_eq!(trace.last().unwrap().s, 1e4);
    let rows = std::fs::read_to_string(&signal).unwrap();
    assert!(rows.starts_with("i,clean,noisy,x\n"));
    assert_eq!(rows.lines().count(), 501);
}

#[test]
fn spectrum_scan_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let (scan, eig, svg) = (dir.path().join("scan.csv"), dir.path().join("eig.csv"), dir.path().join("eig.svg"));
    let out = drsplit(&[
        "spectrum", "--half-dim", "4", "--seed", "1", "--grid", "5", "--out", path_str(&scan), "--eig-out",
        path_str(&eig), "--plot", path_str(&svg),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_scan_csv(&scan).unwrap();
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| r.rho <= 1.0 + 1e-8));
    assert!((rows[0].t - 1e-2).abs() < 1e-15 && (rows[24].s - 1e2).abs() < 1e-12);
    let eig = std::fs::read_to_string(&eig).unwrap();
    assert_eq!(eig.lines().count(), 9);
    assert!(eig.lines().skip(1).all(|l| l.ends_with(",true")));
    let svg = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(svg.matches("<circle").count(), 8);
    assert!(String::from_utf8_lossy(&out.stdout).contains("violations 0"));
}

#[test]
fn compare_writes_every_run() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("cmp");
    let out = drsplit(&[
        "compare", "lad", "--m", "30", "--n", "10", "--max-iter", "50", "--grid", "2", "--out-dir", path_str(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 3 + 4);
    for name in ["ts-adaptive.csv", "t-adaptive.csv", "constant_t1.1_s1.1.csv", "objective.svg", "stepsizes.svg"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    assert_eq!(read_trace_csv(&out_dir.join("constant_t1.1_s1.1.csv")).unwrap().len(), 50);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("ts-adaptive:") && stdout.contains("grid runs"));
}

#[test]
fn output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let svg = dir.path().join(format!("{name}.svg"));
        let out = drsplit(&["tv", "--n", "60", "--seed", "7", "--max-iter", "40", "--out", path_str(&csv), "--plot", path_str(&svg)]);
        assert!(out.status.success());
        (std::fs::read(csv).unwrap(), std::fs::read(svg).unwrap())
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["lad", "--lambda", "0"],
        vec!["lad", "--unknown-flag"],
        vec!["lad", "--m", "5", "--n", "10"],
        vec!["tv", "--noise", "-1"],
        vec!["spectrum", "--grid-min", "10", "--grid-max", "1"],
        vec!["compare", "tv", "--a", "2", "--b", "1"],
        vec!["frobnicate"],
    ] {
        let out = drsplit(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn io_failure_exits_one() {
    let out = drsplit(&["lad", "--m", "8", "--n", "3", "--max-iter", "2", "--out", "/nonexistent-dir/trace.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().filter(|l| l.starts_with("error:")).count(), 1);
}
