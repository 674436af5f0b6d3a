use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use spinal_core::schedule::{Scheme, TransmissionPlan};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinal-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

const SMALL: [&str; 8] = ["--n", "8", "--k", "2", "--c", "8", "--B", "16"];

#[test]
fn bound_csv_has_header_and_hash_on_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let out = lab(&[
        "bound",
        "--channel",
        "awgn:snr_db=6;awgn:snr_db=9",
        "--channel",
        "awgn:sigma2=10",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(&csv);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("channel,snr_db,passes,bound,value,spec_hash"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let hash = rows[0][5];
    assert_eq!(hash.len(), 16);
    for row in &rows {
        assert_eq!(row.len(), 6);
        assert_eq!(row[5], hash);
        assert_eq!(row[3], "awgn-ball");
        let v: f64 = row[4].parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
    assert_eq!(rows[0][1], "6");
}

#[test]
fn fer_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, mode) in [(&a, None), (&b, Some("--sequential"))] {
        let mut args = vec!["fer", "--channel", "bsc:f=0.02", "--c", "1", "--n", "8", "--k", "2", "--decoder", "ml"];
        args.extend(["--trials", "300", "--passes", "4", "--seed", "7", "--out", path.to_str().unwrap()]);
        args.extend(mode);
        assert_eq!(code(&lab(&args)), 0);
    }
    // the execution mode is part of the hash, so compare the data columns only
    let strip = |t: String| t.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    assert_eq!(strip(read(&a)), strip(read(&b)));
    let c = dir.path().join("c.csv");
    let args = [
        "fer", "--channel", "bsc:f=0.02", "--c", "1", "--n", "8", "--k", "2", "--decoder", "ml", "--trials", "300",
        "--passes", "4", "--seed", "7", "--out", c.to_str().unwrap(),
    ];
    assert_eq!(code(&lab(&args)), 0);
    assert_eq!(read(&a), read(&c));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# bsc sweep\nn=8\nk=2\nc=1\nchannel=bsc:f=0.01\npasses=3\n").unwrap();
    let out = lab(&["bound", "--config", cfg.to_str().unwrap(), "--passes", "5"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "bsc:f=0.01");
    assert_eq!(row[2], "5");
    assert_eq!(row[3], "bsc-union");
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "colour=blue\n").unwrap();
    assert_eq!(code(&lab(&["bound", "--config", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&lab(&["bound", "--config", "/nonexistent/run.cfg"])), 2);
    assert_eq!(code(&lab(&["bound", "--n", "0"])), 2);
    assert_eq!(code(&lab(&["bound", "--n", "eight"])), 2);
    assert_eq!(code(&lab(&["bound", "--channel", "bsc:f=0.7"])), 2);
    assert_eq!(code(&lab(&["bound", "--channel", "rayleigh:x=1"])), 2);
    assert_eq!(code(&lab(&["fer", "--scheme", "zigzag"])), 2);
    assert_eq!(code(&lab(&["fer", "--bogus"])), 2);
    assert_eq!(code(&lab(&["teleport"])), 2);
    assert_eq!(code(&lab(&["optimize", "--delta", "0"])), 2);
}

#[test]
fn experiment_errors_exit_with_3_and_leave_no_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    // exhaustive search over 2^40 candidates is refused
    let out = lab(&["fer", "--n", "40", "--decoder", "ml", "--trials", "1", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(!csv.exists());
    // a BSC bound on an AWGN channel point
    assert_eq!(code(&lab(&["bound", "--bound", "bsc-union", "--channel", "awgn:snr_db=5"])), 3);
    // useless channel, tiny cap
    let out = lab(&[
        "rate", "--n", "8", "--k", "2", "--c", "1", "--channel", "bsc:f=0.5", "--scheme", "uniform", "--cap", "6",
        "--trials", "5",
    ]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
    // the improved scheme needs a positive capacity
    let out = lab(&["rate", "--c", "1", "--channel", "bsc:f=0.5", "--trials", "1"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn counted_timeouts_report_rate_zero() {
    let out = lab(&[
        "rate", "--n", "8", "--k", "2", "--c", "1", "--channel", "bsc:f=0.5", "--scheme", "uniform", "--cap", "6",
        "--trials", "5", "--timeouts", "count",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("timeouts"), "5");
    assert_eq!(col("mean_rate"), "0");
}

#[test]
fn optimizer_writes_a_loadable_plan() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.txt");
    let csv = dir.path().join("log.csv");
    let out = lab(&[
        "optimize", "--n", "32", "--k", "4", "--c", "1", "--channel", "bsc:f=0.01", "--r", "3", "--delta", "1e-3",
        "--plan-out", plan.to_str().unwrap(), "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, loaded) = TransmissionPlan::from_text(&read(&plan)).unwrap();
    assert_eq!((header.n, header.k, header.c), (32, 4, 1));
    assert_eq!(header.channel, "bsc:f=0.01");
    assert_eq!(loaded.scheme(), Scheme::Optimized);
    assert_eq!(loaded.order(), &[8, 7, 6, 5, 4, 3, 2, 1]);
    let log = read(&csv);
    let steps = log.lines().count() - 1;
    assert_eq!(loaded.total(), 24 + steps);
    assert!(log.lines().skip(1).all(|l| l.split(',').nth(2) == Some("8")));
}

#[test]
fn optimizer_with_a_loose_target_takes_no_steps() {
    let out = lab(&["optimize", "--channel", "bsc:f=0.01", "--c", "1", "--delta", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn sweeps_write_one_plan_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.txt");
    let out = lab(&[
        "optimize", "--c", "1", "--channel", "bsc:f=0.01;bsc:f=0.05", "--delta", "1e-2", "--plan-out",
        plan.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("plan.0.txt").exists());
    assert!(dir.path().join("plan.1.txt").exists());
}

#[test]
fn rate_and_cost_emit_every_pair() {
    let mut args = vec!["cost", "--trials", "5", "--channel", "awgn:snr_db=20", "--scheme", "uniform"];
    args.extend(SMALL);
    let out = lab(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[7], "1");

    let mut args = vec!["rate", "--trials", "5", "--channel", "awgn:snr_db=20", "--scheme", "pass_by_pass"];
    args.extend(SMALL);
    let out = lab(&args);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "pass_by_pass");
    // pass-by-pass rates are n / (whole passes)
    let rate: f64 = row[6].parse().unwrap();
    assert!(rate > 0.0 && rate <= 8.0);
}

#[test]
fn help_exits_cleanly() {
    let out = lab(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in ["bound", "optimize", "fer", "rate", "cost"] {
        assert!(text.contains(cmd));
    }
}
