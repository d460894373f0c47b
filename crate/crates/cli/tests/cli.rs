use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use robtt::io::{self, Config};

fn robtt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robtt"))
        .arg("--instance")
        .arg(dir)
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = robtt(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

/// The small two-line network with a tight budget, so robust runs finish quickly.
fn demo_instance(dir: &Path) {
    let cfg = Config {
        sigma: 3.0,
        rho: 3.0,
        ..Config::default()
    };
    io::write_instance(dir, &robtt::demo::ean(), &cfg).unwrap();
}

#[test]
fn generate_writes_instance_files() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate", "--kind", "toy", "--seed", "1"]);
    for f in ["events.csv", "activities.csv", "config.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let (ean, cfg) = io::read_instance(dir.path()).unwrap();
    assert!(ean.validate().is_empty());
    assert_eq!(cfg.seed, 1);
}

#[test]
fn baseline_evaluation_report_has_one_row_per_scenario() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate", "--kind", "toy", "--seed", "2"]);
    ok(dir.path(), &["solve-match"]);
    ok(dir.path(), &["evaluate", "--horizon", "480", "--scenarios", "10"]);
    assert_eq!(data_rows(&dir.path().join("report.csv")), 10);
}

#[test]
fn evaluation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    demo_instance(dir.path());
    ok(dir.path(), &["solve-match"]);
    ok(dir.path(), &["evaluate", "--scenarios", "3", "-o", "a.csv"]);
    ok(dir.path(), &["evaluate", "--scenarios", "3", "-o", "b.csv"]);
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
}

#[test]
fn pesp_then_rollout() {
    let dir = tempfile::tempdir().unwrap();
    demo_instance(dir.path());
    ok(dir.path(), &["solve-pesp"]);
    ok(dir.path(), &["rollout", "--horizon", "120"]);
    let events = data_rows(&dir.path().join("rollout").join(io::APER_EVENTS_FILE));
    assert!(events >= 2 * 12, "{events}");
}

#[test]
fn robustify_frpt_trace_is_bounded_by_max_iter() {
    let dir = tempfile::tempdir().unwrap();
    demo_instance(dir.path());
    ok(
        dir.path(),
        &[
            "robustify-frpt",
            "--eps",
            "0.001",
            "--max-iter",
            "4",
            "--step-time-limit",
            "5",
            "--plot-data",
            "bounds.dat",
        ],
    );
    let rows = data_rows(&dir.path().join("trace.csv"));
    assert!((1..=4).contains(&rows), "{rows}");
    assert_eq!(data_rows(&dir.path().join("bounds.dat")), rows);
    let (ean, _) = io::read_instance(dir.path()).unwrap();
    let tt = io::read_timetable(&dir.path().join("timetable.csv"), &ean).unwrap();
    assert!(tt.is_feasible());
}

#[test]
fn robustify_rpts_writes_timetable_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    demo_instance(dir.path());
    ok(
        dir.path(),
        &["robustify-rpts", "--max-iter", "3", "--samples", "10", "--step-time-limit", "20"],
    );
    assert_eq!(data_rows(&dir.path().join("trace.csv")), 3);
    assert!(dir.path().join("timetable.csv").is_file());
}

#[test]
fn compare_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    demo_instance(dir.path());
    let text = ok(
        dir.path(),
        &[
            "compare",
            "--horizon",
            "120",
            "--scenarios",
            "2",
            "--max-iter",
            "2",
            "--samples",
            "5",
            "--step-time-limit",
            "10",
        ],
    );
    assert!(text.contains("Average passenger delay"));
    let out = dir.path().join("compare");
    let delayed = fs::read_to_string(out.join("delayed.csv")).unwrap();
    let algs: Vec<&str> = delayed.lines().skip(1).map(|l| l.split(';').nth(1).unwrap()).collect();
    assert_eq!(algs, ["MATCH", "F-RPT", "RPT(S')"]);
    for f in ["nominal.csv", "passenger_delay.csv", "tables.txt", "bounds_frpt.dat", "trace_rpts.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn unknown_config_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    demo_instance(dir.path());
    let cfg = dir.path().join(io::CONFIG_FILE);
    let mut body = fs::read_to_string(&cfg).unwrap();
    body.push_str("buffer_factor;2\n");
    fs::write(&cfg, body).unwrap();
    let out = robtt(dir.path(), &["solve-match"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("buffer_factor"));
}

#[test]
fn missing_instance_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = robtt(&dir.path().join("nowhere"), &["solve-pesp"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_timetable_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    demo_instance(dir.path());
    let (ean, _) = io::read_instance(dir.path()).unwrap();
    let rows: String = ean.events.iter().map(|e| format!("{};0\n", e.id)).collect();
    fs::write(dir.path().join("timetable.csv"), format!("event_id;time\n{rows}")).unwrap();
    let out = robtt(dir.path(), &["evaluate"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}
