use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use taupipe::io::{parse_events, parse_report};
use taupipe::model::Limits;
use taupipe::trigger::run_event;
use taupipe::{CleanVariant, MergeVariant, TriggerConfig, Variants};

fn taupipe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taupipe"))
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

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn tmp(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn run_at_300_mhz_meets_ii_budget() {
    let dir = tempfile::tempdir().unwrap();
    let report = tmp(&dir, "r.jsonl");
    let o = taupipe(&[
        "run",
        "--gen",
        "1:100:clustered",
        "--freq",
        "300",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = parse_report(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.events.len(), 100);
    assert!(r.metrics.ii_cycles <= 45);
    assert_eq!(r.metrics.cdc_overhead_cycles, 10);
    assert_eq!(r.metrics.latency_cycles, 210);
    assert!(r.metrics.feasibility.feasible);
    assert!(r.metrics.oracle_checked);
    assert!(stdout(&o).contains("FEASIBLE"));
}

#[test]
fn all_a_and_all_b_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut taus = Vec::new();
    for v in ["A", "B"] {
        let report = tmp(&dir, &format!("{v}.jsonl"));
        let o = taupipe(&[
            "run",
            "--gen",
            "3:60:clustered",
            "--merge",
            v,
            "--clean",
            v,
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        taus.push(
            parse_report(&std::fs::read_to_string(&report).unwrap())
                .unwrap()
                .events,
        );
    }
    assert_eq!(taus[0], taus[1]);
}

#[test]
fn missing_event_file_is_input_error() {
    let o = taupipe(&["run", "--events", "missing.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.csv"));
}

#[test]
fn two_event_sources_rejected() {
    let o = taupipe(&["run", "--events", "x.csv", "--gen", "1:1:uniform"]);
    assert_eq!(o.status.code(), Some(2));
    let o = taupipe(&["run"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_event_file_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = tmp(&dir, "bad.csv");
    std::fs::write(
        &path,
        "v1,event_id,slot,pt,eta,phi,species\n1,0,5,0,0,Photon\n1,0,x,0,0,Photon\n",
    )
    .unwrap();
    let o = taupipe(&["run", "--events", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn bad_config_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = tmp(&dir, "c.conf");
    std::fs::write(&path, "n_filter_blocks = 5\n").unwrap();
    let o = taupipe(&[
        "run",
        "--gen",
        "1:1:uniform",
        "--config",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("n_filter_blocks * block_size"),
        "{}",
        stderr(&o)
    );
    std::fs::write(&path, "colour = blue\n").unwrap();
    let o = taupipe(&[
        "run",
        "--gen",
        "1:1:uniform",
        "--config",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown key"));
}

#[test]
fn violated_budget_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = tmp(&dir, "c.conf");
    std::fs::write(&path, "latency_budget.360 = 150\n").unwrap();
    let o = taupipe(&[
        "run",
        "--gen",
        "1:5:clustered",
        "--config",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("INFEASIBLE"));
}

#[test]
fn fixture_events_and_config() {
    let o = taupipe(&[
        "run",
        "--events",
        &fixture("events_small.csv"),
        "--config",
        &fixture("example.conf"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("merge A  clean A"));
    assert!(stdout(&o).contains("latency 203 cycles"));
}

#[test]
fn oracle_can_be_skipped() {
    let o = taupipe(&["run", "--gen", "1:5:uniform", "--no-oracle"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("direct chain only"));
}

#[test]
fn compare_merge_table() {
    let o = taupipe(&["compare", "--dimension", "merge", "--gen", "1:30:clustered"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let row = out
        .lines()
        .find(|l| l.starts_with("stage latency"))
        .unwrap();
    let cells: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(&cells[2..], ["38", "33"]);
    assert!(out.contains("identical"));
}

#[test]
fn compare_clean_table() {
    let o = taupipe(&["compare", "--dimension", "clean", "--gen", "1:30:clustered"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let cells = |name: &str| -> Vec<String> {
        let row = out.lines().find(|l| l.starts_with(name)).unwrap();
        row.split_whitespace()
            .rev()
            .take(2)
            .map(String::from)
            .collect()
    };
    assert_eq!(cells("stage latency"), ["15", "13"]);
    assert_eq!(cells("stage II"), ["13", "13"]);
}

#[test]
fn compare_divergence_emits_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let conf = tmp(&dir, "broken.conf");
    std::fs::write(&conf, "max_candidates = 3\n").unwrap();
    let cx = tmp(&dir, "cx.csv");
    let o = taupipe(&[
        "compare",
        "--dimension",
        "merge",
        "--gen",
        "1:20:clustered",
        "--config",
        conf.to_str().unwrap(),
        "--counterexample",
        cx.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("DIVERGENCE"));
    let events = parse_events(&std::fs::read_to_string(&cx).unwrap(), &Limits::default()).unwrap();
    assert_eq!(events.len(), 1);
    let cfg = TriggerConfig {
        max_candidates: 3,
        ..TriggerConfig::default()
    };
    let a = Variants {
        merge: MergeVariant::A,
        clean: CleanVariant::B,
    };
    let b = Variants {
        merge: MergeVariant::B,
        clean: CleanVariant::B,
    };
    assert_ne!(
        run_event(&events[0], &cfg, a),
        run_event(&events[0], &cfg, b)
    );
    assert!(
        events[0].valid_count() <= 10,
        "not minimized: {}",
        events[0].valid_count()
    );
}

#[test]
fn explore_table() {
    let o = taupipe(&["explore", "--freqs", "360,300"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let row = |f: &str| -> Vec<String> {
        out.lines()
            .find(|l| l.split_whitespace().next() == Some(f))
            .unwrap()
            .split_whitespace()
            .map(String::from)
            .collect()
    };
    let r360 = row("360");
    let r300 = row("300");
    assert_eq!((r360[1].as_str(), r360[2].as_str()), ("54", "275"));
    assert_eq!((r300[1].as_str(), r300[2].as_str()), ("45", "220"));
    assert_eq!(r360[4], "0");
    assert_eq!(r300[4], "10");
    let lat360: u64 = r360[3].parse().unwrap();
    let lat300: u64 = r300[3].parse().unwrap();
    assert_eq!(lat300, lat360 + 10);
}

#[test]
fn explore_single_frequency_applies_cdc() {
    let o = taupipe(&["explore", "--freqs", "300"]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o)
        .lines()
        .find(|l| l.trim_start().starts_with("300"))
        .unwrap()
        .to_string();
    assert_eq!(row.split_whitespace().nth(4), Some("10"));
}

#[test]
fn explore_empty_list_is_input_error() {
    let o = taupipe(&["explore", "--freqs", ""]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|k| {
            let p = tmp(&dir, &format!("{k}.jsonl"));
            let o = taupipe(&[
                "run",
                "--gen",
                "5:25:uniform",
                "--report",
                p.to_str().unwrap(),
            ]);
            assert!(o.status.success());
            std::fs::read(p).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}
