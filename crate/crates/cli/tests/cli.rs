use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bargain_core::empirics::payoff_surface;
use bargain_core::presets::{logit_column, mrp_row};

fn bargain(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bargain")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn read(out: &Path, name: &str) -> String {
    fs::read_to_string(out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn header_digest(text: &str) -> String {
    let first = text.lines().next().expect("non-empty output");
    assert!(first.starts_with("# bargain "), "{first}");
    first.rsplit(' ').next().unwrap().to_string()
}

#[test]
fn solve_writes_the_share_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = bargain(dir.path(), &["solve", "--preset", "3-partial"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read(dir.path(), "summary.csv");
    assert!(summary.contains("1,incl,11/12"), "{summary}");
    assert!(summary.contains("1,excl,13/24"), "{summary}");
    assert!(summary.contains("1,unconditional,19/24"), "{summary}");
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "solution.json")).unwrap();
    assert_eq!(json["command"], "solve");
    assert_eq!(json["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn reruns_are_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = bargain(dir.path(), &["simulate", "--preset", "3-perfect", "--seed", "11", "--n", "25"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (la, lb) = (read(a.path(), "logs.jsonl"), read(b.path(), "logs.jsonl"));
    assert_eq!(la, lb);
    assert_eq!(header_digest(&la), header_digest(&lb));
    assert_eq!(la.lines().filter(|l| !l.starts_with('#')).count(), 25);

    let c = tempfile::tempdir().unwrap();
    bargain(c.path(), &["simulate", "--preset", "3-perfect", "--seed", "12", "--n", "25"]);
    assert_ne!(header_digest(&la), header_digest(&read(c.path(), "logs.jsonl")));
}

#[test]
fn analyze_reads_simulated_logs() {
    let dir = tempfile::tempdir().unwrap();
    let sim = bargain(dir.path(), &["simulate", "--preset", "1-perfect", "--seed", "3", "--n", "20"]);
    assert!(sim.status.success());
    let logs = dir.path().join("logs.jsonl");
    let out = bargain(dir.path(), &["analyze", "--logs", logs.to_str().unwrap(), "--all-matches", "--column", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read(dir.path(), "summary.csv");
    assert!(summary.contains("mean_accepted_first_share,0.950000"), "{summary}");
    assert!(summary.contains("freq_mwc_weak,1.000000"), "{summary}");
    for name in ["gini_ecdf.csv", "votes.csv", "logit.csv", "mrp.json", "optimization.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn surface_optimum_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = bargain(dir.path(), &["surface", "--column", "3", "--grid-step", "0.01"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(dir.path(), "surface_optimum.csv");
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();

    let col = logit_column(3).unwrap();
    let mrp = mrp_row(col.location, col.treatment).unwrap().mrp();
    let want = payoff_surface(&col.model, mrp, [false, true], 0.01).unwrap().optimum;
    assert_eq!(row[0], format!("{:.6}", want.s_a));
    assert_eq!(row[4], format!("{:.10}", want.expected_payoff));
}

#[test]
fn optimize_reports_the_egalitarian_mwc() {
    let dir = tempfile::tempdir().unwrap();
    let out = bargain(dir.path(), &["optimize", "--family", "independent_uniform", "--tau-bar", "1", "--d", "0.2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "optimum.json")).unwrap();
    let offer: Vec<f64> = serde_json::from_value(json["data"]["offer"].clone()).unwrap();
    assert!((offer[0] - 0.6).abs() < 1e-3 && (offer[1].max(offer[2]) - 0.4).abs() < 1e-3, "{offer:?}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // a simulation needs a seed
    assert_eq!(bargain(dir.path(), &["simulate", "--preset", "3-none"]).status.code(), Some(1));
    assert_eq!(bargain(dir.path(), &["solve", "--preset", "4-perfect"]).status.code(), Some(1));
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "preset = \"3-none\"\nunknown_key = 1\n").unwrap();
    assert_eq!(bargain(dir.path(), &["solve", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(bargain(dir.path(), &["frobnicate"]).status.code(), Some(2));

    // the checklist carries one known failure
    let out = bargain(dir.path(), &["reproduce"]);
    assert_eq!(out.status.code(), Some(2));
    let text = read(dir.path(), "reproduce.txt");
    assert!(text.contains("[PASS] table1"), "{text}");
    assert!(text.contains("[FAIL] partial-value"), "{text}");
}

#[test]
fn config_file_drives_solve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        r#"
[treatment]
id = "custom"
num_rounds = 2
protocol = "perfect"
defaults = ["1/20", "1/20", "9/10"]
recognition = ["A", "B"]
"#,
    )
    .unwrap();
    let out = bargain(dir.path(), &["solve", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read(dir.path(), "summary.csv").contains("1,unconditional,1"));
}
