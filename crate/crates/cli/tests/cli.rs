use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ovl_cli::report::EstimateReport;
use ovl_core::Method;

fn ovl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ovl")).args(args).output().unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ovl_prints_closed_and_quadrature_values() {
    let o = ovl(&["ovl", "--ratio", "0.5"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for v in ["0.942809", "0.75", "0.666667"] {
        assert!(s.contains(v), "{s}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(ovl(&["ovl", "--ratio", "0"]).status.code(), Some(1));
    assert_eq!(ovl(&["ovl", "--ratio", "-2"]).status.code(), Some(1));
    assert_eq!(ovl(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ovl(&["sample", "--alpha", "1"]).status.code(), Some(2));
    assert_eq!(
        ovl(&["estimate", "/nonexistent/a.txt", "/nonexistent/b.txt"]).status.code(),
        Some(3)
    );
}

#[test]
fn bad_data_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1.0 2.0\n3.0 -4.0\n").unwrap();
    let o = ovl(&["estimate", bad.to_str().unwrap(), &data("proschan_7912.txt")]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.txt:2:5"), "{err}");
}

#[test]
fn config_with_unknown_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"r_values":[0.5],"set_sizes":[[2,3]],"cycles":[8],"replications":5,"master_seed":1,"typo":3}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = ovl(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sampling_is_seeded() {
    let a = ovl(&["sample", "--alpha", "2", "--n", "50", "--seed", "9"]);
    let b = ovl(&["sample", "--alpha", "2", "--n", "50", "--seed", "9"]);
    let c = ovl(&["sample", "--alpha", "2", "--n", "50", "--seed", "10"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(stdout(&a).lines().count(), 50);
}

#[test]
fn single_rank_rss_matches_srs_draws() {
    let srs = stdout(&ovl(&["sample", "--alpha", "1.5", "--n", "5", "--seed", "3"]));
    let rss = stdout(&ovl(&["sample", "--alpha", "1.5", "--r", "1", "--m", "5", "--seed", "3"]));
    let values: Vec<&str> = rss
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert_eq!(values, srs.lines().collect::<Vec<_>>());
}

#[test]
fn estimate_json_round_trips() {
    let o = ovl(&[
        "estimate",
        &data("proschan_8044.txt"),
        &data("proschan_7912.txt"),
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let report: EstimateReport = serde_json::from_slice(&o.stdout).unwrap();
    let srs = report.method(Method::Srs).unwrap();
    assert!((srs.ratio.raw - 0.810896).abs() < 1e-6);
    assert!(report.method(Method::BayesJeffreys).is_some());
    let again = serde_json::to_string_pretty(&report).unwrap();
    assert_eq!(serde_json::from_str::<EstimateReport>(&again).unwrap(), report);
}

#[test]
fn estimate_csv_has_one_row_per_method_and_measure() {
    let o = ovl(&[
        "estimate",
        &data("proschan_8044.txt"),
        &data("proschan_7912.txt"),
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 3);
}

#[test]
fn estimate_ranked_files() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, alpha: &str, r: &str, seed: &str| -> PathBuf {
        let o = ovl(&["sample", "--alpha", alpha, "--r", r, "--m", "8", "--seed", seed]);
        let p = dir.path().join(name);
        std::fs::write(&p, &o.stdout).unwrap();
        p
    };
    let a = write("a.csv", "1", "3", "1");
    let b = write("b.csv", "2", "4", "2");
    let o = ovl(&[
        "estimate",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--method",
        "rss",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: EstimateReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report.methods.len(), 1);
    assert_eq!(report.methods[0].method, Method::Rss);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = ovl(&[
            "simulate",
            "--config",
            &config("smoke.json"),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for name in [
        "study.csv",
        "study_bias_corrected.csv",
        "efficiency.csv",
        "tables.txt",
        "discrepancy.csv",
        "figure_data.csv",
        "metadata.json",
    ] {
        let x = std::fs::read(a.join(name)).unwrap();
        assert!(!x.is_empty(), "{name}");
        assert_eq!(x, std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn tables_with_analytic_efficiency_need_no_simulation() {
    let o = ovl(&[
        "tables",
        "--config",
        &config("paper_m8.json"),
        "--layout",
        "eff",
        "--efficiency",
        "analytic",
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().count() > 1);
}

#[test]
fn realdata_discrepancy_report() {
    let o = ovl(&["realdata", "--discrepancy", "--format", "csv"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(s.lines().next().unwrap(), "table,cell,printed_value,computed_value,abs_diff");
    assert_eq!(s.lines().count(), 1 + 42);
    assert!(s.lines().skip(1).all(|l| l.starts_with("realdata,")));
}
