use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn az(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_az")).args(args).current_dir(cwd).output().expect("spawn az")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Tags open and close in order; enough to catch truncated or mangled output.
fn well_formed(svg: &str) -> bool {
    let mut stack = Vec::new();
    let mut rest = svg;
    while let Some(i) = rest.find('<') {
        rest = &rest[i + 1..];
        let end = rest.find('>').expect("unterminated tag");
        let tag = &rest[..end];
        rest = &rest[end + 1..];
        if let Some(name) = tag.strip_prefix('/') {
            if stack.pop() != Some(name.trim().to_string()) {
                return false;
            }
        } else if !tag.ends_with('/') {
            stack.push(tag.split_whitespace().next().unwrap().to_string());
        }
    }
    stack.is_empty() && svg.trim_start().starts_with("<svg")
}

const FL_QUICK: &str = r#"{"schema": 1, "experiment": "fl_accuracy_oversampled", "n_list": [17, 33, 65]}"#;

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fl.json", FL_QUICK);
    let o = az(&["run", &cfg, "--out", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    for f in ["results.csv", "timings.csv", "report.json", "plot.svg"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|c| *c == "error_L2").unwrap();
    let errors: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert_eq!(errors.len(), 3);
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["config"]["experiment"], "fl_accuracy_oversampled");
    assert!(report["machine"]["logical_cpus"].as_u64().unwrap() >= 1);
    assert_eq!(report["records"].as_array().unwrap().len(), 3);
    let svg = fs::read_to_string(out.join("plot.svg")).unwrap();
    assert!(well_formed(&svg));
    assert_eq!(svg.matches(r#"class="guide""#).count(), 1);
}

#[test]
fn results_reproduce_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.json",
        r#"{"schema": 1, "experiment": "esg_poisson", "sqrt_n_list": [4, 6], "seed": 7}"#,
    );
    for out in ["a", "b"] {
        let o = az(&["run", &cfg, "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read(dir.path().join("a/results.csv")).unwrap();
    let b = fs::read(dir.path().join("b/results.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn verify_recomputes_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "g.json",
        r#"{"schema": 1, "experiment": "greens_accuracy", "sqrt_n_list": [4, 6]}"#,
    );
    let o = az(&["run", &cfg, "--out", "g", "--verify"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("verified 6 records"));
}

#[test]
fn verify_catches_tampered_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fl.json", FL_QUICK);
    assert!(az(&["run", &cfg, "--out", "o"], dir.path()).status.success());
    let path = dir.path().join("o/report.json");
    let mut report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    report["records"][1]["coefficients"][0][0] = serde_json::json!(1.0);
    fs::write(&path, serde_json::to_string(&report).unwrap()).unwrap();
    let checks = az_cli::verify_dir(&dir.path().join("o")).unwrap();
    assert!(checks[0].pass);
    assert!(!checks[1].pass);
}

#[test]
fn oversized_sweep_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"schema": 1, "experiment": "fl_timing", "n_list": [257, 16385]}"#,
    );
    let o = az(&["run", &cfg, "--out", "t"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("try"), "{}", stderr(&o));
    assert!(!dir.path().join("t").exists());
}

#[test]
fn malformed_config_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "x.json", r#"{"schema": 1, "experiment": "svd_profile", "sqrt_n": "ten"}"#);
    assert_eq!(az(&["run", &cfg], dir.path()).status.code(), Some(2));
    let cfg = write(dir.path(), "y.json", r#"{"schema": 1, "experiment": "fl_accuracy_oversampled", "n_list": [33, 17]}"#);
    assert_eq!(az(&["run", &cfg], dir.path()).status.code(), Some(2));
}

#[test]
fn svd_profile_has_markers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", r#"{"schema": 1, "experiment": "svd_profile", "sqrt_n": 6}"#);
    let o = az(&["run", &cfg, "--out", "s"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = fs::read_to_string(dir.path().join("s/plot.svg")).unwrap();
    assert!(well_formed(&svg));
    assert_eq!(svg.matches(r#"class="marker""#).count(), 2);
}

#[test]
fn plot_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "one.csv", "N,error_L2\n17,1e-3\n");
    let o = az(&["plot", &csv], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = fs::read_to_string(dir.path().join("one.svg")).unwrap();
    assert!(well_formed(&svg));
    assert_eq!(svg.matches("<circle").count(), 1);
    assert!(svg.contains(">N</text>") && svg.contains(">error_L2</text>"));
}

#[test]
fn plot_two_series_legend() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(
        dir.path(),
        "two.csv",
        "series,N,error_L2\nplain,4,1e-2\nplain,8,5e-3\nenriched,4,1e-3\nenriched,8,1e-6\n",
    );
    let o = az(&["plot", &csv, "--out", "two.svg", "--guide", "-2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = fs::read_to_string(dir.path().join("two.svg")).unwrap();
    assert!(well_formed(&svg));
    assert_eq!(svg.matches(r#"class="legend-entry""#).count(), 2);
    assert!(svg.contains(">plain<") && svg.contains(">enriched<"));
    assert_eq!(svg.matches(r#"class="guide""#).count(), 1);
}

#[test]
fn plot_empty_csv_fails() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "empty.csv", "N,error_L2\n");
    let o = az(&["plot", &csv], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no data"), "{}", stderr(&o));
    let csv = write(dir.path(), "blank.csv", "");
    assert_eq!(az(&["plot", &csv], dir.path()).status.code(), Some(1));
}

#[test]
fn plot_rerenders_study_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fl.json", FL_QUICK);
    assert!(az(&["run", &cfg, "--out", "o"], dir.path()).status.success());
    let o = az(&["plot", "o/timings.csv", "--out", "t.svg"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(well_formed(&fs::read_to_string(dir.path().join("t.svg")).unwrap()));
}
