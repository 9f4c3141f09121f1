use std::process::{Command, Output};

fn novikov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_novikov"))
        .args(args)
        .env("NOVIKOV_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Value after `key = ` on the first line containing it.
fn field(text: &str, key: &str) -> f64 {
    let pat = format!("{key} = ");
    let line = text.lines().find(|l| l.contains(&pat)).unwrap_or_else(|| panic!("{key} in {text}"));
    let rest = &line[line.find(&pat).unwrap() + pat.len()..];
    rest.split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = novikov(&["classify", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--bogus"));
    assert!(stdout(&o).is_empty());
}

#[test]
fn missing_wavenumber_is_a_usage_error() {
    let o = novikov(&["classify", "--a", "0.05", "--xi", "0.01"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--k"));
}

#[test]
fn bad_mode_is_a_usage_error() {
    let o = novikov(&["profile", "--k", "1", "--mode", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_amplitude_profile_is_the_constant_state() {
    let o = novikov(&["profile", "--k", "1", "--a", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    // (2/3)^(3/8) and (5/2)(2/3)^(3/4)
    let w0 = (2.0f64 / 3.0).powf(0.375);
    let c0 = 2.5 * (2.0f64 / 3.0).powf(0.75);
    assert!((field(&text, "w0") - w0).abs() < 1e-12);
    assert!((field(&text, "c0") - c0).abs() < 1e-12);
    assert!((field(&text, "mean") - w0).abs() < 1e-12);
    assert!((field(&text, "c") - c0).abs() < 1e-12);
}

#[test]
fn numerical_failure_exits_one() {
    let o = novikov(&["profile", "--k", "1", "--a", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn classify_reports_a_verdict_and_growth() {
    let o = novikov(&["classify", "--k", "2", "--a", "0.05", "--xi", "0.002"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("asymptotic: "));
    assert!(text.contains("numeric: "));
    assert!(field(&text, "delta").is_finite());
    assert!(field(&text, "growth rate") >= 0.0);
}

#[test]
fn classify_matches_library_call() {
    let o = novikov(&["classify", "--k", "1", "--a", "0.05", "--xi", "0.002", "--mode", "asymptotic"]);
    let text = stdout(&o);
    let p = novikov::WaveParams::new(1.0, 1.0, 0.05).unwrap();
    let r = novikov::modulation::classify(p, 0.002).unwrap();
    assert_eq!(text.lines().next().unwrap(), format!("asymptotic: {}", r.verdict));
    assert!((field(&text, "delta") - r.delta).abs() < 1e-6 * r.delta.abs());
    assert!(!text.contains("numeric"));
}

#[test]
fn classify_writes_json_only_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = novikov(&[
        "classify", "--k", "1", "--a", "0.05", "--xi", "0.002", "--mode", "asymptotic", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc = std::fs::read_to_string(&out).unwrap();
    assert!(doc.contains("\"q0\"") && doc.contains("\"roots\""));
    assert!(!stdout(&o).contains("q0\""));
}

#[test]
fn threshold_at_default_amplitude() {
    // the command either reports a wavenumber or fails numerically with exit 1
    let o = novikov(&["threshold", "--a", "0.02"]);
    match o.status.code() {
        Some(0) => assert!(field(&stdout(&o), "k*").is_finite()),
        Some(1) => assert!(stderr(&o).contains("no sign change")),
        other => panic!("exit {other:?}"),
    }
}

#[test]
fn spectrum_sweep_exports_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = novikov(&[
        "spectrum", "--k", "1", "--a", "0.02", "--N", "8", "--sweep", "4", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).matches("xi = ").count(), 4);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("xi,re,im,branch_hint\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 17);
}

#[test]
fn scan_from_config_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.toml");
    std::fs::write(
        &cfg,
        "a_list = [0.02]\nmode = \"asymptotic\"\n[k_grid]\nmin = 1.0\nmax = 2.0\ncount = 5\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = novikov(&["scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).starts_with("5 points, 0 failed"));
        std::fs::read(out).unwrap()
    };
    let first = run("a.csv");
    assert_eq!(first, run("b.csv"));
    assert_eq!(String::from_utf8(first).unwrap().lines().count(), 6);
}

#[test]
fn scan_without_config_is_a_usage_error() {
    assert_eq!(novikov(&["scan"]).status.code(), Some(2));
}

#[test]
fn bad_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.json");
    std::fs::write(&cfg, r#"{"a_list": [], "k_grid": {"min": 1, "max": 2, "count": 3}}"#).unwrap();
    let o = novikov(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("a_list"));
}

#[test]
fn verify_prints_one_line_per_check() {
    let o = novikov(&["verify"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(lines.len(), 7);
    let failed = lines.iter().filter(|l| l.starts_with("FAIL")).count();
    assert_eq!(o.status.code(), Some(if failed == 0 { 0 } else { 1 }));
}

#[test]
fn invalid_thread_count_is_reported() {
    let o = Command::new(env!("CARGO_BIN_EXE_novikov"))
        .args(["profile", "--k", "1"])
        .env("NOVIKOV_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NOVIKOV_THREADS"));
}
