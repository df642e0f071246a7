use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dwave-test-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn dwave(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dwave"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn green_without_delay_is_closed_form() {
    let dir = scratch("green");
    let out = dwave(&["green", "--a", "1", "--b", "2", "--r", "0", "--no-meta"], &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("green.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t (time),G (per unit forcing)");
    // Roots of x² − x − 2 are 2 and −1; G = −e^{2t}/3 for t < 0, −e^{−t}/3 for t ≥ 0.
    for row in data_rows(&text) {
        let (t, g) = (row[0], row[1]);
        let exact = if t < 0.0 { -(2.0 * t).exp() / 3.0 } else { -(-t).exp() / 3.0 };
        assert!((g - exact).abs() < 1e-9, "t = {t}: {g} vs {exact}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("green.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "delay-waves/green-report/v1");
    assert_eq!(report["negativity_certified"], true);
}

#[test]
fn fisher_solve_succeeds_with_monotone_profile() {
    let dir = scratch("solve");
    let args = [
        "solve", "--model", "fisher", "--c", "2.5", "--theta", "0.5", "--k", "2", "--tau1", "0.004", "--tau2", "0.004",
        "--tol", "1e-6",
    ];
    let out = dwave(&args, &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("profile.csv")).unwrap();
    assert!(text.starts_with("# dwave"));
    let rows = data_rows(&text);
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1] - 1e-12));
    assert!(rows[0][1] < 1e-6 && rows.last().unwrap()[1] > 1.0 - 1e-6);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "delay-waves/solve-report/v1");
    assert!(report["iteration"]["iterations"].as_u64().unwrap() > 0);
    let plot = std::fs::read_to_string(dir.join("plot.gp")).unwrap();
    assert!(plot.contains("separator ','") && plot.contains("'profile.csv' using 1:2"));
}

#[test]
fn bz_below_threshold_is_a_guard_failure() {
    let dir = scratch("bzguard");
    let out = dwave(&["solve", "--model", "bz", "--c", "2", "--b", "2", "--r", "0.25"], &dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("requires c > 2√b"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = scratch("usage");
    let cfg = dir.join("bad.json");
    std::fs::write(&cfg, r#"{"model":"fisher","speed":2.5}"#).unwrap();
    let out = dwave(&["solve", "--config", cfg.to_str().unwrap()], &dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));

    assert_eq!(dwave(&["solve", "--c", "2.5"], &dir).status.code(), Some(1));
    assert_eq!(dwave(&["nonsense"], &dir).status.code(), Some(1));
    let out = dwave(&["verify", "--model", "fisher", "--c", "2.5", "--upper", "piecewise"], &dir);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flags_override_config() {
    let dir = scratch("overlay");
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, r#"{"command":"green","a":1,"b":2,"r":0,"t_min":-1,"t_max":1,"dt":0.5}"#).unwrap();
    let out = dwave(&["green", "--config", cfg.to_str().unwrap(), "--dt", "0.25", "--no-meta"], &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&std::fs::read_to_string(dir.join("green.csv")).unwrap());
    assert_eq!(rows.len(), 9);

    let out = dwave(&["solve", "--config", cfg.to_str().unwrap()], &dir);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_deterministic_without_metadata() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    let args = ["roots", "--a", "1", "--b", "2", "--r-max", "0.2", "--r-steps", "4", "--no-meta"];
    for dir in [&a, &b] {
        assert_eq!(dwave(&args, dir).status.code(), Some(0));
    }
    for name in ["roots.csv", "strip_counts.csv"] {
        let (x, y) = (std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
        assert_eq!(x, y, "{name}");
        assert!(!String::from_utf8_lossy(&x).starts_with('#'));
    }
    let counts = std::fs::read_to_string(a.join("strip_counts.csv")).unwrap();
    assert!(counts.lines().skip(1).all(|l| l.ends_with(",1,1")));
}

#[test]
fn bz_verify_reports_both_candidates() {
    let dir = scratch("verify");
    let tau = format!("{}", 0.01f64 / 3.0);
    let args = ["verify", "--model", "bz", "--c", "3", "--b", "2", "--r", "0.25", "--tau1", &tau, "--tau2", &tau];
    let out = dwave(&args, &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "delay-waves/verify-report/v1");
    assert_eq!(report["upper"]["passed"], true);
    assert_eq!(report["lower"]["passed"], true);
}
