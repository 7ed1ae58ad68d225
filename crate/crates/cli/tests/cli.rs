use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn wmodes(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wmodes"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("WMODES_LO")
        .env_remove("WMODES_HI")
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn profile(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn scan_of_unit_interval_finds_no_roots() {
    let dir = TempDir::new().unwrap();
    let o = wmodes(
        &["scan", "--lo", "0.05", "--hi", "0.95", "--n", "181"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v = json(&dir.path().join("scan.json"));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["timestamp_unix"], 1700000000u64);
    assert_eq!(v["payload"]["roots"].as_array().unwrap().len(), 0);
    let csv = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert!(csv.starts_with("lambda,miss,abel_wronskian,classification,error\n"));
    assert_eq!(csv.lines().count(), 182);
}

#[test]
fn scan_around_one_finds_the_gauge_root() {
    let dir = TempDir::new().unwrap();
    let o = wmodes(
        &["scan", "--lo", "0.9", "--hi", "1.1", "--n", "41"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let roots = json(&dir.path().join("scan.json"))["payload"]["roots"].clone();
    assert_eq!(roots.as_array().unwrap().len(), 1);
    assert!((roots[0]["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn missing_hi_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = wmodes(&["scan", "--lo", "0.9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn invalid_fields_are_reported_together() {
    let dir = TempDir::new().unwrap();
    let o = wmodes(
        &[
            "scan",
            "--lo",
            "-1",
            "--hi",
            "-2",
            "--n",
            "1",
            "--match-point",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        String::from_utf8_lossy(&o.stderr)
            .lines()
            .filter(|l| l.starts_with("error:"))
            .count(),
        4
    );
}

#[test]
fn identical_runs_write_identical_files() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = [
        "scan",
        "--lo",
        "0.2",
        "--hi",
        "2.0",
        "--n",
        "37",
        "--workers",
        "3",
    ];
    wmodes(&args, a.path());
    wmodes(&args, b.path());
    let csv = |d: &TempDir| fs::read(d.path().join("scan.csv")).unwrap();
    assert_eq!(csv(&a), csv(&b));
    let mut ja = json(&a.path().join("scan.json"));
    let mut jb = json(&b.path().join("scan.json"));
    ja["config"]["out"] = Value::Null;
    jb["config"]["out"] = Value::Null;
    assert_eq!(ja, jb);
}

#[test]
fn gauge_mode_profile_is_theta() {
    let dir = TempDir::new().unwrap();
    let o = wmodes(&["mode", "1", "--n", "51"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    for name in ["phi0.dat", "phi1.dat"] {
        for row in profile(&dir.path().join(name)) {
            let r = row[0];
            let theta = 2.0 * r / (1.0 + r * r);
            assert!((row[1] - theta).abs() < 1e-9, "{name} at {r}");
        }
    }
}

#[test]
fn non_gauge_mode_has_distinct_profiles_and_nonzero_miss() {
    let dir = TempDir::new().unwrap();
    let o = wmodes(&["mode", "0.5", "--n", "51"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let m = json(&dir.path().join("mode.json"))["payload"]["connection"]["normalized_miss"].clone();
    assert!(m[0].as_f64().unwrap().abs() > 1e-3);
    let p0 = profile(&dir.path().join("phi0.dat"));
    let p1 = profile(&dir.path().join("phi1.dat"));
    // φ₀ is regular at 0 and φ₁ is not.
    assert_eq!(p0[0][1], 0.0);
    assert!(p1[0][1].abs() > 1e2);
}

#[test]
fn left_half_plane_lambda_is_rejected() {
    let dir = TempDir::new().unwrap();
    assert_eq!(wmodes(&["mode", "-0.5"], dir.path()).status.code(), Some(2));
}

#[test]
fn picard_run_agrees_with_shooting() {
    let dir = TempDir::new().unwrap();
    let o = wmodes(&["picard", "0.25"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&dir.path().join("picard.json"));
    for side in ["zero", "one"] {
        assert!(v["payload"][side]["shooting_difference"].as_f64().unwrap() < 1e-8);
        assert_eq!(v["payload"][side]["run"]["converged"], true);
    }
    assert!(dir.path().join("picard_phi1.dat").exists());
}

#[test]
fn default_certificate_passes() {
    let dir = TempDir::new().unwrap();
    let o = wmodes(&["certify"], dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(
        json(&dir.path().join("certificate.json"))["payload"]["pass"],
        true
    );
}

#[test]
fn restricted_certificate_above_one_passes() {
    let dir = TempDir::new().unwrap();
    let o = wmodes(&["certify", "--range", "1.05:3.0"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn corrupted_coefficients_fail_the_certificate() {
    let dir = TempDir::new().unwrap();
    let o = wmodes(&["certify", "--fault", "flip-spectral-term"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let v = json(&dir.path().join("certificate.json"));
    assert_eq!(v["payload"]["pass"], false);
    assert_eq!(v["config"]["shooting"]["fault"], "flip-spectral-term");
}

#[test]
fn flags_can_come_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_wmodes"))
        .args(["scan", "--n", "5"])
        .env("WMODES_LO", "0.9")
        .env("WMODES_HI", "1.1")
        .env("WMODES_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("scan.json"))["config"]["hi"], 1.1);
}

#[test]
fn scan_help_documents_csv_columns() {
    let o = Command::new(env!("CARGO_BIN_EXE_wmodes"))
        .args(["scan", "--help"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    for col in [
        "lambda",
        "miss",
        "abel_wronskian",
        "classification",
        "error",
    ] {
        assert!(text.contains(col));
    }
}
