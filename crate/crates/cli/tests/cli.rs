use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn convarc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convarc"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, seed: u64) -> String {
    let path = dir.join(format!("{name}.json"));
    let out = dir.join(name);
    let cfg = serde_json::json!({
        "domains": [{"kind": "half_plane", "beta": 0.5}, {"kind": "sector", "alpha": 0.25}],
        "radii": [0.3, 0.9],
        "members_per_domain": 2,
        "seed": seed,
        "star_points": 16,
        "arc_sets_per_member": 4,
        "output": out.to_str().unwrap(),
    });
    std::fs::write(&path, cfg.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_is_deterministic_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a", 11);
    let b = write_config(dir.path(), "b", 11);
    for c in [&a, &b] {
        let out = convarc(&["verify", "--config", c]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let rows_a = std::fs::read(dir.path().join("a_rows.csv")).unwrap();
    let rows_b = std::fs::read(dir.path().join("b_rows.csv")).unwrap();
    assert_eq!(rows_a, rows_b);
    let text = String::from_utf8(rows_a).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",11")));

    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a_report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 11);
    assert_eq!(report["summary"]["n_checks"], report["summary"]["n_pass"]);
}

#[test]
fn verify_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(dir.path(), "base", 1);
    let prefix = dir.path().join("over");
    let out = convarc(&[
        "verify",
        "--config",
        &c,
        "--seed",
        "5",
        "--order",
        "512",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = std::fs::read_to_string(dir.path().join("over_rows.csv")).unwrap();
    assert!(rows.lines().nth(1).unwrap().ends_with(",5"));
    assert!(!dir.path().join("base_rows.csv").exists());
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"domains": [], "radii": [0.99], "members_per_domain": 1, "seed": 0}"#,
    )
    .unwrap();
    let out = convarc(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = convarc(&[
        "extremal",
        "--domain",
        r#"{"kind":"sector","alpha":2}"#,
        "--r",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let c = write_config(dir.path(), "noart", 0);
    let out = convarc(&["plot-data", "--config", &c]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn known_values_pass() {
    let out = convarc(&["known-values"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("keogh,")).count(), 9);
}

#[test]
fn extremal_arclength_matches_closed_form() {
    let out = convarc(&[
        "extremal",
        "--domain",
        r#"{"kind":"half_plane","beta":0}"#,
        "--r",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let l = v["arclength"].as_f64().unwrap();
    assert!((l - 4.0 * PI / 3.0).abs() < 1e-9);
    assert_eq!(v["log_fprime_image_convex"]["convex"], true);
}

#[test]
fn rearrange_and_star() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    std::fs::write(&path, "theta,h\n-3,0\n-1.5,1\n0,3\n1.5,2\n").unwrap();
    let out = convarc(&["rearrange", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let vals: Vec<f64> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals, vec![0.0, 1.0, 3.0, 2.0]);

    let out = convarc(&["rearrange", "--input", path.to_str().unwrap(), "--star"]);
    let last: f64 = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    // the star-function at π is the full integral
    assert!((last - 6.0 * PI / 2.0).abs() < 1e-12);
}

#[test]
fn plot_data_after_verify() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(dir.path(), "p", 3);
    assert_eq!(convarc(&["verify", "--config", &c]).status.code(), Some(0));
    let out = convarc(&["plot-data", "--config", &c]);
    assert_eq!(out.status.code(), Some(0));
    for suffix in ["profiles", "star", "growth"] {
        assert!(dir.path().join(format!("p_{suffix}.csv")).exists());
    }
}
