use assert_cmd::Command;
use predicates::prelude::*;

fn qlayers() -> Command {
    Command::cargo_bin("qlayers").unwrap()
}

#[test]
fn certify_plane_is_refused_with_exit_2() {
    qlayers()
        .args(["--surface", "plane", "--a", "0.5", "--command", "certify"])
        .assert()
        .code(2)
        .stdout(predicate::str::contains("\"verdict\": \"refused\""));
}

#[test]
fn certify_hyperboloid_exits_zero() {
    qlayers()
        .args([
            "--surface",
            "hyperboloid",
            "--a",
            "0.25",
            "--command",
            "certify",
        ])
        .assert()
        .code(0)
        .stdout(predicate::str::contains("\"verdict\": \"certified\""));
}

#[test]
fn bad_family_is_an_error() {
    qlayers()
        .args(["--surface", "torus", "--a", "0.25", "--command", "describe"])
        .assert()
        .code(1)
        .stderr(predicate::str::contains("unknown family"));
}

#[test]
fn wide_layer_is_an_error() {
    qlayers()
        .args([
            "--surface",
            "hyperboloid",
            "--a",
            "1.0",
            "--command",
            "certify",
        ])
        .assert()
        .code(1)
        .stderr(predicate::str::contains("self-intersection"));
}

#[test]
fn config_file_drives_the_run_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "family = hyperboloid\nslope = 2.0\ns = 1.0\na = 0.9 # overridden below\n",
    )
    .unwrap();
    let out = dir.path().join("report.json");
    qlayers()
        .arg(&cfg)
        .args(["--a", "0.25", "--command", "certify"])
        .args(["--out", out.to_str().unwrap()])
        .assert()
        .code(0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["a"], 0.25);
    assert_eq!(report["certificate"]["verdict"], "certified");
}

#[test]
fn malformed_config_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "family hyperboloid\n").unwrap();
    qlayers()
        .arg(&cfg)
        .args(["--command", "describe"])
        .assert()
        .code(1)
        .stderr(predicate::str::contains("expected key = value"));
}

#[test]
fn describe_writes_samples_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let csv = dir.path().join("samples.csv");
    std::fs::write(
        &cfg,
        format!("family = gaussian_bump\nsamples_csv = {}\n", csv.display()),
    )
    .unwrap();
    qlayers()
        .arg(&cfg)
        .args(["--a", "0.1", "--command", "describe"])
        .assert()
        .code(0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("u,v,K,H,normB,nz\n"));
    assert!(text.lines().count() > 100);
}

#[test]
fn solve_writes_artifacts_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let vec_csv = dir.path().join("ground.csv");
    let mat = dir.path().join("stiffness.txt");
    std::fs::write(
        &cfg,
        format!(
            "family = hyperboloid\nslope = 2.0\nradii = 4, 6, 8\nn_t = 10\nsolver_tol = 1e-4\n\
             eigenvector_csv = {}\nmatrix_out = {}\n",
            vec_csv.display(),
            mat.display()
        ),
    )
    .unwrap();
    let out = dir.path().join("report.json");
    qlayers()
        .arg(&cfg)
        .args(["--a", "0.25", "--command", "solve", "--grid", "0.2"])
        .args(["--out", out.to_str().unwrap()])
        .assert()
        .code(0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let lam = report["spectrum"]["extrapolated_calibrated"].as_f64().unwrap();
    assert!(lam < report["kappa_sq"].as_f64().unwrap());
    assert!(std::fs::read_to_string(&vec_csv).unwrap().lines().count() > 10);
    // triplet export: "row col value" lines
    let first = std::fs::read_to_string(&mat).unwrap();
    let fields: Vec<&str> = first.lines().next().unwrap().split(' ').collect();
    assert_eq!(fields.len(), 3);
}

#[test]
fn sweep_tabulates_verdict_against_ca() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "family = hyperboloid\nsweep_a = 0.1, 0.25, 0.5\n").unwrap();
    let out = dir.path().join("report.json");
    qlayers()
        .arg(&cfg)
        .args(["--command", "sweep", "--budget", "3"])
        .args(["--out", out.to_str().unwrap()])
        .assert()
        .code(0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = report["sweep"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    // a = 0.5 has C_a = 0.5 * 2 sqrt(2) > 1: refused outright
    assert_eq!(rows[2]["verdict"], "refused");
    assert!(rows[2]["ca"].as_f64().unwrap() > 1.0);
    assert_eq!(rows[0]["verdict"], "certified");
}

#[test]
fn probe_ess_sits_just_above_threshold() {
    qlayers()
        .args([
            "--surface",
            "hyperboloid",
            "--a",
            "0.25",
            "--command",
            "probe-ess",
        ])
        .assert()
        .code(0)
        .stdout(predicate::str::contains("rayleigh_value"));
}

#[test]
fn report_is_deterministic_across_thread_counts() {
    let run = |threads: &str| -> String {
        let out = qlayers()
            .args([
                "--surface",
                "hyperboloid",
                "--a",
                "0.25",
                "--command",
                "certify",
                "--threads",
                threads,
            ])
            .output()
            .unwrap();
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v.as_object_mut().unwrap().remove("timings_ms");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}
