//! End-to-end checks of the command-line surface: artifacts, exit codes, and
//! format guards, on small grids.

use std::path::Path;
use std::process::Command;

fn mcflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mcflow"))
}

fn run_circle(dir: &Path, extra: &[&str]) -> std::process::Output {
    let mut cmd = mcflow();
    cmd.arg("run")
        .arg("--set")
        .arg("scenario.name=circle")
        .arg("--set")
        .arg("grid.n=96")
        .arg("--out")
        .arg(dir)
        .arg("--quiet");
    for e in extra {
        cmd.arg("--set").arg(e);
    }
    cmd.output().expect("spawn mcflow")
}

#[test]
fn run_writes_expected_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_circle(tmp.path(), &[]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in [
        "config.txt",
        "u.mcaf",
        "diagnostics.csv",
        "report.json",
        "residuals.csv",
        "u_heatmap.pgm",
        "residual_heatmap.pgm",
        "manifest.json",
    ] {
        assert!(tmp.path().join(name).exists(), "missing {name}");
    }
    let report = std::fs::read_to_string(tmp.path().join("report.json")).unwrap();
    assert!(report.contains("\"verdict\": \"C2\""), "report: {report}");
    // manifest digests every file it lists
    let manifest = std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"sha256\""));
    assert!(manifest.contains("u.mcaf"));
}

#[test]
fn config_validation_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_circle(tmp.path(), &["grid.n=4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_key_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_circle(tmp.path(), &["grid.nodes=64"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn incomplete_sweep_exit_code_and_partial_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_circle(tmp.path(), &["evolve.t_max=0.01"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(tmp.path().join("u.mcaf.partial").exists());
    assert!(tmp.path().join("manifest.json.partial").exists());
    assert!(!tmp.path().join("report.json").exists());
}

#[test]
fn analyze_roundtrip_is_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_circle(tmp.path(), &[]);
    assert!(out.status.success());
    let report_a = std::fs::read(tmp.path().join("report.json")).unwrap();

    let tmp2 = tempfile::tempdir().unwrap();
    let out2 = mcflow()
        .arg("analyze")
        .arg(tmp.path().join("u.mcaf"))
        .arg("--set")
        .arg("grid.n=96")
        .arg("--out")
        .arg(tmp2.path())
        .arg("--quiet")
        .output()
        .unwrap();
    assert!(
        out2.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out2.stderr)
    );
    let report_b = std::fs::read(tmp2.path().join("report.json")).unwrap();
    assert_eq!(report_a, report_b, "analyze-from-file must reproduce the run report");
}

#[test]
fn analyze_rejects_levelset_files() {
    // hand-craft a level-set MCAF (arrival flag clear)
    let spec = mcflow::GridSpec::new(2, &[16, 16], &[-1.0, -1.0], 0.1, false).unwrap();
    let f = mcflow::ScalarField::from_fn(spec, mcflow::FieldLabel::LevelSet, |p| 0.5 - p[0].abs());
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("levelset.mcaf");
    mcflow::mcaf::write_levelset(&path, &f).unwrap();
    let out = mcflow()
        .arg("analyze")
        .arg(&path)
        .arg("--out")
        .arg(tmp.path())
        .arg("--quiet")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn analyze_rejects_bad_magic() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("garbage.mcaf");
    std::fs::write(&path, b"NOTMCAF_AT_ALL_____________").unwrap();
    let out = mcflow()
        .arg("analyze")
        .arg(&path)
        .arg("--out")
        .arg(tmp.path())
        .arg("--quiet")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn export_writes_csv_and_pgm() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_circle(tmp.path(), &[]);
    assert!(out.status.success());
    let tmp2 = tempfile::tempdir().unwrap();
    let out2 = mcflow()
        .arg("export")
        .arg(tmp.path().join("u.mcaf"))
        .arg("--out")
        .arg(tmp2.path())
        .arg("--quiet")
        .output()
        .unwrap();
    assert!(out2.status.success());
    assert!(tmp2.path().join("field.csv").exists());
    assert!(tmp2.path().join("field.pgm").exists());
    let csv = std::fs::read_to_string(tmp2.path().join("field.csv")).unwrap();
    assert!(csv.starts_with("index,x,y,value\n"));
}

#[test]
fn stricter_angle_tolerance_names_the_condition() {
    // analyzing with angle_tol = 1 degree must echo the tightened tolerance
    // in the tangency condition, whatever the verdict
    let tmp = tempfile::tempdir().unwrap();
    let out = run_circle(tmp.path(), &["analyze.angle_tol=1.0"]);
    assert!(out.status.success());
    let report = std::fs::read_to_string(tmp.path().join("report.json")).unwrap();
    assert!(report.contains("tangent to Hessian kernels"));
    assert!(report.contains("1.000 deg"));
}
