mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use heatflux::harness::{convergence_study, run_experiment, Sweep, SweepKind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heatflux"))
}

#[test]
fn quadratic_elements_converge_at_second_order() {
    let base = common::config("n = 4; steps = 4; p = 2; q = 1; local = false");
    let mut sweep = Sweep::new(SweepKind::H, vec![4, 8, 16]);
    sweep.couple_time = true;
    let table = convergence_study(&base, &sweep, |_| {}).unwrap();
    for row in &table.rows[1..] {
        let order = row.order_y.unwrap();
        assert!((order - 2.0).abs() <= 0.3, "order {order}");
    }
    assert!(table.passed());
}

#[test]
fn lowest_order_effectivity_is_bounded() {
    let out = run_experiment(&common::config(
        "n = 8; steps = 8; p = 1; q = 0; local = false",
    ))
    .unwrap();
    let eff = out.effectivity_ey();
    assert!((0.98..=10.0).contains(&eff), "effectivity {eff}");
    assert!(out.passed());
}

#[test]
fn coarsening_schedule_keeps_equilibration() {
    let out = run_experiment(&common::config(
        "n = 8; steps = 3; p = 2; q = 1; schedule = 1:refine,2:coarsen; local = false",
    ))
    .unwrap();
    assert!(out
        .estimators
        .steps
        .iter()
        .any(|s| s.coarsening.eta_c_sq > 0.0));
    assert!(out.max_equilibration() <= 1e-9);
    assert!(out.passed());
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_write_identical_reports() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let status = bin()
            .args([
                "verify",
                "--n",
                "4",
                "--steps",
                "2",
                "--p",
                "2",
                "--q",
                "1",
                "--schedule",
                "1:coarsen",
                "--riesz-audit",
                "true",
            ])
            .arg("--output")
            .arg(d.path())
            .output()
            .unwrap();
        assert_eq!(
            status.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
    }
    let (a, b) = (read_all(dirs[0].path()), read_all(dirs[1].path()));
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let summary = fs::read_to_string(dirs[0].path().join("verification.csv")).unwrap();
    assert!(summary.contains("config_hash"));
    assert!(summary.contains("riesz_audit"));
}

#[test]
fn exit_codes() {
    let bad = bin().args(["verify", "--problem", "MS9"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let bad = bin().args(["solve", "--p", "0"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let ok = bin()
        .args(["solve", "--n", "2", "--steps", "1"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let rows = String::from_utf8(ok.stdout).unwrap();
    assert!(rows.starts_with("step,time,dofs,l2_error"));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nn = 2\nsteps = 1\n").unwrap();
    let out = bin()
        .args(["solve", "--n", "16", "--steps", "9"])
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    let out = bin()
        .args(["sweep", "--n", "2", "--steps", "1", "--sweep", "q:0,1"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("# sweep = q"));
}
