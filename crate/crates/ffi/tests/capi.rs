use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use heatflux_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { hf_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

fn set(cfg: *mut HfConfig, k: &str, v: &str) -> HfStatus {
    let (k, v) = (CString::new(k).unwrap(), CString::new(v).unwrap());
    unsafe { hf_config_set(cfg, k.as_ptr(), v.as_ptr()) }
}

#[test]
fn exact_run_through_the_c_api() {
    let cfg = hf_config_new();
    let text = CString::new("problem = MS2\nn = 2\nsteps = 2\np = 4\nq = 1").unwrap();
    assert_eq!(unsafe { hf_config_apply(cfg, text.as_ptr()) }, HfStatus::Ok);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { hf_run(cfg, &mut run) }, HfStatus::Ok);
    let mut s = HfSummary::default();
    assert_eq!(unsafe { hf_run_summary(run, &mut s) }, HfStatus::Ok);
    assert_eq!(s.passed, 1);
    assert_eq!(s.n_failed, 0);
    assert!(s.n_checks > 0);
    assert!(s.error_ey <= 1e-8 && s.eta_ey <= 1e-8);
    assert!(s.max_equilibration <= 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let d = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { hf_run_write_reports(run, d.as_ptr()) },
        HfStatus::Ok
    );
    assert!(dir.path().join("verification.csv").exists());
    unsafe {
        hf_run_free(run);
        hf_config_free(cfg);
    }
}

#[test]
fn errors_are_reported() {
    let cfg = hf_config_new();
    assert_eq!(set(cfg, "problem", "MS7"), HfStatus::Config);
    assert!(last_error().contains("MS7"));
    assert_eq!(set(cfg, "bogus", "1"), HfStatus::Config);
    assert_eq!(
        unsafe { hf_config_set(cfg, ptr::null(), ptr::null()) },
        HfStatus::NullPointer
    );
    assert_eq!(last_error(), "key is null");
    assert_eq!(
        unsafe { hf_run(ptr::null(), ptr::null_mut()) },
        HfStatus::NullPointer
    );
    let mut s = HfSummary::default();
    assert_eq!(
        unsafe { hf_run_summary(ptr::null(), &mut s) },
        HfStatus::NullPointer
    );

    // Truncation keeps the terminator and reports the full length.
    let mut small = [0 as c_char; 4];
    let n = unsafe { hf_last_error_message(small.as_mut_ptr(), small.len()) };
    assert!(n > 3);
    assert_eq!(
        unsafe { CStr::from_ptr(small.as_ptr()) }.to_bytes().len(),
        3
    );
    assert_eq!(unsafe { hf_last_error_message(ptr::null_mut(), 0) }, n);

    unsafe {
        hf_config_free(cfg);
        hf_config_free(ptr::null_mut());
        hf_run_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(hf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_and_links() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include/heatflux.h");
    assert!(header.exists());
    // target/<profile>/deps/capi-* -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    if !lib_dir.join("libheatflux_ffi.a").exists() {
        eprintln!("static library not built; skipping link check");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "heatflux.h"
int main(void) {
    HfConfig *cfg = hf_config_new();
    if (hf_config_set(cfg, "problem", "MS7") != HF_STATUS_CONFIG) return 1;
    char buf[128];
    if (hf_last_error_message(buf, sizeof buf) == 0) return 2;
    hf_config_set(cfg, "n", "2");
    hf_config_set(cfg, "steps", "1");
    hf_config_set(cfg, "local", "false");
    HfRun *run = NULL;
    if (hf_run(cfg, &run) != HF_STATUS_OK) return 3;
    HfSummary s;
    hf_run_summary(run, &s);
    printf("%d %.3f\n", s.passed, s.effectivity_ey);
    hf_run_free(run);
    hf_config_free(cfg);
    return s.passed ? 0 : 4;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("demo");
    let cc = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(root.join("include"))
        .arg(lib_dir.join("libheatflux_ffi.a"))
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(
        cc.status.success(),
        "{}",
        String::from_utf8_lossy(&cc.stderr)
    );
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("1 "));
}
