//! Report files of one run. Every CSV starts with `#` lines carrying the
//! config hash, the worst shape ratio and the Riesz audit outcome. No
//! timings are written, so reruns reproduce the files byte for byte.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::run::RunOutput;
use crate::error::Result;
use crate::estimators::write_estimator_csv;

pub const ESTIMATORS_CSV: &str = "estimators.csv";
pub const ERRORS_CSV: &str = "errors.csv";
pub const VERIFICATION_CSV: &str = "verification.csv";
pub const LOCAL_CSV: &str = "local_efficiency.csv";
pub const AUDIT_CSV: &str = "riesz_audit.csv";
pub const SUMMARY_TXT: &str = "summary.txt";

/// `pass`, `fail` or `off`.
pub fn audit_outcome(out: &RunOutput) -> String {
    match &out.audit {
        Some(a) => format!(
            "{} (max change {:.3e}, r {} -> {})",
            if a.passed() { "pass" } else { "fail" },
            a.max_change,
            a.base.refinements,
            a.enriched.refinements
        ),
        None => "off".to_string(),
    }
}

fn preamble(out: &RunOutput, w: &mut impl Write) -> Result<()> {
    writeln!(w, "# config_hash = {}", out.hash)?;
    writeln!(w, "# shape_ratio = {:.6e}", out.shape_ratio)?;
    writeln!(w, "# riesz_audit = {}", audit_outcome(out))?;
    Ok(())
}

pub fn write_errors_csv(out: &RunOutput, w: &mut impl Write) -> Result<()> {
    preamble(out, w)?;
    writeln!(
        w,
        "kind,step,dt_dual_sq,grad_sq,gap_sq,localization,y_sq,ey_sq,final_sq,init_sq"
    )?;
    for s in &out.errors.steps {
        let loc = s
            .localization_ratio()
            .map(|r| format!("{r:e}"))
            .unwrap_or_default();
        writeln!(
            w,
            "step,{},{:e},{:e},{:e},{},,,,",
            s.n, s.dt_dual_sq, s.grad_sq, s.gap_sq, loc
        )?;
    }
    let e = &out.errors;
    writeln!(
        w,
        "global,,,,,,{:e},{:e},{:e},{:e}",
        e.y_sq, e.ey_sq, e.final_sq, e.init_sq
    )?;
    Ok(())
}

pub fn write_verification_csv(out: &RunOutput, w: &mut impl Write) -> Result<()> {
    preamble(out, w)?;
    writeln!(w, "check,status,left,right,slack,tolerance,note")?;
    for c in &out.checks {
        writeln!(
            w,
            "{},{},{:e},{:e},{:e},{:e},\"{}\"",
            c.name,
            c.status(),
            c.left,
            c.right,
            c.slack(),
            c.tolerance,
            c.note.replace('"', "'")
        )?;
    }
    Ok(())
}

pub fn write_local_csv(out: &RunOutput, w: &mut impl Write) -> Result<()> {
    preamble(out, w)?;
    writeln!(w, "step,index,ratio")?;
    for (n, ratios) in out.local_efficiency.iter().enumerate() {
        for (i, r) in ratios.iter().enumerate() {
            writeln!(w, "{},{},{:e}", n + 1, i, r)?;
        }
    }
    Ok(())
}

pub fn write_audit_csv(out: &RunOutput, w: &mut impl Write) -> Result<()> {
    preamble(out, w)?;
    writeln!(w, "quantity,step,base,enriched,relative_change")?;
    if let Some(a) = &out.audit {
        for (name, n, b, e) in &a.entries {
            let rel = if *e > a.floor { (e - b).abs() / e } else { 0.0 };
            writeln!(w, "{name},{n},{b:e},{e:e},{rel:e}")?;
        }
    }
    Ok(())
}

/// Human-readable digest: config, headline numbers, audit, checks.
pub fn write_summary(out: &RunOutput, w: &mut impl Write) -> Result<()> {
    writeln!(w, "config_hash {}", out.hash)?;
    for line in out
        .config
        .to_text()
        .lines()
        .filter(|l| !l.starts_with("output"))
    {
        writeln!(w, "  {line}")?;
    }
    writeln!(w, "shape_ratio {:.6e}", out.shape_ratio)?;
    writeln!(w, "max_dofs {}", out.max_dofs)?;
    writeln!(w, "equilibration {:.3e}", out.max_equilibration())?;
    writeln!(w, "normal_trace {:.3e}", out.normal_jump)?;
    writeln!(
        w,
        "eta_ey {:.6e} error_ey {:.6e} effectivity_ey {:.4}",
        out.estimators.eta_ey(),
        out.errors.ey(),
        out.effectivity_ey()
    )?;
    writeln!(
        w,
        "eta_y {:.6e} error_y {:.6e} effectivity_y {:.4}",
        out.estimators.eta_y(),
        out.errors.y(),
        out.effectivity_y()
    )?;
    if !out.local_efficiency.iter().all(Vec::is_empty) {
        writeln!(w, "local_efficiency_max {:.4}", out.max_local_efficiency())?;
    }
    writeln!(w, "riesz_audit {}", audit_outcome(out))?;
    writeln!(w, "checks")?;
    for c in &out.checks {
        writeln!(w, "  {c}")?;
    }
    writeln!(w, "result {}", if out.passed() { "PASS" } else { "FAIL" })?;
    Ok(())
}

fn write_file(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes every report of `out` into `dir`, creating it if needed.
pub fn write_reports(out: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_file(dir, ESTIMATORS_CSV, |w| {
        preamble(out, w)?;
        write_estimator_csv(&out.estimators, w)
    })?;
    write_file(dir, ERRORS_CSV, |w| write_errors_csv(out, w))?;
    write_file(dir, VERIFICATION_CSV, |w| write_verification_csv(out, w))?;
    write_file(dir, LOCAL_CSV, |w| write_local_csv(out, w))?;
    write_file(dir, AUDIT_CSV, |w| write_audit_csv(out, w))?;
    write_file(dir, SUMMARY_TXT, |w| write_summary(out, w))?;
    Ok(())
}
