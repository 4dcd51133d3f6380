use std::io::Write;

use super::EstimatorReport;
use crate::error::Result;

/// CSV with one row per (step, element), one `step` summary row per step
/// and a final `global` row.
pub fn write_estimator_csv(report: &EstimatorReport, w: &mut impl Write) -> Result<()> {
    writeln!(
        w,
        "kind,step,element,flux_sq,jump_sq,osc_h_sq,osc_tau_sq,eta_c_sq,theta,residual_sq,eta_y_sq,eta_ey_sq,osc_init_sq"
    )?;
    for s in &report.steps {
        for (k, e) in s.elements.iter().enumerate() {
            writeln!(
                w,
                "element,{},{},{:e},{:e},{:e},,,,,,,",
                s.n, k, e.flux_sq, e.jump_sq, e.osc_h_sq
            )?;
        }
    }
    for s in &report.steps {
        let osc_h: f64 = s.elements.iter().map(|e| e.osc_h_sq).sum();
        writeln!(
            w,
            "step,{},,{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},,",
            s.n,
            s.flux_sq(),
            s.jump_sq,
            osc_h,
            s.osc_tau_sq,
            s.coarsening.eta_c_sq,
            s.coarsening.theta,
            s.residual_sq,
            s.eta_y_sq
        )?;
    }
    writeln!(
        w,
        "global,,,,{:e},,,,,,{:e},{:e},{:e}",
        report.jump_sq(),
        report.eta_y_sq,
        report.eta_ey_sq,
        report.osc_init_sq
    )?;
    Ok(())
}
