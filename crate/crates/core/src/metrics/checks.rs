use std::fmt;

use super::ErrorReport;
use crate::estimators::EstimatorReport;

/// Relative band on inequalities whose sides carry discrete Riesz lifts.
pub const RIESZ_BAND: f64 = 0.02;

/// One verified inequality `left <= right` (or a bounded ratio).
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub left: f64,
    pub right: f64,
    /// Allowed violation `left - right`.
    pub tolerance: f64,
    /// `None` when the check was skipped.
    pub passed: Option<bool>,
    pub note: String,
}

impl Check {
    pub fn inequality(name: impl Into<String>, left: f64, right: f64, tolerance: f64) -> Self {
        let passed = left.is_finite() && right.is_finite() && left - right <= tolerance;
        Self {
            name: name.into(),
            left,
            right,
            tolerance,
            passed: Some(passed),
            note: String::new(),
        }
    }

    /// `left <= right` up to the Riesz band and a small absolute floor.
    pub fn banded(name: impl Into<String>, left: f64, right: f64, floor: f64) -> Self {
        Self::inequality(name, left, right, RIESZ_BAND * right.abs() + floor)
    }

    pub fn skipped(name: impl Into<String>, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            left: f64::NAN,
            right: f64::NAN,
            tolerance: 0.0,
            passed: None,
            note: note.into(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn slack(&self) -> f64 {
        self.right - self.left
    }

    pub fn failed(&self) -> bool {
        self.passed == Some(false)
    }

    pub fn status(&self) -> &'static str {
        match self.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<28} left {:.6e} right {:.6e} slack {:+.3e} tol {:.1e}",
            self.status(),
            self.name,
            self.left,
            self.right,
            self.slack(),
            self.tolerance
        )?;
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

/// Absolute floor for quantities that vanish in exact runs.
pub fn floor_for(scale: f64) -> f64 {
    1e-14 * scale.max(1.0)
}

/// Jump bounds per step: two single-step variants and the combined bound.
pub fn jump_bounds(est: &EstimatorReport) -> Vec<Check> {
    let mut out = Vec::new();
    for s in &est.steps {
        let c = &s.coarsening;
        let tau = s.tau;
        let q = s.q as f64;
        let res = s.residual_sq;
        let osc = s.osc_tau_riesz_sq;
        let fl = floor_for(0.0) * (1.0 + c.jump_energy);
        let a = tau / (8.0 * q + 4.0);
        out.push(Check::banded(
            format!("jump_a[{}]", s.n),
            a * c.jump_energy,
            res + a * c.misfit,
            fl,
        ));
        let b = tau / (8.0 * q + 12.0);
        out.push(Check::banded(
            format!("jump_b[{}]", s.n),
            b * c.jump_energy,
            2.0 * (res + osc),
            fl,
        ));
        out.push(Check::banded(
            format!("jump_total[{}]", s.n),
            s.jump_sq,
            8.0 * res + c.eta_c_sq.min(8.0 * osc),
            fl,
        ));
    }
    out
}

/// Norm equivalence between the `E_Y` and `Y` errors.
pub fn norm_equivalence(est: &EstimatorReport, err: &ErrorReport) -> Vec<Check> {
    let fl = floor_for(0.0);
    let mut out = vec![Check::inequality(
        "equivalence_lower",
        err.y_sq,
        err.ey_sq,
        0.0,
    )];
    let extra: f64 = est
        .steps
        .iter()
        .map(|s| s.coarsening.eta_c_sq.min(8.0 * s.osc_tau_riesz_sq))
        .sum();
    out.push(Check::banded(
        "equivalence_upper",
        err.ey_sq,
        9.0 * err.y_sq + extra,
        fl,
    ));
    let theta = est
        .steps
        .iter()
        .map(|s| s.coarsening.theta)
        .fold(0.0, f64::max);
    if theta < 1.0 {
        let factor = (3.0 - theta) / (1.0 - theta);
        out.push(
            Check::banded("equivalence_theta", err.ey_sq, factor * err.y_sq, fl)
                .with_note(format!("theta {theta:.3e} factor {factor:.6}")),
        );
    } else {
        out.push(Check::skipped(
            "equivalence_theta",
            format!("theta {theta:.3e} >= 1"),
        ));
    }
    out
}

/// Guaranteed upper bounds, expressed as `error <= estimator`.
pub fn upper_bounds(est: &EstimatorReport, err: &ErrorReport) -> Vec<Check> {
    let fl = floor_for(0.0);
    vec![
        Check::inequality(
            "upper_bound_ey",
            (1.0 - RIESZ_BAND) * err.ey(),
            est.eta_ey(),
            fl,
        ),
        Check::inequality(
            "upper_bound_y",
            (1.0 - RIESZ_BAND) * err.y(),
            est.eta_y(),
            fl,
        ),
    ]
}

/// Relative gap of the residual identity
/// `||u - I u||_Y^2 = ||R||^2 + ||u0 - I u(0)||^2`.
pub fn infsup_gap(est: &EstimatorReport, err: &ErrorReport) -> f64 {
    let res: f64 = est.steps.iter().map(|s| s.residual_sq).sum();
    let rhs = res + err.init_sq;
    if err.y_sq > 0.0 {
        (err.y_sq - rhs).abs() / err.y_sq
    } else {
        rhs
    }
}

/// Squared local norms below this are treated as zero.
pub const LOCAL_FLOOR: f64 = 1e-20;

/// Local efficiency ratios per (step, coarse element): indicators over the
/// sum of the local error seminorms and patch oscillations of the element's
/// vertices. Elements whose denominator vanishes relative to the step total,
/// or falls below `LOCAL_FLOOR` (roundoff in exact runs), are skipped.
pub fn local_efficiency(
    est: &EstimatorReport,
    err: &ErrorReport,
    meshes: &[&crate::mesh::MeshLevel],
) -> Vec<Vec<f64>> {
    est.steps
        .iter()
        .zip(&err.steps)
        .zip(meshes)
        .map(|((s, e), mesh)| {
            if e.local_ey.is_empty() {
                return Vec::new();
            }
            let scale: f64 = e.local_ey.iter().sum::<f64>() + s.patch_osc.iter().sum::<f64>();
            mesh.triangles()
                .iter()
                .zip(&s.elements)
                .filter_map(|(tri, el)| {
                    let den: f64 = tri.iter().map(|&a| e.local_ey[a] + s.patch_osc[a]).sum();
                    (den > 1e-14 * scale && den > LOCAL_FLOOR)
                        .then(|| (el.flux_sq + el.jump_sq) / den)
                })
                .collect()
        })
        .collect()
}
