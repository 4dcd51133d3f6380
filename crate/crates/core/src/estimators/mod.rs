//! A posteriori estimators built from the equilibrated flux, the temporal
//! reconstruction and the data approximations.

mod coarsening;
mod dual;
mod report;
mod riesz;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

pub use coarsening::{coarsening, CoarseningReport, ProjectionCache};
pub use dual::{
    dual_step, time_rule, DualOptions, DualStep, ExactSolution, LocalCache, StepErrors, TimeRules,
    POINCARE_UNIT_SQUARE,
};
pub use report::write_estimator_csv;
pub use riesz::{LocalSpace, ReferenceSpace, RieszConfig};

use crate::basis::quadrature::triangle_rule;
use crate::basis::rtn::bary_to_point;
use crate::error::Error;
use crate::flux::StepFlux;
use crate::mesh::Point;
use crate::reconstruction::{combine, StepReconstruction};
use crate::solver::DiscreteSolution;

/// How the temporal data oscillation `||f - f_tau||_{H^-1}` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OscillationMode {
    /// Discrete Riesz lift on the reference space.
    #[default]
    Riesz,
    /// Poincare bound `diam(Omega)/pi ||f - f_tau||`.
    Poincare,
}

impl FromStr for OscillationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "riesz" => Ok(Self::Riesz),
            "poincare" => Ok(Self::Poincare),
            _ => Err(Error::Config(format!("unknown oscillation mode `{s}`"))),
        }
    }
}

impl fmt::Display for OscillationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Riesz => "riesz",
            Self::Poincare => "poincare",
        })
    }
}

/// Local quantities of one coarse element.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ElementEstimates {
    /// `int ||sigma + grad I u||_K^2 dt`.
    pub flux_sq: f64,
    /// Jump coefficient times `||grad jump||_K^2`.
    pub jump_sq: f64,
    /// `int sum h^2/pi^2 ||f_tau - f_htau||^2 dt` over the fine elements.
    pub osc_h_sq: f64,
    /// `||grad jump||_K^2`.
    pub jump_energy: f64,
}

/// Temporal Gram matrices of the space-time polynomial misfits on every
/// coarse element; `phi^T G phi` is the squared norm at a time with basis
/// values `phi`, and the trace is the time integral.
#[derive(Debug, Clone)]
pub struct StepGrams {
    pub flux: Vec<Vec<Vec<f64>>>,
    pub osc_h: Vec<Vec<Vec<f64>>>,
    pub jump_energy: Vec<f64>,
    /// `int ||grad (u_htau - I u_htau)||^2` by Gauss quadrature in time.
    pub reconstruction_gap_sq: f64,
    /// `int ||grad u_htau||^2` over the step.
    pub energy_sq: f64,
}

fn quadratic(g: &[Vec<f64>], phi: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            s += phi[i] * v * phi[j];
        }
    }
    s.max(0.0)
}

fn trace(g: &[Vec<f64>]) -> f64 {
    g.iter()
        .enumerate()
        .map(|(i, r)| r[i])
        .sum::<f64>()
        .max(0.0)
}

pub fn step_grams(sol: &DiscreteSolution, step: &StepReconstruction, flux: &StepFlux) -> StepGrams {
    let n = step.n;
    let q = step.q();
    let tr = sol.disc.transition(n);
    let n_coarse = sol.disc.space(n).mesh().n_elements();
    let src = &sol.sources[n - 1];
    let nm = q + 2;
    let mut gf = vec![vec![vec![0.0; nm]; nm]; n_coarse];
    let mut go = vec![vec![vec![0.0; q + 1]; q + 1]; n_coarse];
    let mut jump = vec![0.0; n_coarse];
    let (a, b) = sol.disc.partition.interval(n);
    let (times, tw) = time_rule(a, b, q + 3);
    let phis: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| step.algebra.basis.orthonormal_values(q + 1, t))
        .collect();
    let mut gap = 0.0;
    let mut energy = 0.0;
    let (mut sig, mut div) = (Vec::new(), Vec::new());
    let mut m = vec![[0.0; 2]; nm];
    let mut d = vec![0.0; q + 1];
    for t in 0..tr.fine.n_elements() {
        let k_c = tr.to_next[t];
        let h2 = (tr.fine.diameter(t) / PI).powi(2);
        for (k, (&x, &w)) in src.quad.points[t]
            .iter()
            .zip(&src.quad.weights[t])
            .enumerate()
        {
            flux.eval(t, x, &mut sig, &mut div);
            let iu = step.reconstructed(t, k);
            for j in 0..nm {
                let s = sig.get(j).copied().unwrap_or([0.0; 2]);
                m[j] = [s[0] + iu[j][1], s[1] + iu[j][2]];
            }
            let g = &mut gf[k_c];
            for i in 0..nm {
                for j in 0..nm {
                    g[i][j] += w * (m[i][0] * m[j][0] + m[i][1] * m[j][1]);
                }
            }
            for (j, dj) in d.iter_mut().enumerate() {
                *dj = src.moment(t, k, j) - step.data.moment(t, k, j);
            }
            let g = &mut go[k_c];
            for i in 0..=q {
                for j in 0..=q {
                    g[i][j] += h2 * w * d[i] * d[j];
                }
            }
            let jp = step.samples.jump(t, k);
            jump[k_c] += w * (jp[1] * jp[1] + jp[2] * jp[2]);
            // Subtract modewise first: only the top modes differ.
            let mut diff = iu;
            for (dj, uj) in diff.iter_mut().zip(step.samples.modes(t, k)) {
                energy += w * (uj[1] * uj[1] + uj[2] * uj[2]);
                for c in 0..3 {
                    dj[c] -= uj[c];
                }
            }
            for (phi, &wt) in phis.iter().zip(&tw) {
                let dv = combine(&diff, phi);
                gap += wt * w * (dv[1] * dv[1] + dv[2] * dv[2]);
            }
        }
    }
    StepGrams {
        flux: gf,
        osc_h: go,
        jump_energy: jump,
        reconstruction_gap_sq: gap,
        energy_sq: energy,
    }
}

/// Everything estimated on one time step.
#[derive(Debug, Clone)]
pub struct StepEstimates {
    pub n: usize,
    pub tau: f64,
    pub q: usize,
    pub elements: Vec<ElementEstimates>,
    /// `[eta_osc^{a,n}]^2` per vertex of `T^n` (empty without local lifts).
    pub patch_osc: Vec<f64>,
    /// `int ||f - f_tau||^2_{H^-1}` in the selected mode.
    pub osc_tau_sq: f64,
    pub osc_tau_riesz_sq: f64,
    pub osc_tau_poincare_sq: f64,
    pub coarsening: CoarseningReport,
    /// `||R(I u)|_{I_n}||^2`.
    pub residual_sq: f64,
    /// Contribution of the step to `eta_Y^2`.
    pub eta_y_sq: f64,
    /// Relative change of that contribution between the last two composite
    /// time rules, and the number of subintervals of the final one.
    pub time_audit: f64,
    pub time_subintervals: usize,
    /// `|int ||grad(u - I u)||^2 - jump_sq| / jump_sq`, with `jump_sq`
    /// floored at `1e-14 int ||grad u_htau||^2`.
    pub jump_identity_gap: f64,
    /// Sum of jump energies over coarse elements, times the coefficient.
    pub jump_sq: f64,
}

impl StepEstimates {
    pub fn flux_sq(&self) -> f64 {
        self.elements.iter().map(|e| e.flux_sq).sum()
    }

    pub fn jump_energy(&self) -> f64 {
        self.elements.iter().map(|e| e.jump_energy).sum()
    }
}

fn integrand(grams: &StepGrams, phi: &[f64], q: usize, osc_tau: f64) -> f64 {
    let mut s = 0.0;
    for (gf, go) in grams.flux.iter().zip(&grams.osc_h) {
        let v = quadratic(gf, phi).sqrt() + quadratic(go, &phi[..=q]).sqrt();
        s += v * v;
    }
    (s.sqrt() + osc_tau.sqrt()).powi(2)
}

/// Tolerance of the composite time rule for the `eta_Y` integrand.
pub const TIME_RULE_TOL: f64 = 1e-3;
const MAX_SUBINTERVALS: usize = 256;

/// `int_a^b g` by `m` equal subintervals with `points` Gauss points each.
fn composite(a: f64, b: f64, m: usize, points: usize, g: &impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / m as f64;
    (0..m)
        .map(|i| {
            let (t, w) = time_rule(a + i as f64 * h, a + (i + 1) as f64 * h, points);
            t.iter().zip(&w).map(|(&t, &w)| w * g(t)).sum::<f64>()
        })
        .sum()
}

/// Combines the per-step pieces into the step estimates. The `eta_Y`
/// integrand is not polynomial in time, so the composite rule is refined
/// until two successive values agree to [`TIME_RULE_TOL`].
pub fn estimate_step(
    step: &StepReconstruction,
    grams: &StepGrams,
    dual: &DualStep,
    coarsening: CoarseningReport,
    mode: OscillationMode,
    extra_time_points: usize,
) -> StepEstimates {
    let q = step.q();
    let basis = &step.algebra.basis;
    let factor = step.algebra.jump_factor();
    let elements: Vec<ElementEstimates> = (0..grams.flux.len())
        .map(|k| ElementEstimates {
            flux_sq: trace(&grams.flux[k]),
            jump_sq: factor * grams.jump_energy[k],
            osc_h_sq: trace(&grams.osc_h[k]),
            jump_energy: grams.jump_energy[k],
        })
        .collect();
    let poincare = mode == OscillationMode::Poincare;
    let g = |t: f64| {
        integrand(
            grams,
            &basis.orthonormal_values(q + 1, t),
            q,
            dual.osc_tau_at(t, poincare),
        )
    };
    let (a, b) = (basis.t_start, basis.t_end);
    let points = q + 3 + extra_time_points;
    let mut m = 1;
    let mut coarse = composite(a, b, m, points, &g);
    let (eta_y_sq, time_audit) = loop {
        let fine = composite(a, b, 2 * m, points, &g);
        let change = if fine > 0.0 {
            (fine - coarse).abs() / fine
        } else {
            0.0
        };
        if change <= TIME_RULE_TOL || 2 * m >= MAX_SUBINTERVALS {
            break (fine, change);
        }
        m *= 2;
        coarse = fine;
    };
    let jump_sq: f64 = elements.iter().map(|e| e.jump_sq).sum();
    // Jumps at roundoff level (exact runs) are measured against the energy.
    let scale = jump_sq.max(1e-14 * grams.energy_sq);
    let jump_identity_gap = if scale > 0.0 {
        (grams.reconstruction_gap_sq - jump_sq).abs() / scale
    } else {
        0.0
    };
    StepEstimates {
        n: step.n,
        tau: basis.tau(),
        q,
        elements,
        patch_osc: dual.patch_osc.clone(),
        osc_tau_sq: dual.osc_tau_sq(poincare),
        osc_tau_riesz_sq: dual.osc_tau_sq(false),
        osc_tau_poincare_sq: dual.osc_tau_sq(true),
        coarsening,
        residual_sq: dual.residual_sq,
        eta_y_sq,
        time_audit,
        time_subintervals: 2 * m,
        jump_identity_gap,
        jump_sq,
    }
}

/// `||u0 - Pi_h u0||^2` on the initial mesh.
pub fn initial_oscillation(sol: &DiscreteSolution, u0: &(dyn Fn(Point) -> f64 + Sync)) -> f64 {
    let space = sol.disc.space(0);
    let mesh = space.mesh();
    let rule = triangle_rule(2 * space.max_degree() + 6);
    let (mut v, mut g) = (Vec::new(), Vec::new());
    let mut s = 0.0;
    for t in 0..mesh.n_elements() {
        let pts = mesh.element_points(t);
        let a2 = 2.0 * mesh.area(t);
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let x = bary_to_point(&pts, *lam);
            space.eval_at(t, x, &mut v, &mut g);
            let (uh, _) = space.combine(&sol.initial, t, &v, &g);
            s += w * a2 * (u0(x) - uh).powi(2);
        }
    }
    s
}

/// Estimators of a whole run.
#[derive(Debug, Clone)]
pub struct EstimatorReport {
    pub steps: Vec<StepEstimates>,
    pub osc_init_sq: f64,
    pub eta_y_sq: f64,
    pub eta_ey_sq: f64,
    /// Largest relative change of a step's `eta_Y^2` contribution between
    /// the last two composite time rules.
    pub time_audit: f64,
    pub mode: OscillationMode,
}

impl EstimatorReport {
    pub fn new(steps: Vec<StepEstimates>, osc_init_sq: f64, mode: OscillationMode) -> Self {
        let eta_y_sq = steps.iter().map(|s| s.eta_y_sq).sum::<f64>() + osc_init_sq;
        let jumps: f64 = steps.iter().map(|s| s.jump_sq).sum();
        let time_audit = steps.iter().map(|s| s.time_audit).fold(0.0, f64::max);
        Self {
            steps,
            osc_init_sq,
            eta_y_sq,
            eta_ey_sq: eta_y_sq + jumps,
            time_audit,
            mode,
        }
    }

    pub fn eta_y(&self) -> f64 {
        self.eta_y_sq.sqrt()
    }

    pub fn eta_ey(&self) -> f64 {
        self.eta_ey_sq.sqrt()
    }

    pub fn jump_sq(&self) -> f64 {
        self.steps.iter().map(|s| s.jump_sq).sum()
    }
}
