use std::sync::Arc;
use std::time::Instant;

use super::config::{MeshAction, RunConfig};
use crate::error::{Error, Result};
use crate::estimators::{
    coarsening, dual_step, estimate_step, initial_oscillation, step_grams, DualOptions, DualStep,
    EstimatorReport, LocalCache, ProjectionCache, ReferenceSpace, RieszConfig,
};
use crate::flux::{
    check_equilibration, equilibrate_step, normal_jump_audit, EquilibrationReport, FluxCache,
};
use crate::mesh::{build_uniform_mesh, centroid, Forest, MeshLevel};
use crate::metrics::{
    endpoint_errors, infsup_gap, jump_bounds, local_efficiency, norm_equivalence, upper_bounds,
    Check, ErrorReport, ManufacturedProblem, StepErrorReport, RIESZ_BAND,
};
use crate::reconstruction::StepReconstruction;
use crate::solver::{solve, DiscreteSolution, Discretization, TimePartition};
use crate::spaces::HpSpace;

/// Fixed seed of the sampled normal-trace audit.
pub const AUDIT_SEED: u64 = 20_160_601;

/// Tolerated relative change of `eta_Y^2` under the audit time rule.
pub const TIME_AUDIT_TOL: f64 = crate::estimators::TIME_RULE_TOL;

/// Allowed relative inf-sup identity gap.
pub const INFSUP_TOL: f64 = 0.05;

/// Meshes `T^0 ..= T^N` of a schedule; unchanged steps share the `Arc`.
pub fn build_meshes(cfg: &RunConfig) -> Result<(Forest, Vec<Arc<MeshLevel>>)> {
    let (mut forest, base) = build_uniform_mesh(cfg.n)?;
    let mut meshes = vec![Arc::new(base)];
    for k in 1..=cfg.steps {
        let prev = meshes[k - 1].clone();
        let mut cur = prev.clone();
        for &(_, action) in cfg.schedule.iter().filter(|(s, _)| *s == k) {
            let all: Vec<usize> = (0..cur.n_elements()).collect();
            let next = match action {
                MeshAction::Refine => forest.refine(&cur, &all)?,
                MeshAction::RefineCorner => {
                    let marked: Vec<usize> = all
                        .into_iter()
                        .filter(|&t| {
                            let c = centroid(&cur.element_points(t));
                            c[0] <= 0.5 && c[1] <= 0.5
                        })
                        .collect();
                    forest.refine(&cur, &marked)?
                }
                MeshAction::Coarsen => forest.coarsen(&cur, &all)?,
            };
            cur = Arc::new(next);
        }
        meshes.push(cur);
    }
    Ok((forest, meshes))
}

/// Spaces on the schedule's meshes; spaces on a shared mesh are shared.
pub fn build_spaces(cfg: &RunConfig, meshes: &[Arc<MeshLevel>]) -> Result<Vec<Arc<HpSpace>>> {
    let mut out: Vec<Arc<HpSpace>> = Vec::with_capacity(meshes.len());
    for (k, m) in meshes.iter().enumerate() {
        if k > 0 && Arc::ptr_eq(m, &meshes[k - 1]) {
            out.push(out[k - 1].clone());
            continue;
        }
        let degrees = (0..m.n_elements())
            .map(|t| cfg.p.at(centroid(&m.element_points(t))[0]))
            .collect();
        out.push(Arc::new(HpSpace::new(m.clone(), degrees)?));
    }
    Ok(out)
}

/// Relative changes of the dual norms under reference-space enrichment.
#[derive(Debug, Clone)]
pub struct RieszAudit {
    pub base: RieszConfig,
    pub enriched: RieszConfig,
    /// `(quantity, step, norm on the base space, norm on the enriched space)`.
    pub entries: Vec<(String, usize, f64, f64)>,
    /// Largest relative change over entries above the absolute floor.
    pub max_change: f64,
    pub floor: f64,
}

impl RieszAudit {
    pub fn passed(&self) -> bool {
        self.max_change <= RIESZ_BAND
    }

    fn push(&mut self, name: &str, n: usize, base_sq: f64, enriched_sq: f64) {
        let (a, b) = (base_sq.max(0.0).sqrt(), enriched_sq.max(0.0).sqrt());
        if b > self.floor {
            self.max_change = self.max_change.max((b - a).abs() / b);
        }
        self.entries.push((name.to_string(), n, a, b));
    }

    fn compare(&mut self, n: usize, base: &DualStep, enriched: &DualStep) {
        self.push("residual", n, base.residual_sq, enriched.residual_sq);
        self.push(
            "osc_tau",
            n,
            base.osc_tau_sq(false),
            enriched.osc_tau_sq(false),
        );
        if !base.patch_osc.is_empty() {
            self.push(
                "patch_osc",
                n,
                base.patch_osc.iter().sum(),
                enriched.patch_osc.iter().sum(),
            );
        }
        if let (Some(a), Some(b)) = (&base.errors, &enriched.errors) {
            self.push("error_dt", n, a.dt_dual_sq, b.dt_dual_sq);
            if !a.local_dt_sq.is_empty() {
                self.push(
                    "local_error_dt",
                    n,
                    a.local_dt_sq.iter().sum(),
                    b.local_dt_sq.iter().sum(),
                );
            }
        }
    }
}

/// Everything produced by one experiment.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub hash: String,
    pub shape_ratio: f64,
    pub max_dofs: usize,
    pub equilibration: Vec<EquilibrationReport>,
    pub normal_jump: f64,
    pub estimators: EstimatorReport,
    pub errors: ErrorReport,
    pub checks: Vec<Check>,
    pub audit: Option<RieszAudit>,
    /// Per step, per coarse element.
    pub local_efficiency: Vec<Vec<f64>>,
    /// Per step.
    pub localization: Vec<f64>,
    pub infsup_gap: f64,
    pub seconds: f64,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        !self.checks.iter().any(Check::failed)
    }

    pub fn effectivity_ey(&self) -> f64 {
        self.estimators.eta_ey() / self.errors.ey()
    }

    pub fn effectivity_y(&self) -> f64 {
        self.estimators.eta_y() / self.errors.y()
    }

    pub fn max_local_efficiency(&self) -> f64 {
        self.local_efficiency
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }

    pub fn max_equilibration(&self) -> f64 {
        self.equilibration
            .iter()
            .map(|e| e.max_ratio)
            .fold(0.0, f64::max)
    }
}

/// Solves the configured problem.
pub fn solve_config(cfg: &RunConfig) -> Result<(Forest, DiscreteSolution)> {
    cfg.validate()?;
    let (forest, meshes) = build_meshes(cfg)?;
    let spaces = build_spaces(cfg, &meshes)?;
    let partition = TimePartition::uniform(cfg.t_final, cfg.steps, cfg.q)?;
    let disc = Arc::new(Discretization::new(&forest, partition, spaces)?);
    let problem = ManufacturedProblem::new(cfg.problem, cfg.t_final);
    let f = move |x: [f64; 2], t: f64| problem.f(x, t);
    let u0 = move |x: [f64; 2]| problem.u0(x);
    let sol = solve(disc, &f, &u0)?;
    Ok((forest, sol))
}

/// Solve, reconstruct, equilibrate, estimate and verify.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutput> {
    let clock = Instant::now();
    let (mut forest, sol) = solve_config(cfg)?;
    let problem = ManufacturedProblem::new(cfg.problem, cfg.t_final);
    let f = move |x: [f64; 2], t: f64| problem.f(x, t);
    let disc = sol.disc.clone();
    let meshes: Vec<&MeshLevel> = disc.spaces.iter().map(|s| s.mesh().as_ref()).collect();
    let shape_ratio = meshes
        .iter()
        .map(|m| m.max_shape_ratio())
        .fold(0.0, f64::max);
    let max_dofs = disc.spaces.iter().map(|s| s.n_dofs()).max().unwrap_or(0);
    let pmax = disc
        .spaces
        .iter()
        .map(|s| s.max_degree())
        .max()
        .unwrap_or(1);

    let reference = ReferenceSpace::new(&mut forest, &meshes, pmax, cfg.riesz)?;
    let enriched_cfg = RieszConfig {
        refinements: cfg.riesz.refinements + 1,
        ..cfg.riesz
    };
    let enriched = if cfg.riesz_audit {
        Some(ReferenceSpace::new(
            &mut forest,
            &meshes,
            pmax,
            enriched_cfg,
        )?)
    } else {
        None
    };
    let mut audit = enriched.as_ref().map(|_| RieszAudit {
        base: cfg.riesz,
        enriched: enriched_cfg,
        entries: Vec::new(),
        max_change: 0.0,
        floor: 1e-9,
    });

    let opts = DualOptions {
        extra_time_points: cfg.time_points,
        local: cfg.local,
    };
    let (mut fcache, mut pcache) = (FluxCache::default(), ProjectionCache::default());
    let (mut lcache, mut lcache_enriched) = (LocalCache::default(), LocalCache::default());
    let mut equilibration = Vec::new();
    let mut normal_jump: f64 = 0.0;
    let mut steps = Vec::new();
    let mut step_errors = Vec::new();
    for n in 1..=disc.n_steps() {
        let mut run = || -> Result<()> {
            let step = StepReconstruction::new(&sol, n)?;
            let flux = equilibrate_step(&sol, &step, &mut fcache)?;
            equilibration.push(check_equilibration(&sol, &step, &flux));
            normal_jump =
                normal_jump.max(normal_jump_audit(&sol, &flux, 40, 4, AUDIT_SEED + n as u64));
            let grams = step_grams(&sol, &step, &flux);
            let coars = coarsening(&sol, n, &mut pcache)?;
            let dual = dual_step(
                &forest,
                &reference,
                &mut lcache,
                &sol,
                &step,
                &f,
                Some(&problem),
                opts,
            )?;
            if let (Some(en), Some(au)) = (enriched.as_ref(), audit.as_mut()) {
                let d2 = dual_step(
                    &forest,
                    en,
                    &mut lcache_enriched,
                    &sol,
                    &step,
                    &f,
                    Some(&problem),
                    opts,
                )?;
                au.compare(n, &dual, &d2);
            }
            let est = estimate_step(
                &step,
                &grams,
                &dual,
                coars,
                cfg.oscillation,
                cfg.time_points,
            );
            let errs = dual
                .errors
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("missing error pieces".into()))?;
            step_errors.push(StepErrorReport::new(&est, errs, disc.space(n).mesh()));
            steps.push(est);
            Ok(())
        };
        run().map_err(|e| e.at_step(n))?;
    }
    let u0 = move |x: [f64; 2]| problem.u0(x);
    let estimators = EstimatorReport::new(steps, initial_oscillation(&sol, &u0), cfg.oscillation);
    let (final_sq, init_sq) = endpoint_errors(&sol, &problem);
    let errors = ErrorReport::new(step_errors, final_sq, init_sq);

    let step_meshes: Vec<&MeshLevel> = (1..=disc.n_steps())
        .map(|n| disc.space(n).mesh().as_ref())
        .collect();
    let local_eff = local_efficiency(&estimators, &errors, &step_meshes);
    let localization: Vec<f64> = errors
        .steps
        .iter()
        .filter_map(|s| s.localization_ratio())
        .collect();
    let gap = infsup_gap(&estimators, &errors);

    let mut checks = Vec::new();
    for e in &equilibration {
        checks.push(Check::inequality(
            format!("equilibration[{}]", e.n),
            e.max_ratio,
            e.tolerance,
            0.0,
        ));
    }
    checks.push(Check::inequality("normal_trace", normal_jump, 1e-9, 0.0));
    checks.extend(upper_bounds(&estimators, &errors));
    checks.extend(jump_bounds(&estimators));
    checks.extend(norm_equivalence(&estimators, &errors));
    let ortho = estimators
        .steps
        .iter()
        .map(|s| s.coarsening.orthogonality_gap)
        .fold(0.0, f64::max);
    checks.push(Check::inequality(
        "projection_orthogonality",
        ortho,
        1e-10,
        0.0,
    ));
    let jump_id = estimators
        .steps
        .iter()
        .map(|s| s.jump_identity_gap)
        .fold(0.0, f64::max);
    checks.push(Check::inequality("jump_identity", jump_id, 1e-11, 0.0));
    checks.push(Check::inequality("infsup_gap", gap, INFSUP_TOL, 0.0));
    checks.push(Check::inequality(
        "time_audit",
        estimators.time_audit,
        TIME_AUDIT_TOL,
        0.0,
    ));
    match &audit {
        Some(a) => checks.push(
            Check::inequality("riesz_audit", a.max_change, RIESZ_BAND, 0.0).with_note(format!(
                "r {} -> {}",
                a.base.refinements, a.enriched.refinements
            )),
        ),
        None => checks.push(Check::skipped("riesz_audit", "disabled")),
    }

    Ok(RunOutput {
        config: cfg.clone(),
        hash: cfg.hash(),
        shape_ratio,
        max_dofs,
        equilibration,
        normal_jump,
        estimators,
        errors,
        checks,
        audit,
        local_efficiency: local_eff,
        localization,
        infsup_gap: gap,
        seconds: clock.elapsed().as_secs_f64(),
    })
}
