//! Acceptance suite: one PASS/FAIL line per criterion, exit code 1 on any
//! failure. Runs single-threaded; expect a few minutes in total.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{config, euler_deviation, identities};
use heatflux::flux::{check_equilibration, equilibrate_step, FluxCache};
use heatflux::harness::{
    convergence_study, run_experiment, solve_config, write_summary, write_verification_csv,
    RunConfig, RunOutput, StudyTable, Sweep, SweepKind,
};
use heatflux::metrics::RIESZ_BAND;
use heatflux::reconstruction::StepReconstruction;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn run(cfg: &RunConfig) -> RunOutput {
    run_experiment(cfg).unwrap_or_else(|e| panic!("{}: {e}", cfg.to_text().replace('\n', "; ")))
}

fn check_passed(out: &RunOutput, prefix: &str) -> bool {
    out.checks
        .iter()
        .filter(|c| c.name.starts_with(prefix))
        .all(|c| !c.failed())
}

fn is_jump_bound(name: &str) -> bool {
    ["jump_a[", "jump_b[", "jump_total["]
        .iter()
        .any(|p| name.starts_with(p))
}

fn label(cfg: &RunConfig) -> String {
    format!("n={} N={} p={} q={}", cfg.n, cfg.steps, cfg.p, cfg.q)
}

/// The MS1 grid of the equilibration criterion; every run is reused by the
/// bound criteria.
fn grid() -> (Vec<RunOutput>, f64) {
    let clock = Instant::now();
    let mut outs = Vec::new();
    for n in [8, 16] {
        for steps in [4, 8] {
            for p in 1..=3 {
                for q in 0..=2 {
                    let cfg = config(&format!(
                        "n = {n}; steps = {steps}; p = {p}; q = {q}; local = false; riesz_audit = false"
                    ));
                    outs.push(run(&cfg));
                }
            }
        }
    }
    (outs, clock.elapsed().as_secs_f64())
}

fn equilibration(grid: &[RunOutput], seconds: f64) -> Outcome {
    let worst = grid
        .iter()
        .max_by(|a, b| a.max_equilibration().total_cmp(&b.max_equilibration()))
        .unwrap();
    let ok = grid.iter().all(|o| o.max_equilibration() <= 1e-9) && seconds < 300.0;
    Outcome::new(
        ok,
        format!(
            "{} runs, max residual/scale {:.2e} ({}), {:.0} s",
            grid.len(),
            worst.max_equilibration(),
            label(&worst.config),
            seconds
        ),
    )
}

fn upper_bound(grid: &[RunOutput]) -> Outcome {
    let min_ey = grid
        .iter()
        .map(RunOutput::effectivity_ey)
        .fold(f64::MAX, f64::min);
    let min_y = grid
        .iter()
        .map(RunOutput::effectivity_y)
        .fold(f64::MAX, f64::min);
    let ok = min_ey >= 1.0 - RIESZ_BAND && min_y >= 1.0 - RIESZ_BAND;
    Outcome::new(ok, format!("min effectivity E_Y {min_ey:.4}, Y {min_y:.4}"))
}

fn study(
    base: &str,
    kind: SweepKind,
    values: Vec<usize>,
    couple: bool,
) -> (StudyTable, Vec<RunOutput>) {
    let mut sweep = Sweep::new(kind, values);
    sweep.couple_time = couple;
    let mut outs = Vec::new();
    let table = convergence_study(&config(base), &sweep, |o| outs.push(o.clone())).unwrap();
    (table, outs)
}

fn sweep_summary(t: &StudyTable) -> (bool, String) {
    let eff = |r: &heatflux::harness::StudyRow| r.effectivity_ey().max(r.effectivity_y());
    let max_eff = t.rows.iter().map(eff).fold(0.0, f64::max);
    let locals: Vec<f64> = t.rows.iter().map(|r| r.max_local_efficiency).collect();
    let lmax = locals.iter().copied().fold(0.0, f64::max);
    let lmin = locals.iter().copied().fold(f64::MAX, f64::min);
    let (sey, sy) = (t.effectivity_spread(true), t.effectivity_spread(false));
    let ok = max_eff <= 10.0
        && sey <= 2.0
        && sy <= 2.0
        && lmax <= 50.0
        && lmin > 0.0
        && lmax / lmin <= 2.0;
    (
        ok,
        format!(
            "{}-sweep max eff {max_eff:.3} spread E_Y {sey:.3} Y {sy:.3} local max {lmax:.3} (spread {:.2})",
            t.sweep.kind,
            lmax / lmin
        ),
    )
}

fn efficiency(p: &StudyTable, q: &StudyTable) -> Outcome {
    let (a, da) = sweep_summary(p);
    let (b, db) = sweep_summary(q);
    Outcome::new(a && b, format!("{da}; {db}"))
}

fn exactness() -> Outcome {
    let cfg = config("problem = MS2; n = 2; steps = 2; p = 4; q = 1");
    let out = run(&cfg);
    let e = &out.errors;
    let errs = [e.y(), e.ey(), e.final_sq.sqrt(), e.init_sq.sqrt()];
    let flux: f64 = out
        .estimators
        .steps
        .iter()
        .map(|s| s.flux_sq())
        .sum::<f64>()
        .sqrt();
    let jump = out.estimators.jump_sq().sqrt();
    let worst = errs
        .into_iter()
        .chain([flux, jump, out.estimators.eta_y(), out.estimators.eta_ey()])
        .fold(0.0, f64::max);

    let (_forest, sol) = solve_config(&cfg).unwrap();
    let st = StepReconstruction::new(&sol, 1).unwrap();
    let mut flux_step = equilibrate_step(&sol, &st, &mut FluxCache::default()).unwrap();
    let clean = check_equilibration(&sol, &st, &flux_step);
    flux_step.corrupt(0, 0, 0, 1e-3);
    let corrupted = check_equilibration(&sol, &st, &flux_step);
    let ok = worst <= 1e-8 && out.passed() && clean.passed() && !corrupted.passed();
    Outcome::new(
        ok,
        format!(
            "max error/estimator {worst:.2e}, checks {}, corrupted flux residual {:.2e} ({})",
            if out.passed() { "PASS" } else { "FAIL" },
            corrupted.max_ratio,
            if corrupted.passed() {
                "not flagged"
            } else {
                "flagged"
            }
        ),
    )
}

fn algebra() -> Outcome {
    let mut worst = 0.0f64;
    let mut at = String::new();
    let runs = [
        "n = 4; p = 2; q = 0; steps = 3",
        "n = 4; p = 2; q = 1; steps = 3",
        "n = 4; p = 3; q = 2; steps = 3",
        "n = 4; p = 2; q = 3; steps = 2",
        "n = 4; p = 2; q = 1; steps = 3; schedule = 1:refine,2:coarsen",
        "n = 4; p = 1,3; q = 2; steps = 2; schedule = 2:refine-corner",
        "problem = MS3; n = 4; p = 2; q = 1; steps = 2",
    ];
    for text in runs {
        let (_forest, sol) = solve_config(&config(text)).unwrap();
        let m = identities(&sol).max();
        if m > worst {
            worst = m;
            at = text.to_string();
        }
    }
    let euler = [
        "n = 8; p = 1; q = 0; steps = 4",
        "n = 4; p = 3; q = 0; steps = 3; schedule = 2:refine,3:coarsen",
    ]
    .iter()
    .map(|t| euler_deviation(&config(t)))
    .fold(0.0, f64::max);
    Outcome::new(
        worst <= 1e-11 && euler <= 1e-11,
        format!("identities max {worst:.2e} ({at}), implicit Euler {euler:.2e}"),
    )
}

fn coarsening_run() -> RunOutput {
    run(&config(
        "n = 8; steps = 4; p = 2; q = 1; schedule = 1:refine,2:coarsen; local = false",
    ))
}

fn equivalence(grid: &[RunOutput], coarse: &RunOutput) -> Outcome {
    let lower = grid
        .iter()
        .chain([coarse])
        .all(|o| check_passed(o, "equivalence_lower"));
    let upper = grid
        .iter()
        .chain([coarse])
        .all(|o| check_passed(o, "equivalence_upper"));
    let refine = run(&config(
        "n = 8; steps = 4; p = 2; q = 1; schedule = 2:refine; local = false; riesz_audit = false",
    ));
    let theta = refine
        .estimators
        .steps
        .iter()
        .map(|s| s.coarsening.theta)
        .fold(0.0, f64::max);
    let factor = refine
        .checks
        .iter()
        .find(|c| c.name == "equivalence_theta")
        .map(|c| (c.right / refine.errors.y_sq, !c.failed()));
    let (f, fok) = factor.unwrap_or((f64::NAN, false));
    let ok = lower && upper && theta <= 1e-10 && (f - 3.0).abs() <= 1e-9 && fok;
    Outcome::new(
        ok,
        format!(
            "lower {}, upper {} on {} runs; refinement theta {theta:.2e} factor {f:.6} {}",
            if lower { "ok" } else { "violated" },
            if upper { "ok" } else { "violated" },
            grid.len() + 1,
            if fok { "holds" } else { "violated" }
        ),
    )
}

fn jumps(grid: &[RunOutput], coarse: &RunOutput) -> Outcome {
    let ok = grid
        .iter()
        .chain([coarse])
        .flat_map(|o| o.checks.iter().filter(|c| is_jump_bound(&c.name)))
        .all(|c| !c.failed());
    let eta_c = coarse
        .estimators
        .steps
        .iter()
        .map(|s| s.coarsening.eta_c_sq)
        .fold(0.0, f64::max)
        .sqrt();
    let (worst, at) = grid
        .iter()
        .chain([coarse])
        .flat_map(|o| {
            o.checks
                .iter()
                .filter(|c| is_jump_bound(&c.name) && c.right > 0.0)
                .map(move |c| {
                    (
                        c.slack() / c.right,
                        format!("{} {}", c.name, label(&o.config)),
                    )
                })
        })
        .fold(
            (f64::MAX, String::new()),
            |a, b| if b.0 < a.0 { b } else { a },
        );
    Outcome::new(
        ok && eta_c > 0.0 && coarse.max_equilibration() <= 1e-9,
        format!("min relative slack {worst:.3e} ({at}), coarsening eta_C {eta_c:.3e}"),
    )
}

fn orders(h: &StudyTable, tau: &StudyTable, seconds: f64) -> Outcome {
    let mut ok = seconds < 600.0;
    let mut parts = Vec::new();
    for t in [h, tau] {
        let ords: Vec<f64> = t.rows.iter().filter_map(|r| r.order_y).collect();
        let effs: Vec<f64> = t.rows.iter().map(|r| r.effectivity_y()).collect();
        ok &= !ords.is_empty() && ords.iter().all(|o| (o - 1.0).abs() <= 0.3);
        ok &= effs.iter().all(|&e| (1.0 - RIESZ_BAND..=10.0).contains(&e));
        parts.push(format!(
            "{}: orders {} eff_Y {}",
            t.sweep.kind,
            ords.iter()
                .map(|o| format!("{o:.2}"))
                .collect::<Vec<_>>()
                .join(" "),
            effs.iter()
                .map(|e| format!("{e:.3}"))
                .collect::<Vec<_>>()
                .join(" ")
        ));
    }
    Outcome::new(ok, format!("{} ({seconds:.0} s)", parts.join("; ")))
}

fn audit(runs: &[&RunOutput]) -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for out in runs {
        let Some(a) = &out.audit else {
            ok = false;
            continue;
        };
        worst = worst.max(a.max_change);
        ok &= a.passed();
        let (mut s, mut v) = (Vec::new(), Vec::new());
        write_summary(out, &mut s).unwrap();
        write_verification_csv(out, &mut v).unwrap();
        let (s, v) = (String::from_utf8(s).unwrap(), String::from_utf8(v).unwrap());
        ok &= s.lines().any(|l| l.starts_with("riesz_audit pass"));
        ok &= v.lines().any(|l| l.starts_with("# riesz_audit = pass"));
    }
    Outcome::new(
        ok,
        format!(
            "{} audited runs, max relative change {worst:.3e}",
            runs.len()
        ),
    )
}

fn main() -> ExitCode {
    let clock = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |id: usize, name: &'static str, o: Outcome| {
        println!(
            "criterion {id} {:<22} {} {}",
            name,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o));
    };

    let (grid, grid_seconds) = grid();
    report(1, "equilibration", equilibration(&grid, grid_seconds));
    report(2, "upper bounds", upper_bound(&grid));

    let base = "n = 8; steps = 8; riesz_audit = true; local = true";
    let (p, p_runs) = study(
        &format!("{base}; q = 2"),
        SweepKind::P,
        vec![1, 2, 3, 4],
        false,
    );
    let (q, q_runs) = study(
        &format!("{base}; p = 2"),
        SweepKind::Q,
        vec![0, 1, 2, 3],
        false,
    );
    report(3, "efficiency robustness", efficiency(&p, &q));

    report(4, "exactness control", exactness());
    report(5, "algebraic identities", algebra());

    let coarse = coarsening_run();
    report(6, "norm equivalence", equivalence(&grid, &coarse));
    report(7, "jump bounds", jumps(&grid, &coarse));

    let t = Instant::now();
    let (h, _) = study(
        "n = 4; steps = 4; p = 1; q = 0; local = false; riesz_audit = false",
        SweepKind::H,
        vec![4, 8, 16],
        true,
    );
    let (tau, _) = study(
        "n = 8; p = 3; q = 0; local = false; riesz_audit = false",
        SweepKind::Tau,
        vec![2, 4, 8, 16],
        false,
    );
    report(
        8,
        "convergence orders",
        orders(&h, &tau, t.elapsed().as_secs_f64()),
    );

    // Audited: both robustness sweeps, the coarsening run and rough initial data.
    let rough = run(&config(
        "problem = MS3; n = 8; steps = 4; p = 2; q = 1; local = false",
    ));
    let refs: Vec<&RunOutput> = p_runs
        .iter()
        .chain(&q_runs)
        .chain([&coarse, &rough])
        .collect();
    report(9, "riesz audit", audit(&refs));

    let failed = results.iter().filter(|(_, _, o)| !o.passed).count();
    println!(
        "acceptance: {} of {} criteria passed in {:.0} s",
        results.len() - failed,
        results.len(),
        clock.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
