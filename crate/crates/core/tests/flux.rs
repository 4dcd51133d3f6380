mod common;

use std::sync::Arc;

use heatflux::flux::{
    check_equilibration, equilibrate_step, normal_jump_audit, patch_objective, solve_patch_flux,
    telescoping_residual, FluxCache, PatchRhs,
};
use heatflux::harness::solve_config;
use heatflux::mesh::build_uniform_mesh;
use heatflux::reconstruction::{jump_factor, radau_coefficients, StepReconstruction};
use heatflux::solver::{solve, Discretization, TimePartition};
use heatflux::spaces::HpSpace;

const CONFIGS: [&str; 4] = [
    "n = 4; p = 1; q = 0; steps = 2",
    "n = 4; p = 2; q = 2; steps = 2",
    "problem = MS3; n = 4; p = 2; q = 1; steps = 2",
    "n = 4; p = 2; q = 1; steps = 3; schedule = 1:refine,2:coarsen",
];

#[test]
fn jump_coefficients() {
    assert!((jump_factor(0.3, 0) - 0.1).abs() < 1e-16);
    assert!((jump_factor(0.1, 2) - 3.0 / 350.0).abs() < 1e-16);
    for q in 0..5 {
        let tau = 0.37;
        let want = tau * (q as f64 + 1.0) / ((2 * q + 1) * (2 * q + 3)) as f64;
        assert!((jump_factor(tau, q) - want).abs() < 1e-15);
        assert!(radau_coefficients(tau, q).iter().all(|c| c.is_finite()));
    }
}

#[test]
fn local_sources_telescope() {
    for text in CONFIGS {
        let (_f, sol) = solve_config(&common::config(text)).unwrap();
        for n in 1..=sol.disc.n_steps() {
            let st = StepReconstruction::new(&sol, n).unwrap();
            let r = telescoping_residual(&sol, &st);
            assert!(r <= 1e-10, "{text}: step {n} telescoping {r:e}");
        }
    }
}

#[test]
fn flux_is_equilibrated_with_continuous_normal_trace() {
    for text in CONFIGS {
        let (_f, sol) = solve_config(&common::config(text)).unwrap();
        let mut cache = FluxCache::default();
        for n in 1..=sol.disc.n_steps() {
            let st = StepReconstruction::new(&sol, n).unwrap();
            let flux = equilibrate_step(&sol, &st, &mut cache).unwrap();
            let rep = check_equilibration(&sol, &st, &flux);
            assert!(
                rep.passed(),
                "{text}: step {n} equilibration {:e}",
                rep.max_ratio
            );
            let jump = normal_jump_audit(&sol, &flux, 50, 4, 7);
            assert!(jump <= 1e-10, "{text}: step {n} normal jump {jump:e}");
        }
    }
}

#[test]
fn patch_fluxes_minimise_the_objective() {
    let (_f, sol) = solve_config(&common::config("n = 4; p = 2; q = 1; steps = 1")).unwrap();
    let st = StepReconstruction::new(&sol, 1).unwrap();
    let flux = equilibrate_step(&sol, &st, &mut FluxCache::default()).unwrap();
    for pf in &flux.patches {
        let best = patch_objective(pf, &pf.modes);
        // Same divergence constraint, other flux data: feasible but not optimal.
        let mut other: PatchRhs = pf.rhs.clone();
        for (j, r) in other.flux.iter_mut().enumerate() {
            for (i, v) in r.iter_mut().enumerate() {
                *v += ((i * 31 + j * 7) % 11) as f64 * 1e-2 - 0.05;
            }
        }
        let cand = solve_patch_flux(&pf.factor, &other).unwrap();
        assert!(patch_objective(pf, &cand) >= best - 1e-12 * best.abs().max(1.0));
    }
}

#[test]
fn exact_solution_gives_minus_gradient() {
    let (_f, sol) = solve_config(&common::config(
        "problem = MS2; n = 2; steps = 2; p = 4; q = 1",
    ))
    .unwrap();
    let mut cache = FluxCache::default();
    let (mut sg, mut dv) = (Vec::new(), Vec::new());
    for n in 1..=2 {
        let st = StepReconstruction::new(&sol, n).unwrap();
        let flux = equilibrate_step(&sol, &st, &mut cache).unwrap();
        let quad = &sol.sources[n - 1].quad;
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for t in 0..quad.points.len() {
            for (k, &x) in quad.points[t].iter().enumerate() {
                flux.eval(t, x, &mut sg, &mut dv);
                for (s, u) in sg.iter().zip(st.samples.modes(t, k)) {
                    worst = worst.max((s[0] + u[1]).abs()).max((s[1] + u[2]).abs());
                    scale = scale.max(u[1].abs()).max(u[2].abs());
                }
            }
        }
        assert!(worst <= 1e-9 * scale, "step {n}: {worst:e} vs {scale:e}");
    }
}

#[test]
fn zero_data_gives_zero_flux() {
    let (forest, mesh) = build_uniform_mesh(4).unwrap();
    let space = Arc::new(HpSpace::uniform(Arc::new(mesh), 2).unwrap());
    let partition = TimePartition::uniform(1.0, 2, 1).unwrap();
    let disc = Arc::new(Discretization::new(&forest, partition, vec![space; 3]).unwrap());
    let sol = solve(disc, &|_, _| 0.0, &|_| 0.0).unwrap();
    let st = StepReconstruction::new(&sol, 2).unwrap();
    let flux = equilibrate_step(&sol, &st, &mut FluxCache::default()).unwrap();
    for pf in &flux.patches {
        assert!(pf.modes.iter().flatten().all(|&v| v == 0.0));
    }
}

#[test]
fn corrupted_flux_fails_equilibration() {
    let (_f, sol) = solve_config(&common::config("n = 4; p = 2; q = 1; steps = 1")).unwrap();
    let st = StepReconstruction::new(&sol, 1).unwrap();
    let mut flux = equilibrate_step(&sol, &st, &mut FluxCache::default()).unwrap();
    assert!(check_equilibration(&sol, &st, &flux).passed());
    flux.corrupt(0, 0, 0, 1e-3);
    assert!(!check_equilibration(&sol, &st, &flux).passed());
}
