use std::sync::Arc;

use heatflux::mesh::{build_uniform_mesh, vertex_patches, MeshLevel};
use heatflux::spaces::{HpSpace, PatchMixedSpace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mesh(n: usize) -> Arc<MeshLevel> {
    Arc::new(build_uniform_mesh(n).unwrap().1)
}

#[test]
fn single_interior_hat_stiffness() {
    let s = HpSpace::uniform(mesh(2), 1).unwrap();
    assert_eq!(s.n_dofs(), 1);
    let a = s.assemble_stiffness().unwrap().to_dense();
    assert!((a[(0, 0)] - 4.0).abs() < 1e-13);
}

#[test]
fn mass_of_constant_is_area() {
    for p in 1..=4 {
        let m = mesh(3);
        let n = m.n_elements();
        let s = HpSpace::unconstrained(m, vec![p; n]).unwrap();
        let one = s.constant_one();
        let mass = s.assemble_mass().unwrap();
        assert!((mass.bilinear(&one, &one) - 1.0).abs() < 1e-12, "p = {p}");
        let stiff = s.assemble_stiffness().unwrap();
        assert!(stiff.bilinear(&one, &one).abs() < 1e-12);
    }
}

#[test]
fn stiffness_reproduces_a_quadratic() {
    // u = x(1 - x) y(1 - y) lies in the p = 4 space; a(u, u) is known in closed form.
    let s = HpSpace::unconstrained(mesh(2), vec![4; 8]).unwrap();
    let u = |x: [f64; 2]| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
    let m = s.assemble_mass().unwrap();
    let b = s.assemble_load(u, 4);
    let c = m.cholesky().unwrap().solve(&b);
    let a = s.assemble_stiffness().unwrap();
    // int |grad u|^2 = 2 * int (1-2x)^2 dx * int y^2 (1-y)^2 dy = 2 * (1/3) * (1/30)
    assert!((a.bilinear(&c, &c) - 2.0 / 90.0).abs() < 1e-12);
}

#[test]
fn dimension_matches_count_for_mixed_degrees() {
    let m = mesh(4);
    let n = m.n_elements();
    for (dir, degrees) in [
        (true, (0..n).map(|t| 1 + t % 4).collect::<Vec<_>>()),
        (false, (0..n).map(|t| 1 + (t * 5) % 3).collect()),
        (true, vec![3; n]),
    ] {
        let s = if dir {
            HpSpace::new(m.clone(), degrees).unwrap()
        } else {
            HpSpace::unconstrained(m.clone(), degrees).unwrap()
        };
        assert_eq!(s.n_dofs(), s.expected_dim());
    }
    assert!(HpSpace::new(m.clone(), vec![0; n]).is_err());
    assert!(HpSpace::new(m, vec![1; n - 1]).is_err());
}

fn patch_spaces(n: usize) -> Vec<PatchMixedSpace> {
    let (mut f, coarse) = build_uniform_mesh(n).unwrap();
    let fine = f.refine_uniform(&coarse, 1).unwrap();
    let map = f.containment(&fine, &coarse).unwrap();
    let patches = vertex_patches(&coarse, &fine, &map, &vec![1; fine.n_elements()]).unwrap();
    patches
        .iter()
        .map(|p| PatchMixedSpace::new(p, &fine).unwrap())
        .collect()
}

#[test]
fn zero_flux_has_zero_divergence() {
    for sp in patch_spaces(2) {
        let sys = sp.assemble_saddle();
        let b0 = heatflux::linalg::mat_vec(&sys.div, &vec![0.0; sys.n_flux()]);
        assert!(b0.iter().all(|&v| v == 0.0));
        for i in 0..sys.n_flux() {
            for j in 0..i {
                assert!((sys.mass[(i, j)] - sys.mass[(j, i)]).abs() < 1e-14);
            }
        }
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Removes the constant component so that interior data is compatible.
fn compatible(g: &mut [f64], constant: &[f64]) {
    let c2: f64 = constant.iter().map(|c| c * c).sum();
    let gc: f64 = g.iter().zip(constant).map(|(a, b)| a * b).sum();
    for (gi, ci) in g.iter_mut().zip(constant) {
        *gi -= gc / c2 * ci;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn saddle_solution_is_feasible_and_optimal(seed in any::<u64>(), which in 0usize..9) {
        let spaces = patch_spaces(2);
        let sp = &spaces[which];
        let sys = sp.assemble_saddle();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = random_vec(&mut rng, sys.n_pressure());
        if sp.interior {
            compatible(&mut g, &sys.constant);
        }
        let rf = random_vec(&mut rng, sys.n_flux());
        let factor = sys.factor().unwrap();
        let opt = factor.solve(&rf, &g).unwrap();
        prop_assert!(opt.residual < 1e-12);
        let bs = heatflux::linalg::mat_vec(&sys.div, &opt.flux);
        let gn = heatflux::linalg::norm(&g);
        for (a, b) in bs.iter().zip(&g) {
            prop_assert!((a - b).abs() <= 1e-10 * gn.max(1.0));
        }
        let best = sys.objective(&opt.flux, &rf);
        for _ in 0..5 {
            // Another feasible point: same constraint, different flux data.
            let other = factor.solve(&random_vec(&mut rng, sys.n_flux()), &g).unwrap();
            prop_assert!(sys.objective(&other.flux, &rf) >= best - 1e-10 * best.abs().max(1.0));
        }
    }
}

#[test]
fn incompatible_interior_data_is_rejected() {
    let spaces = patch_spaces(2);
    let sp = spaces.iter().find(|s| s.interior).unwrap();
    let sys = sp.assemble_saddle();
    let rf = vec![0.0; sys.n_flux()];
    assert!(sys.solve(&rf, &sys.constant).is_err());
    assert!(sys.solve(&rf[1..], &sys.constant).is_err());
}
