use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::StepFlux;
use crate::basis::quadrature::gauss_legendre;
use crate::reconstruction::StepReconstruction;
use crate::solver::DiscreteSolution;

#[derive(Debug, Clone)]
pub struct EquilibrationReport {
    pub n: usize,
    /// `max |d/dt I u + div sigma - f_htau| / scale` over all points.
    pub max_ratio: f64,
    pub max_abs: f64,
    /// Worst ratio per element of `T^n`.
    pub per_element: Vec<f64>,
    pub tolerance: f64,
}

impl EquilibrationReport {
    pub fn passed(&self) -> bool {
        self.max_ratio <= self.tolerance
    }
}

/// Pointwise check of `d/dt I u_htau + div sigma_htau = f_htau` at the step
/// quadrature points and `q + 1` Gauss times, relative to
/// `||f_htau||_{K x I_n} + ||d/dt I u_htau||_{K x I_n}`.
pub fn check_equilibration(
    sol: &DiscreteSolution,
    step: &StepReconstruction,
    flux: &StepFlux,
) -> EquilibrationReport {
    let n = step.n;
    let tr = sol.disc.transition(n);
    let quad = &sol.sources[n - 1].quad;
    let q = step.q();
    let nk = sol.disc.space(n).mesh().n_elements();
    let mut fsq = vec![0.0; nk];
    let mut dsq = vec![0.0; nk];
    for t in 0..tr.fine.n_elements() {
        let kk = tr.to_next[t];
        for (k, &w) in quad.weights[t].iter().enumerate() {
            for j in 0..=q {
                fsq[kk] += w * step.data.moment(t, k, j).powi(2);
                dsq[kk] += w * step.dt(t, k, j).powi(2);
            }
        }
    }
    let scale: Vec<f64> = fsq
        .iter()
        .zip(&dsq)
        .map(|(a, b)| a.sqrt() + b.sqrt() + f64::EPSILON)
        .collect();
    let tb = &step.algebra.basis;
    let (gs, _) = gauss_legendre(q + 1);
    let phis: Vec<Vec<f64>> = gs
        .iter()
        .map(|&s| tb.orthonormal_values(q, tb.from_reference(s)))
        .collect();
    let mut per_element = vec![0.0f64; nk];
    let mut max_abs = 0.0f64;
    let (mut sg, mut dv) = (Vec::new(), Vec::new());
    let mut modes = vec![0.0; q + 1];
    for t in 0..tr.fine.n_elements() {
        let kk = tr.to_next[t];
        for (k, &x) in quad.points[t].iter().enumerate() {
            flux.eval(t, x, &mut sg, &mut dv);
            for j in 0..=q {
                modes[j] = step.dt(t, k, j) + dv[j] - step.data.moment(t, k, j);
            }
            for phi in &phis {
                let r: f64 = modes.iter().zip(phi).map(|(a, b)| a * b).sum::<f64>().abs();
                max_abs = max_abs.max(r);
                per_element[kk] = per_element[kk].max(r / scale[kk]);
            }
        }
    }
    EquilibrationReport {
        n,
        max_ratio: per_element.iter().copied().fold(0.0, f64::max),
        max_abs,
        per_element,
        tolerance: 1e-9,
    }
}

/// Largest normal-component jump of `sigma_htau` across up to `edges`
/// random interior edges of the common refinement, `points` per edge, over
/// all temporal modes; relative to `max(1, max |sigma|)`.
pub fn normal_jump_audit(
    sol: &DiscreteSolution,
    flux: &StepFlux,
    edges: usize,
    points: usize,
    seed: u64,
) -> f64 {
    let fine = &sol.disc.transition(flux.n).fine;
    let interior: Vec<usize> = (0..fine.n_edges())
        .filter(|&e| !fine.is_boundary_edge(e))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = sample(&mut rng, interior.len(), edges.min(interior.len()));
    let (mut s0, mut s1, mut d) = (Vec::new(), Vec::new(), Vec::new());
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for idx in picked.iter() {
        let e = interior[idx];
        let [a, b] = fine.edges()[e];
        let (pa, pb) = (fine.vertices()[a], fine.vertices()[b]);
        let tang = [pb[0] - pa[0], pb[1] - pa[1]];
        let len = (tang[0] * tang[0] + tang[1] * tang[1]).sqrt();
        let nrm = [tang[1] / len, -tang[0] / len];
        let [Some(t0), Some(t1)] = fine.edge_triangles(e) else {
            continue;
        };
        for i in 0..points {
            let s = (i as f64 + 1.0) / (points as f64 + 1.0);
            let x = [pa[0] + s * tang[0], pa[1] + s * tang[1]];
            flux.eval(t0, x, &mut s0, &mut d);
            flux.eval(t1, x, &mut s1, &mut d);
            for (u, v) in s0.iter().zip(&s1) {
                scale = scale.max(u[0].abs().max(u[1].abs()));
                worst = worst.max(((u[0] - v[0]) * nrm[0] + (u[1] - v[1]) * nrm[1]).abs());
            }
        }
    }
    worst / scale
}

/// `max |sum_a g^{a,n} - (f_htau - d/dt I u_htau)|` at the step quadrature
/// points, relative to the largest value of the right-hand side.
pub fn telescoping_residual(sol: &DiscreteSolution, step: &StepReconstruction) -> f64 {
    let n = step.n;
    let fine = &sol.disc.transition(n).fine;
    let quad = &sol.sources[n - 1].quad;
    let q = step.q();
    let mut sum: Vec<Vec<f64>> = quad
        .points
        .iter()
        .map(|p| vec![0.0; p.len() * (q + 1)])
        .collect();
    let mut pv = Vec::new();
    for (patch, proj) in step.patches.iter().zip(&step.data.projections) {
        for (i, &t) in patch.elements.iter().enumerate() {
            let hg = patch.hat_grad[i];
            for (k, &x) in quad.points[t].iter().enumerate() {
                let psi = patch.hat_at(i, quad.rule.points[k]);
                proj.values(i, x, &mut pv);
                let u = step.samples.modes(t, k);
                for j in 0..=q {
                    sum[t][k * (q + 1) + j] +=
                        psi * (pv[j] - step.dt(t, k, j)) - (hg[0] * u[j][1] + hg[1] * u[j][2]);
                }
            }
        }
    }
    let mut worst = 0.0f64;
    let mut scale = f64::MIN_POSITIVE;
    for t in 0..fine.n_elements() {
        for k in 0..quad.points[t].len() {
            for j in 0..=q {
                let target = step.data.moment(t, k, j) - step.dt(t, k, j);
                scale = scale.max(target.abs());
                worst = worst.max((sum[t][k * (q + 1) + j] - target).abs());
            }
        }
    }
    worst / scale.max(1.0)
}
