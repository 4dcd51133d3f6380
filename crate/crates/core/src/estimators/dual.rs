//! Dual norms of one time step evaluated by Riesz lifts at Gauss times:
//! residual of `I u_htau`, temporal data oscillation, patch data
//! oscillation and, for manufactured problems, the error pieces of the
//! `Y` and localized `E_Y` norms.

use std::sync::Arc;

use super::riesz::{LocalSpace, ReferenceSpace};
use crate::basis::quadrature::gauss_legendre;
use crate::error::Result;
use crate::linalg::dot;
use crate::mesh::{Forest, Point};
use crate::reconstruction::{ModeSamples, Source, SourceMoments, StepReconstruction};
use crate::solver::DiscreteSolution;

/// Poincare constant `diam(Omega) / pi` of the unit square.
pub const POINCARE_UNIT_SQUARE: f64 = std::f64::consts::SQRT_2 / std::f64::consts::PI;

/// Exact solution fields needed for true errors.
pub trait ExactSolution: Sync {
    fn u(&self, x: Point, t: f64) -> f64;
    fn dt_u(&self, x: Point, t: f64) -> f64;
    fn grad_u(&self, x: Point, t: f64) -> [f64; 2];
}

/// Gauss times and weights on `[a, b]`.
pub fn time_rule(a: f64, b: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let (s, w) = gauss_legendre(points);
    let h = 0.5 * (b - a);
    (
        s.iter().map(|&s| a + h * (s + 1.0)).collect(),
        w.iter().map(|&w| w * h).collect(),
    )
}

/// True-error pieces of one step.
#[derive(Debug, Clone, Default)]
pub struct StepErrors {
    /// `int ||d_t (u - I u)||^2_{H^-1}`.
    pub dt_dual_sq: f64,
    /// `int ||grad (u - I u)||^2_K` per coarse element.
    pub grad_sq: Vec<f64>,
    /// `int ||d_t (u - I u)||^2_{H^-1(omega_a)}` per vertex (empty without
    /// local lifts).
    pub local_dt_sq: Vec<f64>,
}

/// Dual quantities of one step.
#[derive(Debug, Clone, Default)]
pub struct DualStep {
    /// `||R(I u)|_{I_n}||^2`.
    pub residual_sq: f64,
    /// Gauss nodes and weights at which `f - f_tau` is lifted.
    pub osc_nodes: Vec<f64>,
    pub osc_weights: Vec<f64>,
    /// Gram matrices of the lifts of `f - f_tau` at the nodes, in the
    /// `H^-1` inner product and in the scaled `L^2` (Poincare) product.
    pub osc_gram: Vec<Vec<f64>>,
    pub osc_gram_poincare: Vec<Vec<f64>>,
    /// `int ||f - Pi^a f||^2_{H^-1(omega_a)}` per vertex.
    pub patch_osc: Vec<f64>,
    pub errors: Option<StepErrors>,
}

impl DualStep {
    /// Lagrange weights of the oscillation nodes at time `t`.
    fn lagrange(&self, t: f64) -> Vec<f64> {
        let x = &self.osc_nodes;
        (0..x.len())
            .map(|k| {
                x.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &xj)| (t - xj) / (x[k] - xj))
                    .product()
            })
            .collect()
    }

    fn gram(&self, poincare: bool) -> &[Vec<f64>] {
        if poincare {
            &self.osc_gram_poincare
        } else {
            &self.osc_gram
        }
    }

    /// `||f(t) - f_tau(t)||^2` in the dual norm (or its Poincare bound),
    /// from the polynomial interpolant of the lifts in time.
    pub fn osc_tau_at(&self, t: f64, poincare: bool) -> f64 {
        let l = self.lagrange(t);
        let g = self.gram(poincare);
        let mut s = 0.0;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                s += l[i] * v * l[j];
            }
        }
        s.max(0.0)
    }

    /// `int_{I_n} ||f - f_tau||^2` in the dual norm (or its Poincare bound).
    pub fn osc_tau_sq(&self, poincare: bool) -> f64 {
        let g = self.gram(poincare);
        self.osc_weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * g[k][k])
            .sum::<f64>()
            .max(0.0)
    }
}

/// Gauss rules of one step: `q + 3 + extra` points for the residual and
/// error integrals, `q + 6 + extra` nodes for the lifts of `f - f_tau`.
#[derive(Debug, Clone)]
pub struct TimeRules {
    pub times: Vec<f64>,
    pub weights: Vec<f64>,
    pub osc_times: Vec<f64>,
    pub osc_weights: Vec<f64>,
}

impl TimeRules {
    pub fn new(a: f64, b: f64, q: usize, extra: usize) -> Self {
        let (times, weights) = time_rule(a, b, q + 3 + extra);
        let (osc_times, osc_weights) = time_rule(a, b, q + 6 + extra);
        Self {
            times,
            weights,
            osc_times,
            osc_weights,
        }
    }
}

/// Local lift spaces of the vertex patches of one step, reused while the
/// step meshes are unchanged.
#[derive(Default)]
pub struct LocalCache {
    key: Option<(usize, usize)>,
    pub spaces: Vec<LocalSpace>,
}

/// Per-step tabulation of `I u_htau` on the reference quadrature.
struct ReferenceSamples {
    /// Fine element of the common refinement per reference element.
    to_fine: Vec<usize>,
    /// Coarse element of `T^n` per reference element.
    to_coarse: Vec<usize>,
    /// `recon[e][k * (q + 2) + j]`.
    recon: Vec<Vec<[f64; 3]>>,
    /// `dt[e][k * (q + 1) + j]`.
    dt: Vec<Vec<f64>>,
    moments: SourceMoments,
}

impl ReferenceSamples {
    fn new(
        forest: &Forest,
        reference: &ReferenceSpace,
        sol: &DiscreteSolution,
        step: &StepReconstruction,
        f: Source,
    ) -> Result<Self> {
        let n = step.n;
        let tr = sol.disc.transition(n);
        let to_fine = forest.containment(&reference.mesh, &tr.fine)?;
        let to_prev: Vec<usize> = to_fine.iter().map(|&t| tr.to_prev[t]).collect();
        let to_coarse: Vec<usize> = to_fine.iter().map(|&t| tr.to_next[t]).collect();
        let samples = ModeSamples::new(sol, n, &reference.quad.points, &to_prev, &to_coarse);
        let q = step.q();
        let alg = &step.algebra;
        let mut recon = Vec::with_capacity(samples.data.len());
        let mut dt = Vec::with_capacity(samples.data.len());
        for e in 0..samples.data.len() {
            let np = samples.n_points(e);
            let mut r = Vec::with_capacity(np * (q + 2));
            let mut d = Vec::with_capacity(np * (q + 1));
            for k in 0..np {
                let (m, jmp) = (samples.modes(e, k), samples.jump(e, k));
                r.extend(alg.reconstruct(m, jmp));
                d.extend(alg.time_derivative(m, jmp).iter().map(|v| v[0]));
            }
            recon.push(r);
            dt.push(d);
        }
        let moments = SourceMoments::sample(f, reference.quad.clone(), &alg.basis, q);
        Ok(Self {
            to_fine,
            to_coarse,
            recon,
            dt,
            moments,
        })
    }
}

/// Values at the reference quadrature points at one time.
struct Snapshot {
    f: Vec<Vec<f64>>,
    f_tau: Vec<Vec<f64>>,
    iu: Vec<Vec<[f64; 3]>>,
    dt_iu: Vec<Vec<f64>>,
}

impl Snapshot {
    fn new(
        reference: &ReferenceSpace,
        rs: &ReferenceSamples,
        step: &StepReconstruction,
        f: Source,
        t: f64,
        with_solution: bool,
    ) -> Self {
        let q = step.q();
        let phi = step.algebra.basis.orthonormal_values(q + 1, t);
        let quad = &reference.quad;
        let mut snap = Snapshot {
            f: Vec::with_capacity(quad.points.len()),
            f_tau: Vec::with_capacity(quad.points.len()),
            iu: Vec::new(),
            dt_iu: Vec::new(),
        };
        for (e, pts) in quad.points.iter().enumerate() {
            snap.f.push(pts.iter().map(|&x| f(x, t)).collect());
            snap.f_tau.push(
                (0..pts.len())
                    .map(|k| rs.moments.value(e, k, &phi))
                    .collect(),
            );
            if with_solution {
                let mut iu = Vec::with_capacity(pts.len());
                let mut d = Vec::with_capacity(pts.len());
                for k in 0..pts.len() {
                    let r = &rs.recon[e][k * (q + 2)..(k + 1) * (q + 2)];
                    let mut v = [0.0; 3];
                    for (m, &p) in r.iter().zip(&phi) {
                        for c in 0..3 {
                            v[c] += p * m[c];
                        }
                    }
                    iu.push(v);
                    let dm = &rs.dt[e][k * (q + 1)..(k + 1) * (q + 1)];
                    d.push(dm.iter().zip(&phi).map(|(a, b)| a * b).sum());
                }
                snap.iu.push(iu);
                snap.dt_iu.push(d);
            }
        }
        snap
    }

    /// `f - f_tau` flattened over all points.
    fn oscillation(&self) -> Vec<f64> {
        self.f
            .iter()
            .zip(&self.f_tau)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y))
            .collect()
    }
}

/// Builds the local lift spaces of the patches of step `step.n`.
fn local_spaces(
    forest: &Forest,
    reference: &ReferenceSpace,
    sol: &DiscreteSolution,
    rs: &ReferenceSamples,
    step: &StepReconstruction,
    cache: &mut LocalCache,
) -> Result<()> {
    let tr = sol.disc.transition(step.n);
    let key = (
        Arc::as_ptr(&tr.fine) as usize,
        Arc::as_ptr(sol.disc.space(step.n)) as usize,
    );
    if cache.key == Some(key) && cache.spaces.len() == step.patches.len() {
        return Ok(());
    }
    let coarse = sol.disc.space(step.n).mesh();
    let mut members = vec![Vec::new(); coarse.n_vertices()];
    for (e, &k) in rs.to_coarse.iter().enumerate() {
        for &a in &coarse.triangles()[k] {
            members[a].push(e);
        }
    }
    cache.spaces = members
        .iter()
        .map(|els| LocalSpace::new(forest, reference, els))
        .collect::<Result<_>>()?;
    cache.key = Some(key);
    Ok(())
}

/// Options of a dual pass.
#[derive(Debug, Clone, Copy)]
pub struct DualOptions {
    pub extra_time_points: usize,
    /// Compute patch-local lifts.
    pub local: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn dual_step(
    forest: &Forest,
    reference: &ReferenceSpace,
    local_cache: &mut LocalCache,
    sol: &DiscreteSolution,
    step: &StepReconstruction,
    f: Source,
    exact: Option<&dyn ExactSolution>,
    opts: DualOptions,
) -> Result<DualStep> {
    let n = step.n;
    let (a, b) = sol.disc.partition.interval(n);
    let rules = TimeRules::new(a, b, step.q(), opts.extra_time_points);
    let rs = ReferenceSamples::new(forest, reference, sol, step, f)?;
    if opts.local {
        local_spaces(forest, reference, sol, &rs, step, local_cache)?;
    }
    let n_coarse = sol.disc.space(n).mesh().n_elements();
    let n_vertices = step.patches.len();
    let mut out = DualStep {
        patch_osc: if opts.local {
            vec![0.0; n_vertices]
        } else {
            Vec::new()
        },
        ..Default::default()
    };
    let mut errors = exact.map(|_| StepErrors {
        dt_dual_sq: 0.0,
        grad_sq: vec![0.0; n_coarse],
        local_dt_sq: if opts.local {
            vec![0.0; n_vertices]
        } else {
            Vec::new()
        },
    });
    let quad = &reference.quad;
    let mut pv = Vec::new();

    for (&t, &wt) in rules.times.iter().zip(&rules.weights) {
        let snap = Snapshot::new(reference, &rs, step, f, t, true);
        let load = reference.load(|e, k| {
            let iu = snap.iu[e][k];
            (snap.f[e][k] - snap.dt_iu[e][k], [-iu[1], -iu[2]])
        });
        out.residual_sq += wt * reference.dual_norm_sq(&load);

        if opts.local {
            let phi = step.algebra.basis.orthonormal_values(step.q(), t);
            for (va, ls) in local_cache.spaces.iter().enumerate() {
                let proj = &step.data.projections[va];
                let patch = &step.patches[va];
                let load = ls.load(reference, |e, k| {
                    let i = patch
                        .local_index(rs.to_fine[e])
                        .expect("reference element inside patch");
                    proj.values(i, quad.points[e][k], &mut pv);
                    let pi: f64 = pv.iter().zip(&phi).map(|(a, b)| a * b).sum();
                    (snap.f[e][k] - pi, [0.0; 2])
                });
                out.patch_osc[va] += wt * ls.dual_norm_sq(&load);
            }
        }

        if let (Some(ex), Some(err)) = (exact, errors.as_mut()) {
            let mut misfit: Vec<Vec<f64>> = Vec::with_capacity(quad.points.len());
            for (e, pts) in quad.points.iter().enumerate() {
                let mut m = Vec::with_capacity(pts.len());
                let mut g = 0.0;
                for (k, &x) in pts.iter().enumerate() {
                    m.push(ex.dt_u(x, t) - snap.dt_iu[e][k]);
                    let gu = ex.grad_u(x, t);
                    let iu = snap.iu[e][k];
                    g += quad.weights[e][k] * ((gu[0] - iu[1]).powi(2) + (gu[1] - iu[2]).powi(2));
                }
                err.grad_sq[rs.to_coarse[e]] += wt * g;
                misfit.push(m);
            }
            let load = reference.load(|e, k| (misfit[e][k], [0.0; 2]));
            err.dt_dual_sq += wt * reference.dual_norm_sq(&load);
            if opts.local {
                for (va, ls) in local_cache.spaces.iter().enumerate() {
                    let load = ls.load(reference, |e, k| (misfit[e][k], [0.0; 2]));
                    err.local_dt_sq[va] += wt * ls.dual_norm_sq(&load);
                }
            }
        }
    }
    let weights: Vec<f64> = quad.weights.iter().flatten().copied().collect();
    let (mut loads, mut lifts, mut diffs) = (Vec::new(), Vec::new(), Vec::new());
    for &t in &rules.osc_times {
        let snap = Snapshot::new(reference, &rs, step, f, t, false);
        let load = reference.load(|e, k| (snap.f[e][k] - snap.f_tau[e][k], [0.0; 2]));
        lifts.push(reference.lift(&load));
        loads.push(load);
        diffs.push(snap.oscillation());
    }
    let c2 = POINCARE_UNIT_SQUARE * POINCARE_UNIT_SQUARE;
    let m = rules.osc_times.len();
    out.osc_gram = vec![vec![0.0; m]; m];
    out.osc_gram_poincare = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            // symmetrised against round-off
            out.osc_gram[i][j] = 0.5 * (dot(&lifts[i], &loads[j]) + dot(&lifts[j], &loads[i]));
            out.osc_gram_poincare[i][j] = c2
                * weights
                    .iter()
                    .zip(&diffs[i])
                    .zip(&diffs[j])
                    .map(|((w, a), b)| w * a * b)
                    .sum::<f64>();
        }
    }
    out.osc_nodes = rules.osc_times.clone();
    out.osc_weights = rules.osc_weights.clone();
    out.errors = errors;
    Ok(out)
}
