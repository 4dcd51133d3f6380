//! Patchwise equilibrated fluxes: right-hand sides, decoupled per-mode
//! solves, the coupled space-time oracle and equilibration audits.

mod audit;
mod io;

use std::sync::Arc;

use faer::Mat;

pub use audit::{
    check_equilibration, normal_jump_audit, telescoping_residual, EquilibrationReport,
};
pub use io::{write_flux, write_flux_vtk};

use crate::basis::quadrature::gauss_legendre;
use crate::error::{Error, Result};
use crate::linalg::{norm, DenseLu};
use crate::reconstruction::StepReconstruction;
use crate::solver::DiscreteSolution;
use crate::spaces::{compatibility, PatchMixedSpace, SaddleFactor, SaddleSystem, FIXED};

/// Per-mode patch data: `(tau_j, v)` and `(g_j, q)`.
#[derive(Debug, Clone)]
pub struct PatchRhs {
    pub vertex: usize,
    pub interior: bool,
    pub flux: Vec<Vec<f64>>,
    pub pressure: Vec<Vec<f64>>,
    /// `(g_j, 1)` over the patch.
    pub mean: Vec<f64>,
    /// `||g_j||` over the patch.
    pub norm: Vec<f64>,
    /// Cosine between the pressure data and the constants.
    pub compatibility: Vec<f64>,
}

/// Assembles the patch data of vertex `a`; interior patches whose data is
/// not orthogonal to constants beyond `1e-9` are rejected.
pub fn build_patch_rhs(
    step: &StepReconstruction,
    quad: &crate::reconstruction::MeshQuadrature,
    a: usize,
    space: &PatchMixedSpace,
) -> Result<PatchRhs> {
    let patch = &step.patches[a];
    let proj = &step.data.projections[a];
    let q = step.q();
    let modes = q + 1;
    let np = space.n_local_pressure();
    let mut flux = vec![vec![0.0; space.n_flux]; modes];
    let mut pressure = vec![vec![0.0; space.n_pressure]; modes];
    let mut mean = vec![0.0; modes];
    let mut nrm = vec![0.0; modes];
    let (mut pv, mut mv, mut rv) = (Vec::new(), Vec::new(), Vec::new());
    let mut g = vec![0.0; modes];
    let mut tau = vec![[0.0; 2]; modes];
    for (i, &t) in patch.elements.iter().enumerate() {
        let hg = patch.hat_grad[i];
        let off = space.pressure_offset[i];
        let dofs = &space.flux_dofs[i];
        for (k, (&x, &w)) in quad.points[t].iter().zip(&quad.weights[t]).enumerate() {
            let psi = patch.hat_at(i, quad.rule.points[k]);
            proj.values(i, x, &mut pv);
            let u = step.samples.modes(t, k);
            for j in 0..modes {
                let gu = [u[j][1], u[j][2]];
                g[j] = psi * (pv[j] - step.dt(t, k, j)) - (hg[0] * gu[0] + hg[1] * gu[1]);
                tau[j] = [-psi * gu[0], -psi * gu[1]];
                mean[j] += w * g[j];
                nrm[j] += w * g[j] * g[j];
            }
            space.pressure_values(i, x, &mut mv);
            for j in 0..modes {
                let gw = w * g[j];
                for (m, &b) in mv.iter().enumerate().take(np) {
                    pressure[j][off + m] += gw * b;
                }
            }
            space.rtn[i].values(x, &mut rv);
            for (l, &d) in dofs.iter().enumerate() {
                if d == FIXED {
                    continue;
                }
                for j in 0..modes {
                    flux[j][d] += w * (tau[j][0] * rv[l][0] + tau[j][1] * rv[l][1]);
                }
            }
        }
    }
    let compat: Vec<f64> = pressure
        .iter()
        .map(|p| compatibility(&space_constant(space), p))
        .collect();
    if patch.is_interior() {
        if let Some((_, &c)) = compat.iter().enumerate().find(|(_, &c)| c > 1e-9) {
            return Err(Error::Compatibility {
                vertex: patch.vertex,
                relative: c,
            });
        }
    }
    Ok(PatchRhs {
        vertex: patch.vertex,
        interior: patch.is_interior(),
        flux,
        pressure,
        mean,
        norm: nrm.into_iter().map(f64::sqrt).collect(),
        compatibility: compat,
    })
}

fn space_constant(space: &PatchMixedSpace) -> Vec<f64> {
    let mut c = vec![0.0; space.n_pressure];
    for &o in &space.pressure_offset {
        c[o] = 1.0;
    }
    c
}

/// Decoupled solves, one per temporal mode, sharing one factorisation.
pub fn solve_patch_flux(factor: &SaddleFactor, rhs: &PatchRhs) -> Result<Vec<Vec<f64>>> {
    rhs.flux
        .iter()
        .zip(&rhs.pressure)
        .map(|(f, p)| factor.solve(f, p).map(|s| s.flux))
        .collect()
}

/// One-shot solve of the space-time saddle system with the temporal Gram
/// matrix computed by Gauss quadrature. Returns the flux per mode.
pub fn solve_patch_flux_spacetime(
    sys: &SaddleSystem,
    rhs: &PatchRhs,
    step: &StepReconstruction,
) -> Result<Vec<Vec<f64>>> {
    let modes = rhs.flux.len();
    let tb = &step.algebra.basis;
    let (gs, gw) = gauss_legendre(modes + 1);
    let mut gram = vec![vec![0.0; modes]; modes];
    for (&s, &w) in gs.iter().zip(&gw) {
        let phi = tb.orthonormal_values(modes - 1, tb.from_reference(s));
        for i in 0..modes {
            for k in 0..modes {
                gram[i][k] += 0.5 * tb.tau() * w * phi[i] * phi[k];
            }
        }
    }
    let nf = sys.n_flux();
    let np = sys.n_pressure();
    let nm = usize::from(sys.mean.is_some());
    let block = nf + np + nm;
    let n = block * modes;
    let mut k = Mat::<f64>::zeros(n, n);
    let mut b = vec![0.0; n];
    for i in 0..modes {
        for l in 0..modes {
            let c = gram[i][l];
            let (ri, cl) = (i * block, l * block);
            for r in 0..nf {
                for s in 0..nf {
                    k[(ri + r, cl + s)] = c * sys.mass[(r, s)];
                }
                for s in 0..np {
                    k[(ri + r, cl + nf + s)] = c * sys.div[(s, r)];
                    k[(ri + nf + s, cl + r)] = c * sys.div[(s, r)];
                }
            }
            if let Some(m) = &sys.mean {
                for s in 0..np {
                    k[(ri + nf + s, cl + nf + np)] = c * m[s];
                    k[(ri + nf + np, cl + nf + s)] = c * m[s];
                }
            }
            // time integrals of the data against phi_i
            for r in 0..nf {
                b[i * block + r] += c * rhs.flux[l][r];
            }
            for s in 0..np {
                b[i * block + nf + s] += c * rhs.pressure[l][s];
            }
        }
    }
    let x = DenseLu::new(&k)?.solve(&b);
    Ok((0..modes)
        .map(|i| x[i * block..i * block + nf].to_vec())
        .collect())
}

/// `sigma^{a,n}` of one patch.
#[derive(Clone)]
pub struct PatchFlux {
    pub vertex: usize,
    pub space: Arc<PatchMixedSpace>,
    pub factor: Arc<SaddleFactor>,
    /// Flux coefficients per temporal mode.
    pub modes: Vec<Vec<f64>>,
    /// Divergence coefficients per local element and mode, in the element's
    /// pressure basis.
    pub divergence: Vec<Vec<Vec<f64>>>,
    pub rhs: PatchRhs,
}

/// Factorised patch systems, reusable while the pair of spaces is unchanged.
#[derive(Default, Clone)]
pub struct FluxCache {
    key: Option<(usize, usize)>,
    systems: Vec<(Arc<PatchMixedSpace>, Arc<SaddleFactor>)>,
}

/// `sigma_htau` on one step, stored patchwise.
#[derive(Clone)]
pub struct StepFlux {
    pub n: usize,
    pub patches: Vec<PatchFlux>,
    /// `(patch, local element)` pairs per fine element.
    pub element_patches: Vec<Vec<(usize, usize)>>,
}

impl StepFlux {
    /// Flux and divergence modes at `x` in fine element `t`.
    pub fn eval(&self, t: usize, x: [f64; 2], sigma: &mut Vec<[f64; 2]>, div: &mut Vec<f64>) {
        let modes = self.patches.first().map_or(0, |p| p.modes.len());
        sigma.clear();
        sigma.resize(modes, [0.0; 2]);
        div.clear();
        div.resize(modes, 0.0);
        let (mut rv, mut pv) = (Vec::new(), Vec::new());
        for &(a, i) in &self.element_patches[t] {
            let pf = &self.patches[a];
            let sp = &pf.space;
            sp.rtn[i].values(x, &mut rv);
            sp.pressure_values(i, x, &mut pv);
            for (j, c) in pf.modes.iter().enumerate() {
                let s = sp.combine_flux(c, i, &rv);
                sigma[j][0] += s[0];
                sigma[j][1] += s[1];
                div[j] += pf.divergence[i][j]
                    .iter()
                    .zip(&pv)
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            }
        }
    }

    /// Perturbs one coefficient; used as a negative control.
    pub fn corrupt(&mut self, patch: usize, mode: usize, dof: usize, delta: f64) {
        let pf = &mut self.patches[patch];
        pf.modes[mode][dof] += delta;
        for i in 0..pf.space.elements.len() {
            pf.divergence[i][mode] = pf.space.divergence_coeffs(&pf.modes[mode], i);
        }
    }
}

/// Builds and solves every patch problem of step `n` in vertex order.
pub fn equilibrate_step(
    sol: &DiscreteSolution,
    step: &StepReconstruction,
    cache: &mut FluxCache,
) -> Result<StepFlux> {
    let n = step.n;
    let disc = &sol.disc;
    let tr = disc.transition(n);
    let key = (
        Arc::as_ptr(disc.space(n - 1)) as usize,
        Arc::as_ptr(disc.space(n)) as usize,
    );
    if cache.key != Some(key) || cache.systems.len() != step.patches.len() {
        cache.systems = step
            .patches
            .iter()
            .map(|p| {
                let sp = PatchMixedSpace::new(p, &tr.fine)?;
                let f = sp.assemble_saddle().factor()?;
                Ok((Arc::new(sp), Arc::new(f)))
            })
            .collect::<Result<_>>()?;
        cache.key = Some(key);
    }
    let quad = &sol.sources[n - 1].quad;
    let mut patches = Vec::with_capacity(step.patches.len());
    let mut element_patches = vec![Vec::new(); tr.fine.n_elements()];
    for (a, (sp, f)) in cache.systems.iter().enumerate() {
        let rhs = build_patch_rhs(step, quad, a, sp)?;
        let modes = solve_patch_flux(f, &rhs)?;
        for (i, &t) in step.patches[a].elements.iter().enumerate() {
            element_patches[t].push((a, i));
        }
        let divergence = (0..sp.elements.len())
            .map(|i| modes.iter().map(|c| sp.divergence_coeffs(c, i)).collect())
            .collect();
        patches.push(PatchFlux {
            vertex: a,
            space: sp.clone(),
            factor: f.clone(),
            modes,
            divergence,
            rhs,
        });
    }
    Ok(StepFlux {
        n,
        patches,
        element_patches,
    })
}

/// Objective `int ||v - tau||^2 - ||tau||^2` of a candidate flux, summed
/// over the modes.
pub fn patch_objective(pf: &PatchFlux, candidate: &[Vec<f64>]) -> f64 {
    candidate
        .iter()
        .zip(&pf.rhs.flux)
        .map(|(v, r)| pf.factor.system().objective(v, r))
        .sum()
}

/// Largest relative deviation between two per-mode coefficient sets.
pub fn max_deviation(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let scale = a
        .iter()
        .map(|v| norm(v))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
        / scale.max(1.0)
}
