use super::data::SourceMoments;
use super::projection::{assemble_f_htau, project_patch_data, DataApproximation};
use super::radau::{ModeSamples, TemporalAlgebra, Vg};
use crate::error::Result;
use crate::mesh::{vertex_patches, Patch};
use crate::solver::DiscreteSolution;

/// Everything the flux and the estimators need on one time step: temporal
/// algebra, samples of `u_htau`, `I u_htau` and `d/dt I u_htau` at the step
/// quadrature points, vertex patches of `T^n` on the common refinement and
/// the data approximations.
#[derive(Debug, Clone)]
pub struct StepReconstruction {
    pub n: usize,
    pub algebra: TemporalAlgebra,
    pub samples: ModeSamples,
    /// `dt[t][k * (q + 1) + j]`: modes of `d/dt I u_htau`.
    pub dt: Vec<Vec<f64>>,
    pub patches: Vec<Patch>,
    pub data: DataApproximation,
}

impl StepReconstruction {
    pub fn new(sol: &DiscreteSolution, n: usize) -> Result<Self> {
        let disc = &sol.disc;
        let q = disc.partition.degree(n);
        let algebra = TemporalAlgebra::new(disc.time_basis(n), q);
        let src: &SourceMoments = &sol.sources[n - 1];
        let samples = ModeSamples::on_step(sol, n, &src.quad.points);
        let dt = (0..samples.data.len())
            .map(|t| {
                let np = samples.n_points(t);
                let mut v = Vec::with_capacity(np * (q + 1));
                for k in 0..np {
                    let d = algebra.time_derivative(samples.modes(t, k), samples.jump(t, k));
                    v.extend(d.iter().map(|x| x[0]));
                }
                v
            })
            .collect();
        let tr = disc.transition(n);
        let patches = vertex_patches(
            disc.space(n).mesh(),
            &tr.fine,
            &tr.to_next,
            &tr.fine_degrees,
        )?;
        let projections = patches
            .iter()
            .map(|p| project_patch_data(p, &tr.fine, src))
            .collect::<Result<Vec<_>>>()?;
        let data = assemble_f_htau(&patches, projections, src);
        Ok(Self {
            n,
            algebra,
            samples,
            dt,
            patches,
            data,
        })
    }

    pub fn q(&self) -> usize {
        self.algebra.q
    }

    #[inline]
    pub fn dt(&self, t: usize, k: usize, j: usize) -> f64 {
        self.dt[t][k * (self.q() + 1) + j]
    }

    /// Modes `0..=q+1` of `I u_htau` at point `k` of fine element `t`.
    pub fn reconstructed(&self, t: usize, k: usize) -> Vec<Vg> {
        self.algebra
            .reconstruct(self.samples.modes(t, k), self.samples.jump(t, k))
    }
}
