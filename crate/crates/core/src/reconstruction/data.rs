//! Temporal projection `f_tau` of the source, sampled at spatial quadrature
//! points of the fine (common refinement) elements of one time step.

use std::sync::Arc;

use crate::basis::legendre::LegendreTimeBasis;
use crate::basis::quadrature::{gauss_legendre, triangle_rule, TriangleRule};
use crate::basis::rtn::bary_to_point;
use crate::mesh::{MeshLevel, Point};

/// Source term `f(x, t)`.
pub type Source<'a> = &'a (dyn Fn(Point, f64) -> f64 + Sync);

/// Quadrature on every element of a mesh, in physical coordinates.
#[derive(Debug, Clone)]
pub struct MeshQuadrature {
    pub rule: Arc<TriangleRule>,
    /// Physical points per element.
    pub points: Vec<Vec<Point>>,
    /// Physical weights per element.
    pub weights: Vec<Vec<f64>>,
}

impl MeshQuadrature {
    pub fn new(mesh: &MeshLevel, degree: usize) -> Self {
        let rule = triangle_rule(degree);
        let mut points = Vec::with_capacity(mesh.n_elements());
        let mut weights = Vec::with_capacity(mesh.n_elements());
        for t in 0..mesh.n_elements() {
            let pts = mesh.element_points(t);
            let a2 = 2.0 * mesh.area(t);
            points.push(
                rule.points
                    .iter()
                    .map(|l| bary_to_point(&pts, *l))
                    .collect(),
            );
            weights.push(rule.weights.iter().map(|w| w * a2).collect());
        }
        Self {
            rule,
            points,
            weights,
        }
    }

    pub fn n_points(&self) -> usize {
        self.rule.points.len()
    }
}

/// Temporal moments `F_j(x) = int_{I_n} f(x, t) phi_j(t) dt` at the points of
/// a [`MeshQuadrature`]; `f_tau(x, t) = sum_j phi_j(t) F_j(x)`.
#[derive(Debug, Clone)]
pub struct SourceMoments {
    pub quad: MeshQuadrature,
    pub modes: usize,
    /// `values[t][q * modes + j]`.
    pub values: Vec<Vec<f64>>,
}

impl SourceMoments {
    /// Samples the moments with `q + 6` Gauss points in time.
    pub fn sample(f: Source, quad: MeshQuadrature, time: &LegendreTimeBasis, q: usize) -> Self {
        let modes = q + 1;
        let (gs, gw) = gauss_legendre(q + 6);
        let tau = time.tau();
        let times: Vec<f64> = gs.iter().map(|&s| time.from_reference(s)).collect();
        let phis: Vec<Vec<f64>> = times
            .iter()
            .map(|&t| time.orthonormal_values(q, t))
            .collect();
        let mut values = Vec::with_capacity(quad.points.len());
        for pts in &quad.points {
            let mut v = vec![0.0; pts.len() * modes];
            for (i, &x) in pts.iter().enumerate() {
                for (g, &t) in times.iter().enumerate() {
                    let fw = f(x, t) * gw[g] * 0.5 * tau;
                    for j in 0..modes {
                        v[i * modes + j] += fw * phis[g][j];
                    }
                }
            }
            values.push(v);
        }
        Self {
            quad,
            modes,
            values,
        }
    }

    pub fn zero(quad: MeshQuadrature, q: usize) -> Self {
        let modes = q + 1;
        let values = quad
            .points
            .iter()
            .map(|p| vec![0.0; p.len() * modes])
            .collect();
        Self {
            quad,
            modes,
            values,
        }
    }

    #[inline]
    pub fn moment(&self, t: usize, i: usize, j: usize) -> f64 {
        self.values[t][i * self.modes + j]
    }

    /// `f_tau(x_i, time)` on element `t` given `phi_j(time)`.
    pub fn value(&self, t: usize, i: usize, phi: &[f64]) -> f64 {
        (0..self.modes).map(|j| phi[j] * self.moment(t, i, j)).sum()
    }
}
