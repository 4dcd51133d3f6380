//! Elliptic projection of the previous end value onto the current space and
//! the resulting coarsening indicator.

use crate::basis::quadrature::triangle_rule;
use crate::basis::rtn::bary_to_point;
use crate::error::Result;
use crate::linalg::{dot, SparseCholesky};
use crate::reconstruction::jump_factor;
use crate::solver::{cross_stiffness, DiscreteSolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseningReport {
    pub n: usize,
    /// `||grad jump||^2`.
    pub jump_energy: f64,
    /// `||grad (w - P w)||^2` by direct quadrature, `w = u_htau(t_{n-1})`.
    pub misfit: f64,
    /// `|misfit - (||grad w||^2 - ||grad P w||^2)|` relative to `||grad w||^2`.
    pub orthogonality_gap: f64,
    /// Squared coarsening indicator.
    pub eta_c_sq: f64,
    /// `misfit / jump_energy` (0 for a continuous solution).
    pub theta: f64,
}

/// Stiffness factorisation of the current space, reused while the space is
/// unchanged.
#[derive(Default)]
pub struct ProjectionCache {
    key: Option<usize>,
    chol: Option<SparseCholesky>,
}

pub fn coarsening(
    sol: &DiscreteSolution,
    n: usize,
    cache: &mut ProjectionCache,
) -> Result<CoarseningReport> {
    let disc = &sol.disc;
    let (prev, next) = (disc.space(n - 1), disc.space(n));
    let tr = disc.transition(n);
    let key = std::sync::Arc::as_ptr(next) as usize;
    if cache.key != Some(key) || cache.chol.is_none() {
        cache.chol = Some(SparseCholesky::new(&next.assemble_stiffness()?)?);
        cache.key = Some(key);
    }
    let w = sol.end_value(n - 1);
    let start = sol.start_value(n);
    let b = cross_stiffness(tr, prev, &w, next);
    let proj = if b.is_empty() {
        Vec::new()
    } else {
        cache.chol.as_ref().expect("factorised above").solve(&b)
    };
    let proj_energy = dot(&proj, &b);

    let (mut w_energy, mut misfit, mut jump_energy) = (0.0, 0.0, 0.0);
    let (mut vp, mut gp, mut vn, mut gn) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for t in 0..tr.fine.n_elements() {
        let (kp, kn) = (tr.to_prev[t], tr.to_next[t]);
        let rule = triangle_rule(2 * prev.degree(kp).max(next.degree(kn)));
        let pts = tr.fine.element_points(t);
        let a2 = 2.0 * tr.fine.area(t);
        for (lam, wt) in rule.points.iter().zip(&rule.weights) {
            let x = bary_to_point(&pts, *lam);
            prev.eval_at(kp, x, &mut vp, &mut gp);
            let (_, gw) = prev.combine(&w, kp, &vp, &gp);
            next.eval_at(kn, x, &mut vn, &mut gn);
            let (_, gpw) = next.combine(&proj, kn, &vn, &gn);
            let (_, gs) = next.combine(&start, kn, &vn, &gn);
            let s = wt * a2;
            w_energy += s * (gw[0] * gw[0] + gw[1] * gw[1]);
            misfit += s * ((gw[0] - gpw[0]).powi(2) + (gw[1] - gpw[1]).powi(2));
            jump_energy += s * ((gw[0] - gs[0]).powi(2) + (gw[1] - gs[1]).powi(2));
        }
    }
    let orthogonality_gap = if w_energy > 0.0 {
        (misfit - (w_energy - proj_energy)).abs() / w_energy
    } else {
        0.0
    };
    let tau = disc.partition.tau(n);
    let q = disc.partition.degree(n);
    Ok(CoarseningReport {
        n,
        jump_energy,
        misfit,
        orthogonality_gap,
        eta_c_sq: jump_factor(tau, q) * misfit,
        theta: if jump_energy > 0.0 {
            misfit / jump_energy
        } else {
            0.0
        },
    })
}
