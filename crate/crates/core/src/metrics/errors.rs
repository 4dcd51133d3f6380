use super::ManufacturedProblem;
use crate::basis::quadrature::triangle_rule;
use crate::basis::rtn::bary_to_point;
use crate::estimators::{ExactSolution, StepErrors, StepEstimates};
use crate::mesh::Point;
use crate::solver::DiscreteSolution;

impl ExactSolution for ManufacturedProblem {
    fn u(&self, x: Point, t: f64) -> f64 {
        ManufacturedProblem::u(self, x, t)
    }

    fn dt_u(&self, x: Point, t: f64) -> f64 {
        ManufacturedProblem::dt_u(self, x, t)
    }

    fn grad_u(&self, x: Point, t: f64) -> [f64; 2] {
        ManufacturedProblem::grad_u(self, x, t)
    }
}

/// True errors restricted to one step.
#[derive(Debug, Clone)]
pub struct StepErrorReport {
    pub n: usize,
    /// `int ||d_t (u - I u)||^2_{H^-1}`.
    pub dt_dual_sq: f64,
    /// `int ||grad (u - I u)||^2`.
    pub grad_sq: f64,
    /// `||u_htau - I u_htau||^2_X` on the step.
    pub gap_sq: f64,
    /// `|u - u_htau|^2_{E_Y^{a,n}}` per vertex of `T^n` (empty without
    /// local lifts).
    pub local_ey: Vec<f64>,
}

impl StepErrorReport {
    pub fn new(est: &StepEstimates, err: &StepErrors, coarse: &crate::mesh::MeshLevel) -> Self {
        let local_ey = if err.local_dt_sq.is_empty() {
            Vec::new()
        } else {
            (0..coarse.n_vertices())
                .map(|a| {
                    let near: f64 = coarse
                        .vertex_triangles(a)
                        .iter()
                        .map(|&k| err.grad_sq[k] + est.elements[k].jump_sq)
                        .sum();
                    err.local_dt_sq[a] + near
                })
                .collect()
        };
        Self {
            n: est.n,
            dt_dual_sq: err.dt_dual_sq,
            grad_sq: err.grad_sq.iter().sum(),
            gap_sq: est.jump_sq,
            local_ey,
        }
    }

    /// `int ||d_t(u - I u)||^2_{H^-1} + ||grad(u - I u)||^2 + ||grad(u_htau - I u_htau)||^2`.
    pub fn localization_denominator(&self) -> f64 {
        self.dt_dual_sq + self.grad_sq + self.gap_sq
    }

    /// `sum_a |u - u_htau|^2_{E_Y^{a,n}}` over the step's localization
    /// denominator.
    pub fn localization_ratio(&self) -> Option<f64> {
        let d = self.localization_denominator();
        (!self.local_ey.is_empty() && d > 0.0).then(|| self.local_ey.iter().sum::<f64>() / d)
    }
}

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub steps: Vec<StepErrorReport>,
    /// `||(u - I u)(T)||^2`.
    pub final_sq: f64,
    /// `||u0 - u_htau(0)||^2`.
    pub init_sq: f64,
    pub y_sq: f64,
    pub x_gap_sq: f64,
    pub ey_sq: f64,
}

impl ErrorReport {
    pub fn new(steps: Vec<StepErrorReport>, final_sq: f64, init_sq: f64) -> Self {
        let y_sq = steps.iter().map(|s| s.dt_dual_sq + s.grad_sq).sum::<f64>() + final_sq;
        let x_gap_sq = steps.iter().map(|s| s.gap_sq).sum();
        Self {
            steps,
            final_sq,
            init_sq,
            y_sq,
            x_gap_sq,
            ey_sq: y_sq + x_gap_sq,
        }
    }

    pub fn y(&self) -> f64 {
        self.y_sq.sqrt()
    }

    pub fn ey(&self) -> f64 {
        self.ey_sq.sqrt()
    }
}

/// `||u(t) - v||^2` for `v` given by coefficients on the space of step `n`.
pub fn l2_error_sq(
    sol: &DiscreteSolution,
    n: usize,
    coef: &[f64],
    u: impl Fn(Point) -> f64,
) -> f64 {
    let space = sol.disc.space(n);
    let mesh = space.mesh();
    let rule = triangle_rule(2 * space.max_degree() + 6);
    let (mut v, mut g) = (Vec::new(), Vec::new());
    let mut s = 0.0;
    for t in 0..mesh.n_elements() {
        let pts = mesh.element_points(t);
        let a2 = 2.0 * mesh.area(t);
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let x = bary_to_point(&pts, *lam);
            space.eval_at(t, x, &mut v, &mut g);
            let (uh, _) = space.combine(coef, t, &v, &g);
            s += w * a2 * (u(x) - uh).powi(2);
        }
    }
    s
}

/// `||(u - u_htau)(T)||^2` and `||u0 - u_htau(0)||^2`.
pub fn endpoint_errors(sol: &DiscreteSolution, problem: &ManufacturedProblem) -> (f64, f64) {
    let nt = sol.disc.n_steps();
    let t_end = sol.disc.partition.final_time();
    let end = l2_error_sq(sol, nt, &sol.end_value(nt), |x| problem.u(x, t_end));
    let init = l2_error_sq(sol, 0, &sol.initial, |x| problem.u0(x));
    (end, init)
}
