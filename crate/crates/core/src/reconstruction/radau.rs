//! Radau reconstruction `I u = u + c(t) [u]` in orthonormal temporal modes,
//! with `c = (-1)^q / 2 (L_q - L_{q+1})`.

use crate::basis::legendre::LegendreTimeBasis;
use crate::mesh::Point;
use crate::solver::DiscreteSolution;

/// Value and gradient packed as `[v, dx, dy]`.
pub type Vg = [f64; 3];

/// Temporal matrices of one step.
#[derive(Debug, Clone)]
pub struct TemporalAlgebra {
    pub q: usize,
    pub basis: LegendreTimeBasis,
    /// `int phi_k' phi_j`.
    pub derivative: Vec<Vec<f64>>,
    /// `phi_j(t_{n-1}^+)` for `j <= q + 1`.
    pub start: Vec<f64>,
    /// Orthonormal coefficients of `c(t)` on `phi_q` and `phi_{q+1}`.
    pub radau: [f64; 2],
}

impl TemporalAlgebra {
    pub fn new(basis: LegendreTimeBasis, q: usize) -> Self {
        let derivative = basis.derivative_coupling(q + 1);
        let start = (0..=q + 1).map(|j| basis.orthonormal_at_start(j)).collect();
        let radau = radau_coefficients(basis.tau(), q);
        Self {
            q,
            basis,
            derivative,
            start,
            radau,
        }
    }

    /// Jump-energy factor `tau (q+1) / ((2q+1)(2q+3))`.
    pub fn jump_factor(&self) -> f64 {
        jump_factor(self.basis.tau(), self.q)
    }

    /// Coefficient of the jump in mode `j` of `I u - u`.
    pub fn lift(&self, j: usize) -> f64 {
        if j == self.q {
            self.radau[0]
        } else if j == self.q + 1 {
            self.radau[1]
        } else {
            0.0
        }
    }

    /// Modes `0..=q+1` of `I u` from the `q + 1` modes of `u` and the jump.
    pub fn reconstruct(&self, u: &[Vg], jump: Vg) -> Vec<Vg> {
        let mut out: Vec<Vg> = u.to_vec();
        out.push([0.0; 3]);
        for j in [self.q, self.q + 1] {
            let c = self.lift(j);
            for k in 0..3 {
                out[j][k] += c * jump[k];
            }
        }
        out
    }

    /// Modes `0..=q` of `d/dt I u`: `sum_k D_jk u_k - phi_j(t^+) [u]`.
    pub fn time_derivative(&self, u: &[Vg], jump: Vg) -> Vec<Vg> {
        (0..=self.q)
            .map(|j| {
                let mut r = [0.0; 3];
                for (k, uk) in u.iter().enumerate() {
                    let d = self.derivative[j][k];
                    if d != 0.0 {
                        for c in 0..3 {
                            r[c] += d * uk[c];
                        }
                    }
                }
                for c in 0..3 {
                    r[c] -= self.start[j] * jump[c];
                }
                r
            })
            .collect()
    }
}

pub fn radau_coefficients(tau: f64, q: usize) -> [f64; 2] {
    let sign = if q.is_multiple_of(2) { 0.5 } else { -0.5 };
    let qf = q as f64;
    [
        sign * (tau / (2.0 * qf + 1.0)).sqrt(),
        -sign * (tau / (2.0 * qf + 3.0)).sqrt(),
    ]
}

pub fn jump_factor(tau: f64, q: usize) -> f64 {
    let qf = q as f64;
    tau * (qf + 1.0) / ((2.0 * qf + 1.0) * (2.0 * qf + 3.0))
}

/// Evaluates `sum_j w_j m_j` for packed modes.
pub fn combine(modes: &[Vg], w: &[f64]) -> Vg {
    let mut r = [0.0; 3];
    for (m, &c) in modes.iter().zip(w) {
        for k in 0..3 {
            r[k] += c * m[k];
        }
    }
    r
}

/// Temporal modes of `u_htau` and the jump `u(t_{n-1}) - u(t_{n-1}^+)`
/// tabulated at arbitrary points of elements nested in the step's common
/// refinement.
#[derive(Debug, Clone)]
pub struct ModeSamples {
    pub q: usize,
    /// `data[e][i * (q + 2) + j]`, mode `j <= q`, jump at `j = q + 1`.
    pub data: Vec<Vec<Vg>>,
}

impl ModeSamples {
    /// `points[e]` lies in element `to_prev[e]` of `V^{n-1}` and
    /// `to_next[e]` of `V^n`.
    pub fn new(
        sol: &DiscreteSolution,
        n: usize,
        points: &[Vec<Point>],
        to_prev: &[usize],
        to_next: &[usize],
    ) -> Self {
        let disc = &sol.disc;
        let q = disc.partition.degree(n);
        let prev = disc.space(n - 1);
        let next = disc.space(n);
        let prev_end = sol.end_value(n - 1);
        let start = sol.start_value(n);
        let modes = &sol.modes[n - 1];
        let stride = q + 2;
        let (mut v, mut g) = (Vec::new(), Vec::new());
        let data = points
            .iter()
            .enumerate()
            .map(|(e, pts)| {
                let mut d = vec![[0.0; 3]; pts.len() * stride];
                for (i, &x) in pts.iter().enumerate() {
                    next.eval_at(to_next[e], x, &mut v, &mut g);
                    for (j, m) in modes.iter().enumerate() {
                        let (a, b) = next.combine(m, to_next[e], &v, &g);
                        d[i * stride + j] = [a, b[0], b[1]];
                    }
                    let (s, sg) = next.combine(&start, to_next[e], &v, &g);
                    prev.eval_at(to_prev[e], x, &mut v, &mut g);
                    let (p, pg) = prev.combine(&prev_end, to_prev[e], &v, &g);
                    d[i * stride + q + 1] = [p - s, pg[0] - sg[0], pg[1] - sg[1]];
                }
                d
            })
            .collect();
        Self { q, data }
    }

    /// Samples at the step quadrature points of the common refinement.
    pub fn on_step(sol: &DiscreteSolution, n: usize, points: &[Vec<Point>]) -> Self {
        let tr = sol.disc.transition(n);
        Self::new(sol, n, points, &tr.to_prev, &tr.to_next)
    }

    pub fn n_points(&self, e: usize) -> usize {
        self.data[e].len() / (self.q + 2)
    }

    pub fn modes(&self, e: usize, i: usize) -> &[Vg] {
        let s = self.q + 2;
        &self.data[e][i * s..i * s + self.q + 1]
    }

    pub fn jump(&self, e: usize, i: usize) -> Vg {
        self.data[e][i * (self.q + 2) + self.q + 1]
    }
}
