//! Independent checks shared by the integration tests and the acceptance
//! suite. Each function recomputes a quantity from the raw solution data
//! with its own quadrature instead of reusing the library's formula.
#![allow(dead_code)]

use heatflux::basis::quadrature::gauss_legendre;
use heatflux::flux::{equilibrate_step, max_deviation, solve_patch_flux_spacetime, FluxCache};
use heatflux::harness::{solve_config, RunConfig};
use heatflux::metrics::ManufacturedProblem;
use heatflux::reconstruction::{jump_factor, StepReconstruction, Vg};
use heatflux::solver::{backward_euler_oracle, DiscreteSolution};

pub fn config(text: &str) -> RunConfig {
    let mut c = RunConfig::default();
    c.apply_text(&text.replace(';', "\n")).unwrap();
    c
}

/// Worst relative deviations of one solution; every field is a max over steps.
#[derive(Debug, Default, Clone, Copy)]
pub struct Identities {
    /// `int ||grad(u - I u)||^2 dt` against the jump factor times `||grad [u]||^2`.
    pub jump_energy: f64,
    /// `I u(t_n) = u(t_n)` and `I u(t_{n-1}^+) = u(t_{n-1})` from the previous step.
    pub endpoints: f64,
    /// `int d/dt(I u) phi = int d/dt(u) phi - [u] phi(t_{n-1}^+)` for `phi` of degree `<= q`.
    pub moments: f64,
    /// Element means of `f_tau - f_htau` against every temporal mode.
    pub element_means: f64,
    /// `|(g_j, 1)| / ||g_j||` over interior patches.
    pub compatibility: f64,
    /// Decoupled against coupled space-time patch solves.
    pub decoupling: f64,
}

impl Identities {
    pub fn max(&self) -> f64 {
        [
            self.jump_energy,
            self.endpoints,
            self.moments,
            self.element_means,
            self.compatibility,
            self.decoupling,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    fn merge(&mut self, o: Identities) {
        self.jump_energy = self.jump_energy.max(o.jump_energy);
        self.endpoints = self.endpoints.max(o.endpoints);
        self.moments = self.moments.max(o.moments);
        self.element_means = self.element_means.max(o.element_means);
        self.compatibility = self.compatibility.max(o.compatibility);
        self.decoupling = self.decoupling.max(o.decoupling);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

pub fn identities(sol: &DiscreteSolution) -> Identities {
    let mut out = Identities::default();
    let mut cache = FluxCache::default();
    for n in 1..=sol.disc.n_steps() {
        let st = StepReconstruction::new(sol, n).unwrap();
        out.merge(step_identities(sol, &st, &mut cache));
    }
    out
}

fn step_identities(
    sol: &DiscreteSolution,
    st: &StepReconstruction,
    cache: &mut FluxCache,
) -> Identities {
    let n = st.n;
    let disc = &sol.disc;
    let tr = disc.transition(n);
    let quad = &sol.sources[n - 1].quad;
    let q = st.q();
    let tb = &st.algebra.basis;
    let tau = tb.tau();
    let (gs, gw) = gauss_legendre(q + 3);
    let times: Vec<f64> = gs.iter().map(|&s| tb.from_reference(s)).collect();
    let tables: Vec<(Vec<f64>, Vec<f64>)> = times
        .iter()
        .map(|&t| tb.orthonormal_values_and_derivs(q + 1, t))
        .collect();
    let (t0, t1) = (tb.from_reference(-1.0), tb.from_reference(1.0));
    let at_start = tb.orthonormal_values(q + 1, t0);
    let at_end = tb.orthonormal_values(q + 1, t1);
    let prev = disc.space(n - 1);
    let prev_end = sol.end_value(n - 1);

    let (mut gap_energy, mut jump_energy) = (0.0, 0.0);
    let (mut end_dev, mut end_scale) = (0.0f64, f64::MIN_POSITIVE);
    let (mut mom_dev, mut mom_scale) = (0.0f64, f64::MIN_POSITIVE);
    for t in 0..tr.fine.n_elements() {
        for (k, (&x, &w)) in quad.points[t].iter().zip(&quad.weights[t]).enumerate() {
            let u = st.samples.modes(t, k);
            let jump = st.samples.jump(t, k);
            let iu = st.reconstructed(t, k);
            // Reconstruction gap, mode by mode, then in time.
            let diff: Vec<Vg> = (0..=q + 1)
                .map(|j| {
                    let base = if j <= q { u[j] } else { [0.0; 3] };
                    [iu[j][0] - base[0], iu[j][1] - base[1], iu[j][2] - base[2]]
                })
                .collect();
            for ((phi, _), &wt) in tables.iter().zip(&gw) {
                let mut g = [0.0; 2];
                for (d, &p) in diff.iter().zip(phi) {
                    g[0] += p * d[1];
                    g[1] += p * d[2];
                }
                gap_energy += 0.5 * tau * wt * w * (g[0] * g[0] + g[1] * g[1]);
            }
            jump_energy += w * (jump[1] * jump[1] + jump[2] * jump[2]);

            let eval = |modes: &[Vg], phi: &[f64]| {
                let mut r = [0.0; 3];
                for (m, &p) in modes.iter().zip(phi) {
                    for c in 0..3 {
                        r[c] += p * m[c];
                    }
                }
                r
            };
            let (iu_end, u_end) = (eval(&iu, &at_end), eval(u, &at_end));
            let iu_start = eval(&iu, &at_start);
            let (pv, pg) = prev.value_grad(&prev_end, tr.to_prev[t], x);
            let before = [pv, pg[0], pg[1]];
            for c in 0..3 {
                end_scale = end_scale.max(u_end[c].abs()).max(before[c].abs());
                end_dev = end_dev
                    .max((iu_end[c] - u_end[c]).abs())
                    .max((iu_start[c] - before[c]).abs());
            }

            let impl_dt = st.algebra.time_derivative(u, jump);
            for j in 0..=q {
                let mut lhs = [0.0; 3];
                let mut du = [0.0; 3];
                for ((phi, dphi), &wt) in tables.iter().zip(&gw) {
                    let s = 0.5 * tau * wt * phi[j];
                    for c in 0..3 {
                        let di: f64 = iu.iter().zip(dphi).map(|(m, d)| m[c] * d).sum();
                        let dd: f64 = u.iter().zip(dphi).map(|(m, d)| m[c] * d).sum();
                        lhs[c] += s * di;
                        du[c] += s * dd;
                    }
                }
                for c in 0..3 {
                    let rhs = du[c] - jump[c] * at_start[j];
                    mom_scale = mom_scale
                        .max(lhs[c].abs())
                        .max(du[c].abs())
                        .max((jump[c] * at_start[j]).abs());
                    mom_dev = mom_dev
                        .max((lhs[c] - rhs).abs())
                        .max((impl_dt[j][c] - rhs).abs());
                }
            }
        }
    }

    let src = &sol.sources[n - 1];
    let (mut mean_dev, mut mean_scale) = (0.0f64, f64::MIN_POSITIVE);
    for t in 0..tr.fine.n_elements() {
        for j in 0..=q {
            let (mut r, mut s) = (0.0, 0.0);
            for (k, &w) in quad.weights[t].iter().enumerate() {
                let (a, b) = (src.moment(t, k, j), st.data.moment(t, k, j));
                r += w * (a - b);
                s += w * (a.abs() + b.abs());
            }
            mean_dev = mean_dev.max(r.abs());
            mean_scale = mean_scale.max(s);
        }
    }

    let flux = equilibrate_step(sol, st, cache).unwrap();
    let mut compat = 0.0f64;
    let mut decoupling = 0.0f64;
    for pf in &flux.patches {
        if pf.rhs.interior {
            for (m, g) in pf.rhs.mean.iter().zip(&pf.rhs.norm) {
                if *g > 0.0 {
                    compat = compat.max(m.abs() / g);
                }
            }
        }
        let coupled = solve_patch_flux_spacetime(pf.factor.system(), &pf.rhs, st).unwrap();
        decoupling = decoupling.max(max_deviation(&pf.modes, &coupled));
    }

    Identities {
        jump_energy: rel(gap_energy, jump_factor(tau, q) * jump_energy),
        endpoints: end_dev / end_scale,
        moments: mom_dev / mom_scale,
        element_means: mean_dev / mean_scale,
        compatibility: compat,
        decoupling,
    }
}

/// Largest nodal deviation between a `q = 0` run and the implicit Euler
/// oracle, relative to the largest nodal coefficient.
pub fn euler_deviation(cfg: &RunConfig) -> f64 {
    assert_eq!(cfg.q, 0);
    let (_forest, sol) = solve_config(cfg).unwrap();
    let problem = ManufacturedProblem::new(cfg.problem, cfg.t_final);
    let f = move |x: [f64; 2], t: f64| problem.f(x, t);
    let u0 = move |x: [f64; 2]| problem.u0(x);
    let oracle = backward_euler_oracle(&sol.disc, &f, &u0).unwrap();
    let (mut dev, mut scale) = (0.0f64, f64::MIN_POSITIVE);
    for (n, o) in oracle.iter().enumerate() {
        for (a, b) in sol.end_value(n).iter().zip(o) {
            dev = dev.max((a - b).abs());
            scale = scale.max(b.abs());
        }
    }
    dev / scale
}
