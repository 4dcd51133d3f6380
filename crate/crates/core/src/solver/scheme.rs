use std::sync::Arc;

use super::partition::TimePartition;
use crate::basis::legendre::LegendreTimeBasis;
use crate::basis::quadrature::{gauss_legendre, triangle_rule};
use crate::basis::rtn::bary_to_point;
use crate::error::{Error, Result};
use crate::linalg::{norm, SparseCholesky, SparseLu, SparseMatrix, TripletBuilder};
use crate::mesh::{Forest, MeshLevel, Point};
use crate::reconstruction::{MeshQuadrature, Source, SourceMoments};
use crate::spaces::{HpSpace, FIXED};

/// Common refinement of two consecutive meshes.
#[derive(Debug, Clone)]
pub struct Transition {
    pub fine: Arc<MeshLevel>,
    /// Containing element of `T^{n-1}` for each fine element.
    pub to_prev: Vec<usize>,
    /// Containing element of `T^n` for each fine element.
    pub to_next: Vec<usize>,
    /// `max(p_{K'}, p_{K''})` per fine element.
    pub fine_degrees: Vec<usize>,
}

impl Transition {
    pub fn new(forest: &Forest, prev: &HpSpace, next: &HpSpace) -> Result<Self> {
        let (fine, to_prev, to_next) = forest.common_refinement(prev.mesh(), next.mesh())?;
        let fine_degrees = to_prev
            .iter()
            .zip(&to_next)
            .map(|(&a, &b)| prev.degree(a).max(next.degree(b)))
            .collect();
        Ok(Self {
            fine: Arc::new(fine),
            to_prev,
            to_next,
            fine_degrees,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.fine_degrees.iter().copied().max().unwrap_or(1)
    }
}

/// Meshes, spaces and time partition of a run.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub partition: TimePartition,
    /// `V^0, ..., V^N`.
    pub spaces: Vec<Arc<HpSpace>>,
    /// Transition into step `n` is stored at `n - 1`.
    pub transitions: Vec<Transition>,
    /// Spatial quadrature degree on fine elements.
    pub quad_degree: usize,
}

impl Discretization {
    pub fn new(
        forest: &Forest,
        partition: TimePartition,
        spaces: Vec<Arc<HpSpace>>,
    ) -> Result<Self> {
        if spaces.len() != partition.n_steps() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} spaces for {} steps",
                spaces.len(),
                partition.n_steps()
            )));
        }
        let mut transitions = Vec::with_capacity(partition.n_steps());
        for n in 1..spaces.len() {
            transitions.push(Transition::new(forest, &spaces[n - 1], &spaces[n])?);
        }
        let pmax = spaces.iter().map(|s| s.max_degree()).max().unwrap_or(1);
        Ok(Self {
            partition,
            spaces,
            transitions,
            quad_degree: 2 * pmax + 4,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.partition.n_steps()
    }

    pub fn space(&self, n: usize) -> &Arc<HpSpace> {
        &self.spaces[n]
    }

    pub fn transition(&self, n: usize) -> &Transition {
        &self.transitions[n - 1]
    }

    pub fn step_quadrature(&self, n: usize) -> MeshQuadrature {
        MeshQuadrature::new(&self.transition(n).fine, self.quad_degree)
    }

    pub fn time_basis(&self, n: usize) -> LegendreTimeBasis {
        self.partition.time_basis(n)
    }
}

/// `u_htau`: initial value on `V^0` and, per step, orthonormal temporal
/// modes on `V^n`.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub disc: Arc<Discretization>,
    pub initial: Vec<f64>,
    /// `modes[n - 1][j]`.
    pub modes: Vec<Vec<Vec<f64>>>,
    /// Source moments of step `n` at `n - 1`.
    pub sources: Vec<SourceMoments>,
}

impl DiscreteSolution {
    /// `u_htau(t_n)` on `V^n` (the initial value for `n = 0`).
    pub fn end_value(&self, n: usize) -> Vec<f64> {
        if n == 0 {
            return self.initial.clone();
        }
        let tb = self.disc.time_basis(n);
        combine_modes(&self.modes[n - 1], |j| tb.orthonormal_at_end(j))
    }

    /// `u_htau(t_{n-1}^+)` on `V^n`.
    pub fn start_value(&self, n: usize) -> Vec<f64> {
        let tb = self.disc.time_basis(n);
        combine_modes(&self.modes[n - 1], |j| tb.orthonormal_at_start(j))
    }

    /// `u_htau(t)` on `V^n` for `t` in the closure of interval `n`.
    pub fn value_in_step(&self, n: usize, t: f64) -> Vec<f64> {
        let tb = self.disc.time_basis(n);
        let q = self.modes[n - 1].len() - 1;
        let phi = tb.orthonormal_values(q, t);
        combine_modes(&self.modes[n - 1], |j| phi[j])
    }

    /// Point value in step `n` at time `t`.
    pub fn eval(&self, n: usize, t: f64, x: Point) -> Option<f64> {
        let space = self.disc.space(n);
        let (e, _) = space.mesh().locate(x)?;
        Some(space.value_grad(&self.value_in_step(n, t), e, x).0)
    }
}

pub(crate) fn combine_modes(modes: &[Vec<f64>], w: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; modes.first().map_or(0, Vec::len)];
    for (j, m) in modes.iter().enumerate() {
        let c = w(j);
        for (o, v) in out.iter_mut().zip(m) {
            *o += c * v;
        }
    }
    out
}

/// `(u_prev, phi_i)` for `u_prev` on `V^{n-1}` and `phi_i` in `V^n`, exact on
/// the common refinement.
pub fn cross_mass(tr: &Transition, prev: &HpSpace, coef: &[f64], next: &HpSpace) -> Vec<f64> {
    let mut out = vec![0.0; next.n_dofs()];
    let (mut vp, mut gp, mut vn, mut gn) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for t in 0..tr.fine.n_elements() {
        let (kp, kn) = (tr.to_prev[t], tr.to_next[t]);
        let rule = triangle_rule(prev.degree(kp) + next.degree(kn));
        let pts = tr.fine.element_points(t);
        let a2 = 2.0 * tr.fine.area(t);
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let x = bary_to_point(&pts, *lam);
            prev.eval_at(kp, x, &mut vp, &mut gp);
            let (u, _) = prev.combine(coef, kp, &vp, &gp);
            if u == 0.0 {
                continue;
            }
            next.eval_at(kn, x, &mut vn, &mut gn);
            let uw = u * w * a2;
            for (k, &d) in next.element_dofs(kn).iter().enumerate() {
                if d != FIXED {
                    out[d] += uw * vn[k];
                }
            }
        }
    }
    out
}

/// `(grad u_prev, grad phi_i)` for `u_prev` on `V^{n-1}` and `phi_i` in
/// `V^n`, exact on the common refinement.
pub fn cross_stiffness(tr: &Transition, prev: &HpSpace, coef: &[f64], next: &HpSpace) -> Vec<f64> {
    let mut out = vec![0.0; next.n_dofs()];
    let (mut vp, mut gp, mut vn, mut gn) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for t in 0..tr.fine.n_elements() {
        let (kp, kn) = (tr.to_prev[t], tr.to_next[t]);
        let rule = triangle_rule(prev.degree(kp) + next.degree(kn));
        let pts = tr.fine.element_points(t);
        let a2 = 2.0 * tr.fine.area(t);
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let x = bary_to_point(&pts, *lam);
            prev.eval_at(kp, x, &mut vp, &mut gp);
            let (_, g) = prev.combine(coef, kp, &vp, &gp);
            next.eval_at(kn, x, &mut vn, &mut gn);
            let s = w * a2;
            for (k, &d) in next.element_dofs(kn).iter().enumerate() {
                if d != FIXED {
                    out[d] += s * (g[0] * gn[k][0] + g[1] * gn[k][1]);
                }
            }
        }
    }
    out
}

/// `(F_j, phi_i)` for every temporal mode `j`.
pub fn source_loads(tr: &Transition, next: &HpSpace, src: &SourceMoments) -> Vec<Vec<f64>> {
    let modes = src.modes;
    let mut out = vec![vec![0.0; next.n_dofs()]; modes];
    let (mut v, mut g) = (Vec::new(), Vec::new());
    for t in 0..tr.fine.n_elements() {
        let kn = tr.to_next[t];
        for (i, (&x, &w)) in src.quad.points[t]
            .iter()
            .zip(&src.quad.weights[t])
            .enumerate()
        {
            next.eval_at(kn, x, &mut v, &mut g);
            for (j, o) in out.iter_mut().enumerate() {
                let fw = src.moment(t, i, j) * w;
                if fw == 0.0 {
                    continue;
                }
                for (k, &d) in next.element_dofs(kn).iter().enumerate() {
                    if d != FIXED {
                        o[d] += fw * v[k];
                    }
                }
            }
        }
    }
    out
}

/// Reusable factorisations for consecutive steps with identical spaces and
/// step sizes.
#[derive(Default)]
pub struct StepCache {
    key: Option<(usize, u64, usize)>,
    mats: Option<(SparseMatrix, SparseMatrix)>,
    lu: Option<SparseLu>,
}

impl StepCache {
    fn matrices(
        &mut self,
        space: &Arc<HpSpace>,
        tau: f64,
        q: usize,
    ) -> Result<(&SparseMatrix, &SparseMatrix, &SparseLu)> {
        let key = (Arc::as_ptr(space) as usize, tau.to_bits(), q);
        let same_space = self.key.is_some_and(|k| k.0 == key.0);
        if !same_space || self.mats.is_none() {
            self.mats = Some((space.assemble_mass()?, space.assemble_stiffness()?));
            self.lu = None;
        }
        if self.key != Some(key) || self.lu.is_none() {
            let (m, a) = self.mats.as_ref().expect("assembled");
            let tb = LegendreTimeBasis::new(0.0, tau, q)?;
            let sys = dg_matrix(m, a, &tb.dg_coupling(q))?;
            self.lu = Some(sys.lu()?);
            self.key = Some(key);
        }
        let (m, a) = self.mats.as_ref().expect("assembled");
        Ok((m, a, self.lu.as_ref().expect("factored")))
    }
}

/// `C (x) M + I (x) A` with unknowns ordered mode-major.
fn dg_matrix(m: &SparseMatrix, a: &SparseMatrix, c: &[Vec<f64>]) -> Result<SparseMatrix> {
    let nd = m.nrows();
    let nm = c.len();
    let mut b = TripletBuilder::new(nd * nm, nd * nm);
    for (i, row) in c.iter().enumerate() {
        for (k, &cik) in row.iter().enumerate() {
            if cik == 0.0 {
                continue;
            }
            for (r, s, v) in m.entries() {
                b.push(i * nd + r, k * nd + s, cik * v);
            }
        }
        for (r, s, v) in a.entries() {
            b.push(i * nd + r, i * nd + s, v);
        }
    }
    b.build()
}

/// Right-hand side of step `n`: `(F_i, v) + phi_i(t_{n-1}^+) (u_prev, v)`.
fn step_rhs(
    disc: &Discretization,
    n: usize,
    prev_end: &[f64],
    src: &SourceMoments,
) -> Vec<Vec<f64>> {
    let tr = disc.transition(n);
    let (prev, next) = (disc.space(n - 1), disc.space(n));
    let tb = disc.time_basis(n);
    let mut rhs = source_loads(tr, next, src);
    let cm = cross_mass(tr, prev, prev_end, next);
    for (j, r) in rhs.iter_mut().enumerate() {
        let s = tb.orthonormal_at_start(j);
        for (ri, ci) in r.iter_mut().zip(&cm) {
            *ri += s * ci;
        }
    }
    rhs
}

/// Solves step `n` for the temporal modes of `u_htau` on `V^n`.
pub fn solve_timestep(
    disc: &Discretization,
    n: usize,
    prev_end: &[f64],
    src: &SourceMoments,
    cache: &mut StepCache,
) -> Result<Vec<Vec<f64>>> {
    let q = disc.partition.degree(n);
    let space = disc.space(n);
    let nd = space.n_dofs();
    let rhs = step_rhs(disc, n, prev_end, src);
    let (_, _, lu) = cache.matrices(space, disc.partition.tau(n), q)?;
    let flat: Vec<f64> = rhs.concat();
    let sol = lu.solve(&flat);
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular(format!(
            "DG system of step {n} produced non-finite values"
        )));
    }
    Ok((0..=q)
        .map(|j| sol[j * nd..(j + 1) * nd].to_vec())
        .collect())
}

/// Relative residual of the discrete equations of step `n`.
pub fn scheme_residual(sol: &DiscreteSolution, n: usize) -> Result<f64> {
    let disc = &sol.disc;
    let q = disc.partition.degree(n);
    let space = disc.space(n);
    let (m, a) = (space.assemble_mass()?, space.assemble_stiffness()?);
    let c = disc.time_basis(n).dg_coupling(q);
    let rhs = step_rhs(disc, n, &sol.end_value(n - 1), &sol.sources[n - 1]);
    let u = &sol.modes[n - 1];
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..=q {
        let mut r = a.mul_vec(&u[i]);
        for k in 0..=q {
            if c[i][k] != 0.0 {
                let mu = m.mul_vec(&u[k]);
                for (ri, v) in r.iter_mut().zip(&mu) {
                    *ri += c[i][k] * v;
                }
            }
        }
        for (ri, b) in r.iter_mut().zip(&rhs[i]) {
            *ri -= b;
        }
        num += norm(&r).powi(2);
        den += norm(&rhs[i]).powi(2);
    }
    Ok(if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    })
}

/// L2 projection of `u0` onto `space`.
pub fn project_initial(space: &HpSpace, u0: &(dyn Fn(Point) -> f64 + Sync)) -> Result<Vec<f64>> {
    let m = space.assemble_mass()?;
    let b = space.assemble_load(u0, 4);
    if b.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; space.n_dofs()]);
    }
    let c = SparseCholesky::new(&m)?.solve(&b);
    Ok(c)
}

/// Runs the scheme over all steps.
pub fn solve(
    disc: Arc<Discretization>,
    f: Source,
    u0: &(dyn Fn(Point) -> f64 + Sync),
) -> Result<DiscreteSolution> {
    let initial = project_initial(disc.space(0), u0)?;
    let mut modes = Vec::with_capacity(disc.n_steps());
    let mut sources = Vec::with_capacity(disc.n_steps());
    let mut cache = StepCache::default();
    let mut prev_end = initial.clone();
    for n in 1..=disc.n_steps() {
        let q = disc.partition.degree(n);
        let src = SourceMoments::sample(f, disc.step_quadrature(n), &disc.time_basis(n), q);
        let u = solve_timestep(&disc, n, &prev_end, &src, &mut cache).map_err(|e| e.at_step(n))?;
        let tb = disc.time_basis(n);
        prev_end = combine_modes(&u, |j| tb.orthonormal_at_end(j));
        modes.push(u);
        sources.push(src);
    }
    Ok(DiscreteSolution {
        disc,
        initial,
        modes,
        sources,
    })
}

/// Implicit Euler: `(u^n - u^{n-1}, v) + tau (grad u^n, grad v) = int (f, v) dt`.
/// Returns `u^0, ..., u^N`.
pub fn backward_euler_oracle(
    disc: &Discretization,
    f: Source,
    u0: &(dyn Fn(Point) -> f64 + Sync),
) -> Result<Vec<Vec<f64>>> {
    if disc.partition.degrees().iter().any(|&q| q != 0) {
        return Err(Error::InvalidArgument(
            "backward Euler requires q = 0 on every step".into(),
        ));
    }
    let mut out = vec![project_initial(disc.space(0), u0)?];
    let (gs, gw) = gauss_legendre(6);
    for n in 1..=disc.n_steps() {
        let space = disc.space(n);
        let tr = disc.transition(n);
        let tau = disc.partition.tau(n);
        let (t0, _) = disc.partition.interval(n);
        let m = space.assemble_mass()?;
        let a = space.assemble_stiffness()?;
        let mut b = TripletBuilder::new(space.n_dofs(), space.n_dofs());
        for (i, j, v) in m.entries() {
            b.push(i, j, v);
        }
        for (i, j, v) in a.entries() {
            b.push(i, j, tau * v);
        }
        let lu = b.build()?.lu()?;
        let mut rhs = cross_mass(tr, disc.space(n - 1), &out[n - 1], space);
        let quad = disc.step_quadrature(n);
        let (mut v, mut g) = (Vec::new(), Vec::new());
        for t in 0..tr.fine.n_elements() {
            let kn = tr.to_next[t];
            for (&x, &w) in quad.points[t].iter().zip(&quad.weights[t]) {
                let fi: f64 = gs
                    .iter()
                    .zip(&gw)
                    .map(|(&s, &wt)| wt * 0.5 * tau * f(x, t0 + 0.5 * tau * (s + 1.0)))
                    .sum();
                space.eval_at(kn, x, &mut v, &mut g);
                for (k, &d) in space.element_dofs(kn).iter().enumerate() {
                    if d != FIXED {
                        rhs[d] += fi * w * v[k];
                    }
                }
            }
        }
        out.push(lu.solve(&rhs));
    }
    Ok(out)
}
