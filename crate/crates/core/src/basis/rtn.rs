//! Raviart-Thomas-Nédélec elements `RTN_p(K) = P_p(K)^2 + x P_p(K)` on
//! physical triangles.
//!
//! The basis is dual to the degrees of freedom
//! * per edge `E` (global orientation `a -> b`, normal `n_E` = tangent rotated
//!   clockwise): `|E|^{-1} int_E v.n_E P_k(s) ds`, `k = 0..=p`;
//! * interior: `|K|^{-1} int_K v.(m e_d) dx` for orthonormal polynomials `m`
//!   of degree `<= p - 1`.
//!
//! Primal functions and divergences use the element's orthonormal basis.
//!
//! Degrees of freedom depend only on the physical edge, so two elements that
//! share an edge produce identical normal traces for the shared unknown.

use faer::Mat;

use super::dubiner::OrthoBasis;
use super::legendre::legendre_values;
use super::quadrature::{gauss_legendre, triangle_rule};
use super::scalar::dot;
use crate::error::{Error, Result};
use crate::mesh::triangle_area;

/// `dim RTN_p` on a triangle.
pub fn rtn_dim(p: usize) -> usize {
    (p + 1) * (p + 3)
}

/// Global normal of an oriented edge `a -> b` (unit length).
pub fn edge_normal(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let t = [b[0] - a[0], b[1] - a[1]];
    let l = (t[0] * t[0] + t[1] * t[1]).sqrt();
    [t[1] / l, -t[0] / l]
}

/// One element's RTN basis.
#[derive(Debug, Clone)]
pub struct RtnElement {
    pub order: usize,
    pub vertices: [[f64; 2]; 3],
    /// Edge `k` (opposite local vertex `k`) endpoints in global orientation.
    pub edges: [[[f64; 2]; 2]; 3],
    ortho: OrthoBasis,
    center: [f64; 2],
    scale: f64,
    /// Columns: basis functions; rows: primal functions.
    coeffs: Mat<f64>,
    /// `div(basis_k) = sum_i div[i][k] ortho_i`.
    div: Mat<f64>,
}

impl RtnElement {
    /// Builds the dual basis. `edges[k]` must hold the endpoints of the edge
    /// opposite local vertex `k`, ordered by global orientation.
    pub fn new(vertices: [[f64; 2]; 3], edges: [[[f64; 2]; 2]; 3], order: usize) -> Result<Self> {
        let ortho = OrthoBasis::new(order, &vertices);
        let center = [
            (vertices[0][0] + vertices[1][0] + vertices[2][0]) / 3.0,
            (vertices[0][1] + vertices[1][1] + vertices[2][1]) / 3.0,
        ];
        let scale = crate::mesh::diameter(&vertices);
        let primal = Primal {
            ortho: &ortho,
            center,
            scale,
        };
        let n = rtn_dim(order);
        let mut dofs = Mat::<f64>::zeros(n, n);
        let mut row = 0;
        // Edge moments.
        let (gs, gw) = gauss_legendre(order + 2);
        let mut leg = Vec::new();
        let mut prim = Vec::new();
        for e in &edges {
            let nrm = edge_normal(e[0], e[1]);
            for (&s, &w) in gs.iter().zip(&gw) {
                let x = lerp(e[0], e[1], 0.5 * (s + 1.0));
                legendre_values(order, s, &mut leg);
                primal.values(x, &mut prim);
                for k in 0..=order {
                    for (j, v) in prim.iter().enumerate() {
                        dofs[(row + k, j)] += 0.5 * w * leg[k] * dot(*v, nrm);
                    }
                }
            }
            row += order + 1;
        }
        // Interior moments.
        if order > 0 {
            let test = OrthoBasis::new(order - 1, &vertices);
            let rule = triangle_rule(2 * order + 1);
            let mut tv = Vec::new();
            for (lam, w) in rule.points.iter().zip(&rule.weights) {
                let x = bary_to_point(&vertices, *lam);
                test.values(x, &mut tv);
                primal.values(x, &mut prim);
                for (m, tm) in tv.iter().enumerate() {
                    for (j, v) in prim.iter().enumerate() {
                        // Reference weights sum to 1/2, so 2w is the normalised weight.
                        dofs[(row + 2 * m, j)] += 2.0 * w * tm * v[0];
                        dofs[(row + 2 * m + 1, j)] += 2.0 * w * tm * v[1];
                    }
                }
            }
            row += 2 * tv.len();
        }
        debug_assert_eq!(row, n);
        let lu = dofs.partial_piv_lu();
        let coeffs = {
            use faer::linalg::solvers::Solve;
            lu.solve(Mat::<f64>::identity(n, n))
        };
        if !coeffs.norm_max().is_finite() {
            return Err(Error::Singular(format!(
                "RTN_{order} degrees of freedom are not unisolvent on {vertices:?}"
            )));
        }
        let div = primal.divergence(&vertices) * &coeffs;
        Ok(Self {
            order,
            vertices,
            edges,
            ortho,
            center,
            scale,
            coeffs,
            div,
        })
    }

    pub fn len(&self) -> usize {
        rtn_dim(self.order)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Local index of moment `k` on edge `e`.
    pub fn edge_dof(&self, e: usize, k: usize) -> usize {
        e * (self.order + 1) + k
    }

    pub fn interior_range(&self) -> std::ops::Range<usize> {
        3 * (self.order + 1)..self.len()
    }

    /// Basis values at `x`.
    pub fn values(&self, x: [f64; 2], out: &mut Vec<[f64; 2]>) {
        let mut prim = Vec::new();
        self.primal().values(x, &mut prim);
        let n = self.len();
        out.clear();
        out.resize(n, [0.0; 2]);
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = [0.0; 2];
            for (j, p) in prim.iter().enumerate() {
                let c = self.coeffs[(j, k)];
                acc[0] += c * p[0];
                acc[1] += c * p[1];
            }
            *o = acc;
        }
    }

    /// Divergences of all basis functions at `x`.
    pub fn divergences(&self, x: [f64; 2], out: &mut Vec<f64>) {
        let mut ov = Vec::new();
        self.ortho.values(x, &mut ov);
        out.clear();
        for k in 0..self.len() {
            out.push((0..ov.len()).map(|i| self.div[(i, k)] * ov[i]).sum());
        }
    }

    /// Matrix `D` with `div(basis_k) = sum_i D[i][k] psi_i` in this
    /// element's orthonormal basis of degree `<= order`.
    pub fn divergence_matrix(&self) -> &Mat<f64> {
        &self.div
    }

    pub fn ortho(&self) -> &OrthoBasis {
        &self.ortho
    }

    fn primal(&self) -> Primal<'_> {
        Primal {
            ortho: &self.ortho,
            center: self.center,
            scale: self.scale,
        }
    }

    /// Evaluates `sum_k c_k basis_k` at `x`.
    pub fn combine(&self, coef: &[f64], x: [f64; 2]) -> [f64; 2] {
        let mut v = Vec::new();
        self.values(x, &mut v);
        let mut acc = [0.0; 2];
        for (c, b) in coef.iter().zip(&v) {
            acc[0] += c * b[0];
            acc[1] += c * b[1];
        }
        acc
    }

    pub fn area(&self) -> f64 {
        triangle_area(&self.vertices)
    }
}

/// Primal functions: `(psi, 0)`, `(0, psi)` for all orthonormal `psi`, then
/// `xi psi` for `psi` of total degree `p`, with `xi = (x - c) / h`.
struct Primal<'a> {
    ortho: &'a OrthoBasis,
    center: [f64; 2],
    scale: f64,
}

impl Primal<'_> {
    fn xi(&self, x: [f64; 2]) -> [f64; 2] {
        [
            (x[0] - self.center[0]) / self.scale,
            (x[1] - self.center[1]) / self.scale,
        ]
    }

    fn values(&self, x: [f64; 2], out: &mut Vec<[f64; 2]>) {
        let mut ov = Vec::new();
        self.ortho.values(x, &mut ov);
        let xi = self.xi(x);
        out.clear();
        for &m in &ov {
            out.push([m, 0.0]);
            out.push([0.0, m]);
        }
        for &m in &ov[OrthoBasis::degree_start(self.ortho.degree)..] {
            out.push([xi[0] * m, xi[1] * m]);
        }
    }

    /// Divergences of the primal functions projected on the orthonormal
    /// basis (exact, since they lie in its span).
    fn divergence(&self, vertices: &[[f64; 2]; 3]) -> Mat<f64> {
        let b = self.ortho;
        let nb = b.len();
        let top = OrthoBasis::degree_start(b.degree);
        let np = 2 * nb + (nb - top);
        let mut d = Mat::<f64>::zeros(nb, np);
        let rule = triangle_rule(2 * b.degree);
        let (mut v, mut g) = (Vec::new(), Vec::new());
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let x = bary_to_point(vertices, *lam);
            b.values_and_grads(x, &mut v, &mut g);
            let xi = self.xi(x);
            let w = 2.0 * w;
            for j in 0..nb {
                for i in 0..nb {
                    d[(i, 2 * j)] += w * g[j][0] * v[i];
                    d[(i, 2 * j + 1)] += w * g[j][1] * v[i];
                }
            }
            for (c, j) in (top..nb).enumerate() {
                let dv = (2.0 * v[j] + xi[0] * g[j][0] * self.scale + xi[1] * g[j][1] * self.scale)
                    / self.scale;
                for i in 0..nb {
                    d[(i, 2 * nb + c)] += w * dv * v[i];
                }
            }
        }
        d
    }
}

pub(crate) fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

pub(crate) fn bary_to_point(v: &[[f64; 2]; 3], lam: [f64; 3]) -> [f64; 2] {
    [
        lam[0] * v[0][0] + lam[1] * v[1][0] + lam[2] * v[2][0],
        lam[0] * v[0][1] + lam[1] * v[1][1] + lam[2] * v[2][1],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_element(p: usize) -> RtnElement {
        let v = [[0.1, 0.2], [0.9, 0.35], [0.3, 0.8]];
        let edges = [[v[1], v[2]], [v[0], v[2]], [v[1], v[0]]];
        RtnElement::new(v, edges, p).unwrap()
    }

    #[test]
    fn dimension_formula() {
        for p in 0..6 {
            assert_eq!(sample_element(p).len(), (p + 1) * (p + 3));
        }
    }

    #[test]
    fn divergence_of_constant_and_identity_fields() {
        let el = sample_element(2);
        // Represent (a, b) and x by solving for coefficients via the dofs:
        // evaluate dofs of the target field through least squares on samples.
        let fields: [(fn([f64; 2]) -> [f64; 2], f64); 2] =
            [(|_| [0.7, -1.3], 0.0), (|x| [x[0], x[1]], 2.0)];
        for (field, expected) in fields {
            let coef = interpolate(&el, field);
            let d = el.divergence_matrix();
            let mut mv = Vec::new();
            el.ortho().values([0.4, 0.4], &mut mv);
            let div: f64 = (0..el.len())
                .map(|k| coef[k] * (0..mv.len()).map(|i| d[(i, k)] * mv[i]).sum::<f64>())
                .sum();
            assert!((div - expected).abs() < 1e-11, "{div} vs {expected}");
        }
    }

    /// Coefficients of a field in RTN_p by least squares on sample points.
    fn interpolate(el: &RtnElement, f: fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let rule = triangle_rule(2 * el.order + 4);
        let n = el.len();
        let mut a = Mat::<f64>::zeros(n, n);
        let mut rhs = Mat::<f64>::zeros(n, 1);
        let mut v = Vec::new();
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let x = bary_to_point(&el.vertices, *lam);
            el.values(x, &mut v);
            let fx = f(x);
            for i in 0..n {
                rhs[(i, 0)] += w * dot(v[i], fx);
                for j in 0..n {
                    a[(i, j)] += w * dot(v[i], v[j]);
                }
            }
        }
        use faer::linalg::solvers::Solve;
        let sol = a.partial_piv_lu().solve(rhs);
        (0..n).map(|i| sol[(i, 0)]).collect()
    }

    #[test]
    fn divergence_matches_finite_differences() {
        let el = sample_element(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let coef: Vec<f64> = (0..el.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut divs = Vec::new();
        let h = 1e-5;
        for _ in 0..10 {
            let lam = {
                let a: f64 = rng.random_range(0.1..0.8);
                let b: f64 = rng.random_range(0.1..(0.9 - a));
                [1.0 - a - b, a, b]
            };
            let x = bary_to_point(&el.vertices, lam);
            el.divergences(x, &mut divs);
            let exact: f64 = coef.iter().zip(&divs).map(|(c, d)| c * d).sum();
            let fx = |dx: f64, dy: f64| el.combine(&coef, [x[0] + dx, x[1] + dy]);
            let fd = (fx(h, 0.0)[0] - fx(-h, 0.0)[0]) / (2.0 * h)
                + (fx(0.0, h)[1] - fx(0.0, -h)[1]) / (2.0 * h);
            assert!(
                (fd - exact).abs() < 1e-6 * (1.0 + exact.abs()),
                "{fd} {exact}"
            );
        }
    }

    #[test]
    fn normal_trace_vanishes_on_other_edges() {
        let el = sample_element(3);
        let mut v = Vec::new();
        for e in 0..3 {
            let nrm = edge_normal(el.edges[e][0], el.edges[e][1]);
            for t in [0.1, 0.5, 0.77] {
                let x = lerp(el.edges[e][0], el.edges[e][1], t);
                el.values(x, &mut v);
                for k in 0..el.len() {
                    let on_this_edge = (e * 4..e * 4 + 4).contains(&k);
                    if !on_this_edge {
                        assert!(dot(v[k], nrm).abs() < 1e-10, "edge {e} fn {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn coefficients_stay_bounded_on_small_elements() {
        let v = [[0.0, 0.0], [0.0625, 0.0], [0.0, 0.0625]];
        let edges = [[v[1], v[2]], [v[0], v[2]], [v[1], v[0]]];
        for p in 0..6 {
            let el = RtnElement::new(v, edges, p).unwrap();
            assert!(
                el.coeffs.norm_max() < 10.0,
                "p {p}: {}",
                el.coeffs.norm_max()
            );
        }
    }
}
