//! Continuous hp finite element spaces with the edge minimum rule.

use std::sync::Arc;

use crate::basis::quadrature::triangle_rule;
use crate::basis::scalar::{ScalarShape, EDGE_VERTICES};
use crate::error::{Error, Result};
use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::mesh::{barycentric, barycentric_gradients, MeshLevel, Point};

/// Sentinel for a constrained (Dirichlet) local dof.
pub const FIXED: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct HpSpace {
    mesh: Arc<MeshLevel>,
    degrees: Vec<usize>,
    edge_degrees: Vec<usize>,
    shapes: Vec<ScalarShape>,
    /// Global dof per local shape function, `FIXED` if constrained.
    dofs: Vec<Vec<usize>>,
    n_dofs: usize,
    dirichlet: bool,
}

impl HpSpace {
    /// Space with homogeneous Dirichlet conditions on the boundary.
    pub fn new(mesh: Arc<MeshLevel>, degrees: Vec<usize>) -> Result<Self> {
        Self::build(mesh, degrees, true)
    }

    /// Space without boundary conditions.
    pub fn unconstrained(mesh: Arc<MeshLevel>, degrees: Vec<usize>) -> Result<Self> {
        Self::build(mesh, degrees, false)
    }

    pub fn uniform(mesh: Arc<MeshLevel>, p: usize) -> Result<Self> {
        let n = mesh.n_elements();
        Self::new(mesh, vec![p; n])
    }

    fn build(mesh: Arc<MeshLevel>, degrees: Vec<usize>, dirichlet: bool) -> Result<Self> {
        if degrees.len() != mesh.n_elements() {
            return Err(Error::InvalidArgument(format!(
                "{} degrees for {} elements",
                degrees.len(),
                mesh.n_elements()
            )));
        }
        if degrees.contains(&0) {
            return Err(Error::InvalidArgument(
                "polynomial degrees must be >= 1".into(),
            ));
        }
        let mut edge_degrees = vec![usize::MAX; mesh.n_edges()];
        for (t, te) in mesh.tri_edges().iter().enumerate() {
            for &e in te {
                edge_degrees[e] = edge_degrees[e].min(degrees[t]);
            }
        }
        let mut next = 0usize;
        let mut vertex_dof = vec![FIXED; mesh.n_vertices()];
        for (v, d) in vertex_dof.iter_mut().enumerate() {
            if !(dirichlet && mesh.is_boundary_vertex(v)) {
                *d = next;
                next += 1;
            }
        }
        let mut edge_first = vec![FIXED; mesh.n_edges()];
        for (e, first) in edge_first.iter_mut().enumerate() {
            let n = edge_degrees[e].saturating_sub(1);
            if n > 0 && !(dirichlet && mesh.is_boundary_edge(e)) {
                *first = next;
                next += n;
            }
        }
        let ids = mesh.point_ids();
        let mut shapes = Vec::with_capacity(mesh.n_elements());
        let mut dofs = Vec::with_capacity(mesh.n_elements());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let te = mesh.tri_edges()[t];
            let mut flip = [false; 3];
            for (k, f) in flip.iter_mut().enumerate() {
                let [a, b] = EDGE_VERTICES[k];
                *f = ids[tri[a]] > ids[tri[b]];
            }
            let shape = ScalarShape {
                degree: degrees[t],
                edge_degrees: te.map(|e| edge_degrees[e]),
                edge_flip: flip,
            };
            let mut d = Vec::with_capacity(shape.len());
            d.extend(tri.iter().map(|&v| vertex_dof[v]));
            for k in 0..3 {
                let f = edge_first[te[k]];
                for i in 0..shape.n_edge(k) {
                    d.push(if f == FIXED { FIXED } else { f + i });
                }
            }
            for _ in 0..shape.n_interior() {
                d.push(next);
                next += 1;
            }
            shapes.push(shape);
            dofs.push(d);
        }
        Ok(Self {
            mesh,
            degrees,
            edge_degrees,
            shapes,
            dofs,
            n_dofs: next,
            dirichlet,
        })
    }

    pub fn mesh(&self) -> &Arc<MeshLevel> {
        &self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, t: usize) -> usize {
        self.degrees[t]
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(1)
    }

    pub fn edge_degrees(&self) -> &[usize] {
        &self.edge_degrees
    }

    pub fn is_dirichlet(&self) -> bool {
        self.dirichlet
    }

    pub fn shape(&self, t: usize) -> &ScalarShape {
        &self.shapes[t]
    }

    pub fn element_dofs(&self, t: usize) -> &[usize] {
        &self.dofs[t]
    }

    /// Dimension predicted by counting vertices, edges and interiors.
    pub fn expected_dim(&self) -> usize {
        let m = &self.mesh;
        let v = (0..m.n_vertices())
            .filter(|&v| !(self.dirichlet && m.is_boundary_vertex(v)))
            .count();
        let e: usize = (0..m.n_edges())
            .filter(|&e| !(self.dirichlet && m.is_boundary_edge(e)))
            .map(|e| self.edge_degrees[e].saturating_sub(1))
            .sum();
        let i: usize = self
            .degrees
            .iter()
            .map(|&p| if p >= 3 { (p - 1) * (p - 2) / 2 } else { 0 })
            .sum();
        v + e + i
    }

    /// Shape values and gradients on element `t` at barycentric point `lam`.
    pub fn eval_local(
        &self,
        t: usize,
        lam: [f64; 3],
        vals: &mut Vec<f64>,
        grads: &mut Vec<[f64; 2]>,
    ) {
        let gl = barycentric_gradients(&self.mesh.element_points(t));
        self.shapes[t].eval(lam, &gl, vals, grads);
    }

    /// Shape values and gradients on element `t` at physical point `x`.
    pub fn eval_at(&self, t: usize, x: Point, vals: &mut Vec<f64>, grads: &mut Vec<[f64; 2]>) {
        let pts = self.mesh.element_points(t);
        let lam = barycentric(&pts, x);
        let gl = barycentric_gradients(&pts);
        self.shapes[t].eval(lam, &gl, vals, grads);
    }

    /// Value and gradient of the function with coefficients `c` on element
    /// `t` at physical point `x`.
    pub fn value_grad(&self, c: &[f64], t: usize, x: Point) -> (f64, [f64; 2]) {
        let mut v = Vec::new();
        let mut g = Vec::new();
        self.eval_at(t, x, &mut v, &mut g);
        self.combine(c, t, &v, &g)
    }

    /// Combines tabulated shapes with global coefficients.
    pub fn combine(
        &self,
        c: &[f64],
        t: usize,
        vals: &[f64],
        grads: &[[f64; 2]],
    ) -> (f64, [f64; 2]) {
        let mut u = 0.0;
        let mut du = [0.0; 2];
        for (k, &d) in self.dofs[t].iter().enumerate() {
            if d == FIXED {
                continue;
            }
            let ck = c[d];
            u += ck * vals[k];
            du[0] += ck * grads[k][0];
            du[1] += ck * grads[k][1];
        }
        (u, du)
    }

    fn assemble(&self, stiff: bool) -> Result<SparseMatrix> {
        let mut b = TripletBuilder::new(self.n_dofs, self.n_dofs);
        let mut vals = Vec::new();
        let mut grads = Vec::new();
        for t in 0..self.mesh.n_elements() {
            let p = self.degrees[t];
            let rule = triangle_rule(2 * p);
            let area2 = 2.0 * self.mesh.area(t);
            let d = &self.dofs[t];
            let n = d.len();
            let mut local = vec![0.0; n * n];
            for (lam, w) in rule.points.iter().zip(&rule.weights) {
                self.eval_local(t, *lam, &mut vals, &mut grads);
                let w = w * area2;
                for i in 0..n {
                    for j in 0..n {
                        local[i * n + j] += w * if stiff {
                            grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]
                        } else {
                            vals[i] * vals[j]
                        };
                    }
                }
            }
            for i in 0..n {
                if d[i] == FIXED {
                    continue;
                }
                for j in 0..n {
                    if d[j] != FIXED {
                        b.push(d[i], d[j], local[i * n + j]);
                    }
                }
            }
        }
        b.build()
    }

    /// `A_ij = (grad phi_i, grad phi_j)`.
    pub fn assemble_stiffness(&self) -> Result<SparseMatrix> {
        self.assemble(true)
    }

    /// `M_ij = (phi_i, phi_j)`.
    pub fn assemble_mass(&self) -> Result<SparseMatrix> {
        self.assemble(false)
    }

    /// Load vector `(g, phi_i)` for a pointwise source, integrated with a
    /// rule of degree `2 p_K + extra` on each element.
    pub fn assemble_load(&self, g: impl Fn(Point) -> f64, extra: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs];
        let mut vals = Vec::new();
        let mut grads = Vec::new();
        for t in 0..self.mesh.n_elements() {
            let rule = triangle_rule(2 * self.degrees[t] + extra);
            let pts = self.mesh.element_points(t);
            let area2 = 2.0 * self.mesh.area(t);
            for (lam, w) in rule.points.iter().zip(&rule.weights) {
                self.eval_local(t, *lam, &mut vals, &mut grads);
                let x = crate::basis::rtn::bary_to_point(&pts, *lam);
                let gw = g(x) * w * area2;
                for (k, &d) in self.dofs[t].iter().enumerate() {
                    if d != FIXED {
                        out[d] += gw * vals[k];
                    }
                }
            }
        }
        out
    }

    /// Coefficients of the nodal-free function equal to 1 everywhere.
    /// Only meaningful without Dirichlet constraints.
    pub fn constant_one(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n_dofs];
        for t in 0..self.mesh.n_elements() {
            for &d in &self.dofs[t][..3] {
                if d != FIXED {
                    c[d] = 1.0;
                }
            }
        }
        c
    }
}
