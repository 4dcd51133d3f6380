//! Discrete Riesz lifts for dual norms: one global reference space, and
//! local `H^1_0(omega_a)` spaces built from its elements.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::Result;
use crate::linalg::{dot, DenseCholesky, SparseCholesky};
use crate::mesh::{Forest, MeshLevel};
use crate::reconstruction::MeshQuadrature;
use crate::spaces::{HpSpace, FIXED};

/// Reference space parameters: extra uniform bisections of the common
/// refinement of all meshes and the degree increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RieszConfig {
    pub refinements: usize,
    pub extra_degree: usize,
}

impl Default for RieszConfig {
    fn default() -> Self {
        Self {
            refinements: 1,
            extra_degree: 1,
        }
    }
}

/// Basis values and gradients of a space at the points of a quadrature.
#[derive(Debug, Clone)]
struct Tabulation {
    /// Per element: `len` shape functions per point.
    len: Vec<usize>,
    vals: Vec<Vec<f64>>,
    grads: Vec<Vec<[f64; 2]>>,
}

impl Tabulation {
    fn new(
        space: &HpSpace,
        elements: impl Iterator<Item = usize>,
        rule: &crate::basis::quadrature::TriangleRule,
    ) -> Self {
        let (mut len, mut vals, mut grads) = (Vec::new(), Vec::new(), Vec::new());
        let (mut v, mut g) = (Vec::new(), Vec::new());
        for t in elements {
            let mut ev = Vec::new();
            let mut eg = Vec::new();
            for lam in &rule.points {
                space.eval_local(t, *lam, &mut v, &mut g);
                ev.extend_from_slice(&v);
                eg.extend_from_slice(&g);
            }
            len.push(v.len());
            vals.push(ev);
            grads.push(eg);
        }
        Self { len, vals, grads }
    }
}

/// The global reference space `H^1_0` surrogate.
pub struct ReferenceSpace {
    pub config: RieszConfig,
    pub mesh: Arc<MeshLevel>,
    pub space: HpSpace,
    pub quad: MeshQuadrature,
    chol: SparseCholesky,
    tab: Tabulation,
}

impl ReferenceSpace {
    /// Common refinement of `meshes`, bisected `config.refinements` times,
    /// with degree `max_degree + config.extra_degree`.
    pub fn new(
        forest: &mut Forest,
        meshes: &[&MeshLevel],
        max_degree: usize,
        config: RieszConfig,
    ) -> Result<Self> {
        let common = forest.common_refinement_all(meshes)?;
        let mesh = Arc::new(forest.refine_uniform(&common, config.refinements)?);
        let degree = max_degree + config.extra_degree;
        let space = HpSpace::uniform(mesh.clone(), degree)?;
        let chol = SparseCholesky::new(&space.assemble_stiffness()?)?;
        let quad = MeshQuadrature::new(&mesh, 2 * degree + 2);
        let tab = Tabulation::new(&space, 0..mesh.n_elements(), &quad.rule);
        Ok(Self {
            config,
            mesh,
            space,
            quad,
            chol,
            tab,
        })
    }

    pub fn degree(&self) -> usize {
        self.space.max_degree()
    }

    pub fn n_dofs(&self) -> usize {
        self.space.n_dofs()
    }

    /// Load `(s, v) + (g, grad v)` from values at the quadrature points.
    pub fn load(&self, mut sg: impl FnMut(usize, usize) -> (f64, [f64; 2])) -> Vec<f64> {
        let mut b = vec![0.0; self.space.n_dofs()];
        for e in 0..self.mesh.n_elements() {
            let nb = self.tab.len[e];
            let dofs = self.space.element_dofs(e);
            for (k, &w) in self.quad.weights[e].iter().enumerate() {
                let (s, g) = sg(e, k);
                let (s, g) = (s * w, [g[0] * w, g[1] * w]);
                let v = &self.tab.vals[e][k * nb..(k + 1) * nb];
                let dg = &self.tab.grads[e][k * nb..(k + 1) * nb];
                for l in 0..nb {
                    let d = dofs[l];
                    if d != FIXED {
                        b[d] += s * v[l] + g[0] * dg[l][0] + g[1] * dg[l][1];
                    }
                }
            }
        }
        b
    }

    /// `||l||^2` in the dual of the reference space, `l` given by its load.
    pub fn dual_norm_sq(&self, b: &[f64]) -> f64 {
        if b.is_empty() {
            return 0.0;
        }
        dot(&self.chol.solve(b), b).max(0.0)
    }

    /// Riesz representer of a load.
    pub fn lift(&self, b: &[f64]) -> Vec<f64> {
        self.chol.solve(b)
    }
}

/// Degree of the local spaces above the reference degree.
pub const LOCAL_EXTRA_DEGREE: usize = 2;

/// Discrete `H^1_0(omega_a)` on the reference elements inside a patch, with
/// degree raised by [`LOCAL_EXTRA_DEGREE`].
pub struct LocalSpace {
    /// Reference element of each local element.
    pub elements: Vec<usize>,
    space: HpSpace,
    chol: DenseCholesky,
    tab: Tabulation,
}

impl LocalSpace {
    /// `elements` are reference-mesh elements covering the patch.
    pub fn new(forest: &Forest, reference: &ReferenceSpace, elements: &[usize]) -> Result<Self> {
        let leaves: Vec<_> = elements
            .iter()
            .map(|&e| reference.mesh.leaves()[e])
            .collect();
        let mesh = Arc::new(forest.mesh_from_leaves(leaves)?);
        let index: HashMap<_, _> = reference
            .mesh
            .leaves()
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i))
            .collect();
        let elements: Vec<usize> = mesh.leaves().iter().map(|l| index[l]).collect();
        let space = HpSpace::uniform(mesh.clone(), reference.degree() + LOCAL_EXTRA_DEGREE)?;
        let chol = DenseCholesky::new(&space.assemble_stiffness()?.to_dense())?;
        let tab = Tabulation::new(&space, 0..mesh.n_elements(), &reference.quad.rule);
        Ok(Self {
            elements,
            space,
            chol,
            tab,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.space.n_dofs()
    }

    /// Load from values at the reference quadrature points; `sg` receives
    /// the reference element and point index.
    pub fn load(
        &self,
        reference: &ReferenceSpace,
        mut sg: impl FnMut(usize, usize) -> (f64, [f64; 2]),
    ) -> Vec<f64> {
        let mut b = vec![0.0; self.space.n_dofs()];
        for (i, &e) in self.elements.iter().enumerate() {
            let nb = self.tab.len[i];
            let dofs = self.space.element_dofs(i);
            for (k, &w) in reference.quad.weights[e].iter().enumerate() {
                let (s, g) = sg(e, k);
                let (s, g) = (s * w, [g[0] * w, g[1] * w]);
                let v = &self.tab.vals[i][k * nb..(k + 1) * nb];
                let dg = &self.tab.grads[i][k * nb..(k + 1) * nb];
                for l in 0..nb {
                    let d = dofs[l];
                    if d != FIXED {
                        b[d] += s * v[l] + g[0] * dg[l][0] + g[1] * dg[l][1];
                    }
                }
            }
        }
        b
    }

    pub fn dual_norm_sq(&self, b: &[f64]) -> f64 {
        if b.is_empty() {
            return 0.0;
        }
        dot(&self.chol.solve(b), b).max(0.0)
    }
}
