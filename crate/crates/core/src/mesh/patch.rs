//! Vertex patches of a coarse mesh, resolved on a finer mesh.

use super::geometry::{barycentric, Point};
use super::level::MeshLevel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchKind {
    Interior,
    Boundary,
}

#[derive(Debug, Clone)]
pub struct Patch {
    /// Vertex index in the coarse mesh.
    pub vertex: usize,
    pub kind: PatchKind,
    /// Coarse elements sharing the vertex.
    pub coarse_elements: Vec<usize>,
    /// Fine elements inside the patch, in increasing order.
    pub elements: Vec<usize>,
    /// Hat function values at the three vertices of each fine element.
    pub hat: Vec<[f64; 3]>,
    /// Constant hat gradient on each fine element.
    pub hat_grad: Vec<[f64; 2]>,
    /// Fine edges on the patch boundary.
    pub boundary_edges: Vec<usize>,
    /// Fine edges on the patch boundary where the hat function vanishes;
    /// the flux normal trace is forced to zero there.
    pub gamma_edges: Vec<usize>,
    /// Mixed finite element degree: max fine degree + 1.
    pub degree: usize,
    pub diameter: f64,
}

impl Patch {
    pub fn is_interior(&self) -> bool {
        self.kind == PatchKind::Interior
    }

    /// Position of fine element `t` in `elements`.
    pub fn local_index(&self, t: usize) -> Option<usize> {
        self.elements.binary_search(&t).ok()
    }

    /// Hat value on local element `i` at barycentric point `lam` of that
    /// fine element.
    pub fn hat_at(&self, i: usize, lam: [f64; 3]) -> f64 {
        let h = self.hat[i];
        h[0] * lam[0] + h[1] * lam[1] + h[2] * lam[2]
    }
}

/// One patch per vertex of `coarse`, each resolved on `fine`.
/// `fine_to_coarse[t]` is the coarse element containing fine element `t`;
/// `fine_degrees[t]` is the polynomial degree attached to fine element `t`.
pub fn vertex_patches(
    coarse: &MeshLevel,
    fine: &MeshLevel,
    fine_to_coarse: &[usize],
    fine_degrees: &[usize],
) -> Result<Vec<Patch>> {
    if coarse.forest_id() != fine.forest_id() {
        return Err(Error::ForestMismatch(coarse.forest_id(), fine.forest_id()));
    }
    if fine_to_coarse.len() != fine.n_elements() || fine_degrees.len() != fine.n_elements() {
        return Err(Error::InvalidArgument(
            "fine element maps have the wrong length".into(),
        ));
    }
    let mut children = vec![Vec::new(); coarse.n_elements()];
    for (t, &c) in fine_to_coarse.iter().enumerate() {
        children[c].push(t);
    }
    let mut in_patch = vec![false; fine.n_elements()];
    let mut patches = Vec::with_capacity(coarse.n_vertices());
    for a in 0..coarse.n_vertices() {
        let coarse_elements = coarse.vertex_triangles(a).to_vec();
        let mut elements = Vec::new();
        let mut hat = Vec::new();
        let mut hat_grad = Vec::new();
        let mut degree = 0;
        for &c in &coarse_elements {
            elements.extend(children[c].iter().copied());
        }
        elements.sort_unstable();
        for &t in &elements {
            let c = fine_to_coarse[t];
            let cv = coarse.element_points(c);
            let k = coarse.triangles()[c]
                .iter()
                .position(|&v| v == a)
                .expect("vertex in element");
            let fv = fine.element_points(t);
            let h = fv.map(|x| barycentric(&cv, x)[k]);
            hat.push(h);
            let g = super::geometry::barycentric_gradients(&cv)[k];
            hat_grad.push(g);
            degree = degree.max(fine_degrees[t] + 1);
            in_patch[t] = true;
        }
        let mut boundary_edges = Vec::new();
        let mut gamma_edges = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (i, &t) in elements.iter().enumerate() {
            for (k, &e) in fine.tri_edges()[t].iter().enumerate() {
                if !seen.insert(e) {
                    continue;
                }
                let [t0, t1] = fine.edge_triangles(e);
                let inside = |x: Option<usize>| x.is_some_and(|x| in_patch[x]);
                if inside(t0) && inside(t1) {
                    continue;
                }
                boundary_edges.push(e);
                // the hat vanishes on the whole edge
                let h = hat[i];
                if h[(k + 1) % 3].abs() < 1e-12 && h[(k + 2) % 3].abs() < 1e-12 {
                    gamma_edges.push(e);
                }
            }
        }
        for &t in &elements {
            in_patch[t] = false;
        }
        let kind = if coarse.is_boundary_vertex(a) {
            PatchKind::Boundary
        } else {
            PatchKind::Interior
        };
        let diameter = patch_diameter(coarse, &coarse_elements);
        patches.push(Patch {
            vertex: a,
            kind,
            coarse_elements,
            elements,
            hat,
            hat_grad,
            boundary_edges,
            gamma_edges,
            degree,
            diameter,
        });
    }
    Ok(patches)
}

fn patch_diameter(mesh: &MeshLevel, elements: &[usize]) -> f64 {
    let pts: Vec<Point> = elements
        .iter()
        .flat_map(|&t| mesh.element_points(t))
        .collect();
    let mut d: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d = d.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
        }
    }
    d
}
