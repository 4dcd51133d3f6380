//! A conforming triangulation given by a cut of the refinement forest.

use std::collections::HashMap;

use super::forest::{Forest, NodeId};
use super::geometry::{barycentric, diameter, shape_ratio, signed_area, triangle_area, Point};
use crate::error::{Error, Result};

/// Conforming mesh. Local vertices are numbered by increasing forest point
/// id, so "global" edge orientation (low id to high id) is shared by every
/// mesh of the same forest.
#[derive(Debug, Clone)]
pub struct MeshLevel {
    forest_id: u64,
    leaves: Vec<NodeId>,
    vertices: Vec<Point>,
    point_ids: Vec<u32>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[usize; 3]>,
    edge_tris: Vec<[Option<usize>; 2]>,
    boundary_vertex: Vec<bool>,
    vertex_tris: Vec<Vec<usize>>,
    levels: Vec<u32>,
}

impl MeshLevel {
    pub(crate) fn from_forest(forest: &Forest, leaves: Vec<NodeId>) -> Result<Self> {
        let mut pids: Vec<u32> = leaves.iter().flat_map(|&l| forest.node(l).verts).collect();
        pids.sort_unstable();
        pids.dedup();
        let local: HashMap<u32, usize> = pids.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let vertices = pids.iter().map(|&p| forest.points()[p as usize]).collect();
        let triangles = leaves
            .iter()
            .map(|&l| forest.node(l).verts.map(|v| local[&v]))
            .collect();
        let levels = leaves.iter().map(|&l| forest.node(l).level).collect();
        let mut mesh = MeshLevel {
            forest_id: forest.id(),
            leaves,
            vertices,
            point_ids: pids,
            triangles,
            edges: Vec::new(),
            tri_edges: Vec::new(),
            edge_tris: Vec::new(),
            boundary_vertex: Vec::new(),
            vertex_tris: Vec::new(),
            levels,
        };
        mesh.build_topology()?;
        Ok(mesh)
    }

    fn build_topology(&mut self) -> Result<()> {
        let mut map: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_tris: Vec<[Option<usize>; 2]> = Vec::new();
        let mut tri_edges = Vec::with_capacity(self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            let mut te = [0; 3];
            for (k, e) in te.iter_mut().enumerate() {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let key = [a.min(b), a.max(b)];
                let idx = *map.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_tris.push([None, None]);
                    edges.len() - 1
                });
                let slot = &mut edge_tris[idx];
                if slot[0].is_none() {
                    slot[0] = Some(t);
                } else if slot[1].is_none() {
                    slot[1] = Some(t);
                } else {
                    return Err(Error::InvalidArgument(format!(
                        "edge {key:?} shared by more than two triangles"
                    )));
                }
                *e = idx;
            }
            tri_edges.push(te);
        }
        let mut boundary_vertex = vec![false; self.vertices.len()];
        for (e, tris) in edges.iter().zip(&edge_tris) {
            if tris[1].is_none() {
                boundary_vertex[e[0]] = true;
                boundary_vertex[e[1]] = true;
            }
        }
        let mut vertex_tris = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                vertex_tris[v].push(t);
            }
        }
        self.edges = edges;
        self.edge_tris = edge_tris;
        self.tri_edges = tri_edges;
        self.boundary_vertex = boundary_vertex;
        self.vertex_tris = vertex_tris;
        Ok(())
    }

    pub fn forest_id(&self) -> u64 {
        self.forest_id
    }

    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Forest point id of each local vertex.
    pub fn point_ids(&self) -> &[u32] {
        &self.point_ids
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Edge index opposite each local vertex.
    pub fn tri_edges(&self) -> &[[usize; 3]] {
        &self.tri_edges
    }

    pub fn edge_triangles(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_tris[e]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_tris[e][1].is_none()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_tris[v]
    }

    /// Bisection depth of each element.
    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn element_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        triangle_area(&self.element_points(t))
    }

    pub fn diameter(&self, t: usize) -> f64 {
        diameter(&self.element_points(t))
    }

    /// Worst circumradius/inradius ratio.
    pub fn max_shape_ratio(&self) -> f64 {
        (0..self.n_elements())
            .map(|t| shape_ratio(&self.element_points(t)))
            .fold(0.0, f64::max)
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.n_elements())
            .map(|t| self.diameter(t))
            .fold(0.0, f64::max)
    }

    /// Element containing `x` and its barycentric coordinates there.
    pub fn locate(&self, x: Point) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for t in 0..self.n_elements() {
            let l = barycentric(&self.element_points(t), x);
            let m = l[0].min(l[1]).min(l[2]);
            if best.as_ref().is_none_or(|b| m > b.2) {
                best = Some((t, l, m));
            }
            if m >= 0.0 {
                return Some((t, l));
            }
        }
        best.filter(|b| b.2 > -1e-12).map(|b| (b.0, b.1))
    }

    /// Checks orientation, edge incidence, absence of vertices inside edges
    /// and the Euler characteristic of a simply connected domain.
    pub fn audit_conformity(&self) -> Result<()> {
        for t in 0..self.n_elements() {
            if signed_area(&self.element_points(t)) <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} is not positively oriented"
                )));
            }
        }
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            for (v, p) in self.vertices.iter().enumerate() {
                if v == a || v == b {
                    continue;
                }
                let r = [p[0] - pa[0], p[1] - pa[1]];
                let s = (r[0] * d[0] + r[1] * d[1]) / len2;
                let cross = (r[0] * d[1] - r[1] * d[0]).abs() / len2.sqrt();
                if s > 1e-12 && s < 1.0 - 1e-12 && cross < 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "hanging vertex {v} on edge {e}"
                    )));
                }
            }
        }
        let euler = self.n_vertices() as i64 - self.n_edges() as i64 + self.n_elements() as i64;
        if euler != 1 {
            return Err(Error::InvalidArgument(format!(
                "Euler characteristic {euler} != 1"
            )));
        }
        Ok(())
    }
}
