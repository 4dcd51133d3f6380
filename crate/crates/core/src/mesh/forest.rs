//! Newest-vertex-bisection refinement forest shared by every mesh of a run.
//!
//! A node stores its vertices as `(v0, v1, v2)`: the refinement edge is
//! `(v0, v1)` and `v2` is the newest vertex. Bisection at `m = mid(v0, v1)`
//! produces `(v2, v0, m)` and `(v1, v2, m)`.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use super::geometry::{midpoint, Point};
use super::level::MeshLevel;
use crate::error::{Error, Result};

pub type NodeId = u32;

static NEXT_FOREST_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone)]
pub struct Node {
    pub verts: [u32; 3],
    pub parent: Option<NodeId>,
    pub children: Option<[NodeId; 2]>,
    pub level: u32,
}

#[derive(Debug, Clone)]
pub struct Forest {
    id: u64,
    points: Vec<Point>,
    nodes: Vec<Node>,
    roots: Vec<NodeId>,
    midpoints: HashMap<(u32, u32), u32>,
}

fn edge_key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Forest {
    /// Forest over the unit square split into `n x n` cells, each cut along
    /// its `(i, j) - (i+1, j+1)` diagonal. Returns the macro mesh as well.
    pub fn unit_square(n: usize) -> Result<(Forest, MeshLevel)> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "subdivision count must be >= 1".into(),
            ));
        }
        let mut points = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                points.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let pid = |i: usize, j: usize| (j * (n + 1) + i) as u32;
        let mut nodes = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                for verts in [
                    [pid(i + 1, j + 1), pid(i, j), pid(i + 1, j)],
                    [pid(i, j), pid(i + 1, j + 1), pid(i, j + 1)],
                ] {
                    nodes.push(Node {
                        verts,
                        parent: None,
                        children: None,
                        level: 0,
                    });
                }
            }
        }
        Self::from_macro(points, nodes.into_iter().map(|n| n.verts).collect())
    }

    /// Forest over an arbitrary macro triangulation. Triangles must be
    /// counter-clockwise and listed with their refinement edge first.
    pub fn from_macro(points: Vec<Point>, triangles: Vec<[u32; 3]>) -> Result<(Forest, MeshLevel)> {
        let nodes: Vec<Node> = triangles
            .into_iter()
            .map(|verts| Node {
                verts,
                parent: None,
                children: None,
                level: 0,
            })
            .collect();
        let roots = (0..nodes.len() as u32).collect::<Vec<_>>();
        let forest = Forest {
            id: NEXT_FOREST_ID.fetch_add(1, Ordering::Relaxed),
            points,
            nodes,
            roots: roots.clone(),
            midpoints: HashMap::new(),
        };
        let mesh = forest.mesh_from_leaves(roots)?;
        Ok((forest, mesh))
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn node_points(&self, id: NodeId) -> [Point; 3] {
        let v = self.nodes[id as usize].verts;
        [
            self.points[v[0] as usize],
            self.points[v[1] as usize],
            self.points[v[2] as usize],
        ]
    }

    /// Children of `id`, creating them on first request.
    pub fn bisect(&mut self, id: NodeId) -> [NodeId; 2] {
        if let Some(c) = self.nodes[id as usize].children {
            return c;
        }
        let [v0, v1, v2] = self.nodes[id as usize].verts;
        let key = edge_key(v0, v1);
        let m = match self.midpoints.get(&key) {
            Some(&m) => m,
            None => {
                let m = self.points.len() as u32;
                self.points
                    .push(midpoint(self.points[v0 as usize], self.points[v1 as usize]));
                self.midpoints.insert(key, m);
                m
            }
        };
        let level = self.nodes[id as usize].level + 1;
        let first = self.nodes.len() as NodeId;
        for verts in [[v2, v0, m], [v1, v2, m]] {
            self.nodes.push(Node {
                verts,
                parent: Some(id),
                children: None,
                level,
            });
        }
        self.nodes[id as usize].children = Some([first, first + 1]);
        [first, first + 1]
    }

    /// Midpoint vertex of edge `(a, b)` if it has been created.
    pub fn edge_midpoint(&self, a: u32, b: u32) -> Option<u32> {
        self.midpoints.get(&edge_key(a, b)).copied()
    }

    /// Chain `id, parent(id), ..., root`.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(Some(id), move |&n| self.nodes[n as usize].parent)
    }

    fn check(&self, mesh: &MeshLevel) -> Result<()> {
        if mesh.forest_id() != self.id {
            return Err(Error::ForestMismatch(mesh.forest_id(), self.id));
        }
        Ok(())
    }

    /// Builds the conforming mesh on a set of leaves.
    pub fn mesh_from_leaves(&self, mut leaves: Vec<NodeId>) -> Result<MeshLevel> {
        leaves.sort_unstable();
        leaves.dedup();
        MeshLevel::from_forest(self, leaves)
    }

    /// Bisects every marked element once, then closes hanging nodes.
    pub fn refine(&mut self, mesh: &MeshLevel, marked: &[usize]) -> Result<MeshLevel> {
        self.check(mesh)?;
        if marked.is_empty() {
            return Ok(mesh.clone());
        }
        let mut leaves: BTreeSet<NodeId> = mesh.leaves().iter().copied().collect();
        for &k in marked {
            let id = *mesh
                .leaves()
                .get(k)
                .ok_or_else(|| Error::InvalidArgument(format!("element {k} out of range")))?;
            if leaves.remove(&id) {
                leaves.extend(self.bisect(id));
            }
        }
        self.close(&mut leaves);
        self.mesh_from_leaves(leaves.into_iter().collect())
    }

    /// Bisects until no leaf has a hanging vertex on one of its edges.
    fn close(&mut self, leaves: &mut BTreeSet<NodeId>) {
        loop {
            let used: std::collections::HashSet<u32> = leaves
                .iter()
                .flat_map(|&l| self.nodes[l as usize].verts)
                .collect();
            let hanging: Vec<NodeId> = leaves
                .iter()
                .copied()
                .filter(|&l| {
                    let v = self.nodes[l as usize].verts;
                    (0..3).any(|k| {
                        self.edge_midpoint(v[k], v[(k + 1) % 3])
                            .is_some_and(|m| used.contains(&m))
                    })
                })
                .collect();
            if hanging.is_empty() {
                return;
            }
            for l in hanging {
                leaves.remove(&l);
                leaves.extend(self.bisect(l));
            }
        }
    }

    /// Replaces marked elements by their parents where the sibling is also a
    /// leaf, then restores conformity. The result is never finer than `mesh`
    /// except where closure forces it.
    pub fn coarsen(&mut self, mesh: &MeshLevel, marked: &[usize]) -> Result<MeshLevel> {
        self.check(mesh)?;
        let mut leaves: BTreeSet<NodeId> = mesh.leaves().iter().copied().collect();
        for &k in marked {
            let id = *mesh
                .leaves()
                .get(k)
                .ok_or_else(|| Error::InvalidArgument(format!("element {k} out of range")))?;
            let Some(p) = self.nodes[id as usize].parent else {
                continue;
            };
            let [a, b] = self.nodes[p as usize]
                .children
                .expect("parent has children");
            if leaves.contains(&a) && leaves.contains(&b) {
                leaves.remove(&a);
                leaves.remove(&b);
                leaves.insert(p);
            }
        }
        self.close(&mut leaves);
        self.mesh_from_leaves(leaves.into_iter().collect())
    }

    /// Cut made of the ancestors of `mesh`'s leaves at depth at most `level`.
    pub fn coarsen_to_level(&mut self, mesh: &MeshLevel, level: u32) -> Result<MeshLevel> {
        self.check(mesh)?;
        let mut leaves: BTreeSet<NodeId> = BTreeSet::new();
        for &l in mesh.leaves() {
            let a = self
                .ancestors(l)
                .find(|&a| self.nodes[a as usize].level <= level)
                .expect("roots have level 0");
            leaves.insert(a);
        }
        self.close(&mut leaves);
        self.mesh_from_leaves(leaves.into_iter().collect())
    }

    /// Element-wise deepest cut of `prev` and `next`, with maps from each new
    /// element to its container in `prev` and in `next`.
    pub fn common_refinement(
        &self,
        prev: &MeshLevel,
        next: &MeshLevel,
    ) -> Result<(MeshLevel, Vec<usize>, Vec<usize>)> {
        self.check(prev)?;
        self.check(next)?;
        let index = |m: &MeshLevel| -> HashMap<NodeId, usize> {
            m.leaves()
                .iter()
                .enumerate()
                .map(|(i, &l)| (l, i))
                .collect()
        };
        let (ip, inx) = (index(prev), index(next));
        let container = |map: &HashMap<NodeId, usize>, id: NodeId| -> Option<usize> {
            self.ancestors(id).find_map(|a| map.get(&a).copied())
        };
        let mut leaves = Vec::new();
        for &l in prev.leaves() {
            if container(&inx, l).is_some() {
                leaves.push(l);
            }
        }
        for &l in next.leaves() {
            if container(&ip, l).is_some() {
                leaves.push(l);
            }
        }
        let fine = self.mesh_from_leaves(leaves)?;
        let mut to_prev = Vec::with_capacity(fine.n_elements());
        let mut to_next = Vec::with_capacity(fine.n_elements());
        for &l in fine.leaves() {
            to_prev.push(
                container(&ip, l)
                    .ok_or_else(|| Error::InvalidArgument("cuts do not cover".into()))?,
            );
            to_next.push(
                container(&inx, l)
                    .ok_or_else(|| Error::InvalidArgument("cuts do not cover".into()))?,
            );
        }
        Ok((fine, to_prev, to_next))
    }

    /// Map from each element of `fine` to the element of `coarse` that
    /// contains it.
    pub fn containment(&self, fine: &MeshLevel, coarse: &MeshLevel) -> Result<Vec<usize>> {
        self.check(fine)?;
        self.check(coarse)?;
        let map: HashMap<NodeId, usize> = coarse
            .leaves()
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i))
            .collect();
        fine.leaves()
            .iter()
            .map(|&l| {
                self.ancestors(l)
                    .find_map(|a| map.get(&a).copied())
                    .ok_or_else(|| {
                        Error::InvalidArgument("mesh does not refine the coarse mesh".into())
                    })
            })
            .collect()
    }

    /// Bisects every element of `mesh` `times` times (uniform refinement).
    pub fn refine_uniform(&mut self, mesh: &MeshLevel, times: usize) -> Result<MeshLevel> {
        let mut m = mesh.clone();
        for _ in 0..times {
            let all: Vec<usize> = (0..m.n_elements()).collect();
            m = self.refine(&m, &all)?;
        }
        Ok(m)
    }

    /// Finest cut that refines every mesh in `meshes`.
    pub fn common_refinement_all(&self, meshes: &[&MeshLevel]) -> Result<MeshLevel> {
        let mut acc = (*meshes
            .first()
            .ok_or_else(|| Error::InvalidArgument("no meshes".into()))?)
        .clone();
        for m in &meshes[1..] {
            acc = self.common_refinement(&acc, m)?.0;
        }
        Ok(acc)
    }

    pub(crate) fn restore(id: u64, points: Vec<Point>, nodes: Vec<Node>) -> Result<Forest> {
        let mut midpoints = HashMap::new();
        let mut roots = Vec::new();
        for (i, n) in nodes.iter().enumerate() {
            if n.parent.is_none() {
                roots.push(i as NodeId);
            }
            if let Some([c, _]) = n.children {
                let [v0, v1, _] = n.verts;
                let m = nodes
                    .get(c as usize)
                    .ok_or_else(|| Error::InvalidArgument("dangling child".into()))?
                    .verts[2];
                midpoints.insert(edge_key(v0, v1), m);
            }
        }
        Ok(Forest {
            id,
            points,
            nodes,
            roots,
            midpoints,
        })
    }
}
