//! Conforming triangulations of a shared bisection forest, common
//! refinements and vertex patches.

mod forest;
mod geometry;
mod io;
mod level;
mod patch;

pub use forest::{Forest, Node, NodeId};
pub use geometry::{
    barycentric, barycentric_gradients, centroid, diameter, edge_lengths, midpoint, shape_ratio,
    signed_area, triangle_area, Point,
};
pub use io::{read_mesh, write_mesh, write_vtk};
pub use level::MeshLevel;
pub use patch::{vertex_patches, Patch, PatchKind};

/// Uniform mesh of the unit square with `n x n` cells and its forest.
pub fn build_uniform_mesh(n: usize) -> crate::error::Result<(Forest, MeshLevel)> {
    Forest::unit_square(n)
}
