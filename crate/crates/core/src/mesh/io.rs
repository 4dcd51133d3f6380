//! Plain-text mesh dump and legacy VTK export.
//!
//! Dump format (whitespace separated, `#` starts a comment line):
//! ```text
//! heatflux-mesh 1
//! forest <id> <n_points> <n_nodes>
//! <x> <y>                         (n_points lines)
//! <parent|-1> <v0> <v1> <v2>      (n_nodes lines, refinement edge v0-v1)
//! leaves <n_leaves>
//! <node id>                        (n_leaves lines)
//! ```

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::forest::{Forest, Node, NodeId};
use super::level::MeshLevel;
use crate::error::{Error, Result};

pub fn write_mesh<W: Write>(forest: &Forest, mesh: &MeshLevel, mut w: W) -> Result<()> {
    if forest.id() != mesh.forest_id() {
        return Err(Error::ForestMismatch(mesh.forest_id(), forest.id()));
    }
    let mut s = String::new();
    writeln!(s, "heatflux-mesh 1").ok();
    writeln!(
        s,
        "forest {} {} {}",
        forest.id(),
        forest.points().len(),
        forest.nodes().len()
    )
    .ok();
    for p in forest.points() {
        writeln!(s, "{:e} {:e}", p[0], p[1]).ok();
    }
    for n in forest.nodes() {
        let parent = n.parent.map_or(-1, |p| p as i64);
        writeln!(s, "{} {} {} {}", parent, n.verts[0], n.verts[1], n.verts[2]).ok();
    }
    writeln!(s, "leaves {}", mesh.leaves().len()).ok();
    for l in mesh.leaves() {
        writeln!(s, "{l}").ok();
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_tokens(&mut self) -> Result<Vec<String>> {
        loop {
            self.line += 1;
            let l = self.inner.next().ok_or_else(|| Error::Parse {
                line: self.line,
                msg: "unexpected end of file".into(),
            })??;
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(t.split_whitespace().map(str::to_owned).collect());
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("bad number `{s}`")))
    }
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<(Forest, MeshLevel)> {
    let mut lines = Lines {
        inner: r.lines(),
        line: 0,
    };
    let head = lines.next_tokens()?;
    if head != ["heatflux-mesh", "1"] {
        return Err(lines.err("missing `heatflux-mesh 1` header"));
    }
    let f = lines.next_tokens()?;
    if f.len() != 4 || f[0] != "forest" {
        return Err(lines.err("expected `forest <id> <points> <nodes>`"));
    }
    let id: u64 = lines.parse(&f[1])?;
    let np: usize = lines.parse(&f[2])?;
    let nn: usize = lines.parse(&f[3])?;
    let mut points = Vec::with_capacity(np);
    for _ in 0..np {
        let t = lines.next_tokens()?;
        if t.len() != 2 {
            return Err(lines.err("expected two coordinates"));
        }
        points.push([lines.parse(&t[0])?, lines.parse(&t[1])?]);
    }
    let mut nodes: Vec<Node> = Vec::with_capacity(nn);
    for i in 0..nn {
        let t = lines.next_tokens()?;
        if t.len() != 4 {
            return Err(lines.err("expected `parent v0 v1 v2`"));
        }
        let parent: i64 = lines.parse(&t[0])?;
        let verts: [u32; 3] = [
            lines.parse(&t[1])?,
            lines.parse(&t[2])?,
            lines.parse(&t[3])?,
        ];
        if verts.iter().any(|&v| v as usize >= np) {
            return Err(lines.err("vertex index out of range"));
        }
        let parent = if parent < 0 {
            None
        } else if (parent as usize) < i {
            Some(parent as NodeId)
        } else {
            return Err(lines.err("parent must precede child"));
        };
        let level = parent.map_or(0, |p| nodes[p as usize].level + 1);
        nodes.push(Node {
            verts,
            parent,
            children: None,
            level,
        });
    }
    for i in 0..nn {
        if let Some(p) = nodes[i].parent {
            let p = p as usize;
            match &mut nodes[p].children {
                None => nodes[p].children = Some([i as NodeId, NodeId::MAX]),
                Some(c) if c[1] == NodeId::MAX => c[1] = i as NodeId,
                Some(_) => {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("node {p} has more than two children"),
                    })
                }
            }
        }
    }
    if nodes
        .iter()
        .any(|n| n.children.is_some_and(|c| c[1] == NodeId::MAX))
    {
        return Err(Error::Parse {
            line: 0,
            msg: "node with a single child".into(),
        });
    }
    let l = lines.next_tokens()?;
    if l.len() != 2 || l[0] != "leaves" {
        return Err(lines.err("expected `leaves <count>`"));
    }
    let nl: usize = lines.parse(&l[1])?;
    let mut leaves = Vec::with_capacity(nl);
    for _ in 0..nl {
        let t = lines.next_tokens()?;
        let id: NodeId = lines.parse(&t[0])?;
        if id as usize >= nn {
            return Err(lines.err("leaf id out of range"));
        }
        leaves.push(id);
    }
    let forest = Forest::restore(id, points, nodes)?;
    let mesh = forest.mesh_from_leaves(leaves)?;
    mesh.audit_conformity()?;
    Ok((forest, mesh))
}

/// Legacy VTK unstructured grid with optional per-cell and per-point scalars.
pub fn write_vtk<W: Write>(
    mesh: &MeshLevel,
    cell_data: &[(&str, &[f64])],
    point_data: &[(&str, &[f64])],
    mut w: W,
) -> Result<()> {
    let mut s = String::new();
    writeln!(
        s,
        "# vtk DataFile Version 3.0\nheatflux mesh\nASCII\nDATASET UNSTRUCTURED_GRID"
    )
    .ok();
    writeln!(s, "POINTS {} double", mesh.n_vertices()).ok();
    for p in mesh.vertices() {
        writeln!(s, "{:e} {:e} 0", p[0], p[1]).ok();
    }
    writeln!(s, "CELLS {} {}", mesh.n_elements(), 4 * mesh.n_elements()).ok();
    for t in mesh.triangles() {
        writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).ok();
    }
    writeln!(s, "CELL_TYPES {}", mesh.n_elements()).ok();
    for _ in 0..mesh.n_elements() {
        writeln!(s, "5").ok();
    }
    if !cell_data.is_empty() {
        writeln!(s, "CELL_DATA {}", mesh.n_elements()).ok();
        for (name, vals) in cell_data {
            if vals.len() != mesh.n_elements() {
                return Err(Error::InvalidArgument(format!(
                    "cell field `{name}` has wrong length"
                )));
            }
            writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").ok();
            for v in *vals {
                writeln!(s, "{v:e}").ok();
            }
        }
    }
    if !point_data.is_empty() {
        writeln!(s, "POINT_DATA {}", mesh.n_vertices()).ok();
        for (name, vals) in point_data {
            if vals.len() != mesh.n_vertices() {
                return Err(Error::InvalidArgument(format!(
                    "point field `{name}` has wrong length"
                )));
            }
            writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").ok();
            for v in *vals {
                writeln!(s, "{v:e}").ok();
            }
        }
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}
