//! Hierarchical H1 shape functions on triangles with per-edge degrees.
//!
//! Local numbering: three vertex hats, then edge functions for local edges
//! `E0 = (v1, v2)`, `E1 = (v2, v0)`, `E2 = (v0, v1)` in degree order, then
//! interior bubbles. Edge functions are built from the barycentric
//! coordinates of the edge endpoints taken in *global* orientation, so traces
//! agree between neighbours without sign fixes.

use super::legendre::legendre_values_and_derivs;

/// Local vertex pairs of the three edges (edge `k` is opposite vertex `k`).
pub const EDGE_VERTICES: [[usize; 2]; 3] = [[1, 2], [2, 0], [0, 1]];

/// `dim P_p` on a triangle.
pub fn poly_dim(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarShape {
    pub degree: usize,
    pub edge_degrees: [usize; 3],
    /// `true` when the global orientation of edge `k` runs from its second
    /// local endpoint to its first.
    pub edge_flip: [bool; 3],
}

impl ScalarShape {
    /// Full `P_p` on a triangle, all edges at degree `p`.
    pub fn full(p: usize) -> Self {
        Self {
            degree: p,
            edge_degrees: [p; 3],
            edge_flip: [false; 3],
        }
    }

    pub fn n_edge(&self, k: usize) -> usize {
        self.edge_degrees[k].saturating_sub(1)
    }

    pub fn n_interior(&self) -> usize {
        if self.degree < 3 {
            0
        } else {
            (self.degree - 1) * (self.degree - 2) / 2
        }
    }

    pub fn len(&self) -> usize {
        3 + (0..3).map(|k| self.n_edge(k)).sum::<usize>() + self.n_interior()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Offset of the first function on edge `k`.
    pub fn edge_offset(&self, k: usize) -> usize {
        3 + (0..k).map(|e| self.n_edge(e)).sum::<usize>()
    }

    pub fn interior_offset(&self) -> usize {
        3 + (0..3).map(|e| self.n_edge(e)).sum::<usize>()
    }

    /// Values and gradients at barycentric point `lam`; `grad_lam` are the
    /// (constant) physical gradients of the barycentric coordinates.
    pub fn eval(
        &self,
        lam: [f64; 3],
        grad_lam: &[[f64; 2]; 3],
        vals: &mut Vec<f64>,
        grads: &mut Vec<[f64; 2]>,
    ) {
        vals.clear();
        grads.clear();
        for i in 0..3 {
            vals.push(lam[i]);
            grads.push(grad_lam[i]);
        }
        let (mut lv, mut ld) = (Vec::new(), Vec::new());
        for k in 0..3 {
            let pe = self.edge_degrees[k];
            if pe < 2 {
                continue;
            }
            let [mut a, mut b] = EDGE_VERTICES[k];
            if self.edge_flip[k] {
                std::mem::swap(&mut a, &mut b);
            }
            let s = lam[b] - lam[a];
            let gs = sub(grad_lam[b], grad_lam[a]);
            let prod = lam[a] * lam[b];
            let gprod = add(scale(grad_lam[a], lam[b]), scale(grad_lam[b], lam[a]));
            legendre_values_and_derivs(pe - 2, s, &mut lv, &mut ld);
            for m in 0..=pe - 2 {
                vals.push(prod * lv[m]);
                grads.push(add(scale(gprod, lv[m]), scale(gs, prod * ld[m])));
            }
        }
        if self.degree >= 3 {
            let bub = lam[0] * lam[1] * lam[2];
            let gbub = add(
                add(
                    scale(grad_lam[0], lam[1] * lam[2]),
                    scale(grad_lam[1], lam[0] * lam[2]),
                ),
                scale(grad_lam[2], lam[0] * lam[1]),
            );
            let m = self.degree - 3;
            let u = lam[1] - lam[0];
            let gu = sub(grad_lam[1], grad_lam[0]);
            let w = 2.0 * lam[2] - 1.0;
            let gw = scale(grad_lam[2], 2.0);
            let (mut pu, mut du, mut pw, mut dw) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            legendre_values_and_derivs(m, u, &mut pu, &mut du);
            legendre_values_and_derivs(m, w, &mut pw, &mut dw);
            for total in 0..=m {
                for i in 0..=total {
                    let j = total - i;
                    let f = pu[i] * pw[j];
                    let gf = add(scale(gu, du[i] * pw[j]), scale(gw, pu[i] * dw[j]));
                    vals.push(bub * f);
                    grads.push(add(scale(gbub, f), scale(gf, bub)));
                }
            }
        }
    }

    /// Values only.
    pub fn values(&self, lam: [f64; 3], vals: &mut Vec<f64>) {
        let mut g = Vec::new();
        let dummy = [[0.0; 2]; 3];
        self.eval(lam, &dummy, vals, &mut g);
    }
}

#[inline]
pub(crate) fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}
#[inline]
pub(crate) fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}
#[inline]
pub(crate) fn scale(a: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] * s, a[1] * s]
}
#[inline]
pub(crate) fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::quadrature::triangle_rule;

    const REF_GRADS: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn dimension_matches_closed_form() {
        for p in 1..=8 {
            assert_eq!(ScalarShape::full(p).len(), poly_dim(p));
        }
    }

    /// Gram matrix of the shape functions on the reference triangle must be
    /// nonsingular, i.e. they form a basis of P_p.
    #[test]
    fn shapes_are_linearly_independent() {
        for p in 1..=6 {
            let s = ScalarShape::full(p);
            let n = s.len();
            let rule = triangle_rule(2 * p);
            let mut g = faer::Mat::<f64>::zeros(n, n);
            let (mut v, mut gr) = (Vec::new(), Vec::new());
            for (lam, w) in rule.points.iter().zip(&rule.weights) {
                s.eval(*lam, &REF_GRADS, &mut v, &mut gr);
                for i in 0..n {
                    for j in 0..n {
                        g[(i, j)] += w * v[i] * v[j];
                    }
                }
            }
            let ev = g.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
            assert!(ev[0] > 1e-12 * ev[n - 1], "p={p} min eig {}", ev[0]);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let s = ScalarShape {
            degree: 5,
            edge_degrees: [5, 3, 4],
            edge_flip: [true, false, true],
        };
        let at = |x: f64, y: f64| [1.0 - x - y, x, y];
        let (x, y, h) = (0.23, 0.41, 1e-6);
        let (mut v, mut g) = (Vec::new(), Vec::new());
        s.eval(at(x, y), &REF_GRADS, &mut v, &mut g);
        let (mut vp, mut vm, mut dummy) = (Vec::new(), Vec::new(), Vec::new());
        for d in 0..2 {
            let (dx, dy) = if d == 0 { (h, 0.0) } else { (0.0, h) };
            s.eval(at(x + dx, y + dy), &REF_GRADS, &mut vp, &mut dummy);
            s.eval(at(x - dx, y - dy), &REF_GRADS, &mut vm, &mut dummy);
            for i in 0..v.len() {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                assert!((fd - g[i][d]).abs() < 1e-6, "fn {i} dir {d}");
            }
        }
    }

    #[test]
    fn edge_trace_depends_on_orientation_only() {
        // On edge E2 = (v0, v1) the trace of edge functions must coincide when
        // evaluated from a neighbour that sees the edge with swapped local
        // endpoints but the same global orientation.
        let a = ScalarShape {
            degree: 4,
            edge_degrees: [4, 4, 4],
            edge_flip: [false, false, false],
        };
        let b = ScalarShape {
            degree: 4,
            edge_degrees: [4, 4, 4],
            edge_flip: [false, false, true],
        };
        let t = 0.3;
        let (mut va, mut vb) = (Vec::new(), Vec::new());
        a.values([1.0 - t, t, 0.0], &mut va);
        // Neighbour has v0 <-> v1 swapped, so the same physical point is (t, 1 - t).
        b.values([t, 1.0 - t, 0.0], &mut vb);
        let off = a.edge_offset(2);
        for m in 0..a.n_edge(2) {
            assert!((va[off + m] - vb[off + m]).abs() < 1e-14);
        }
    }
}
