//! Local mixed spaces on vertex patches: RTN fluxes with zero normal trace
//! on the patch boundary part `Gamma_a`, broken polynomial pressures.

use std::collections::HashMap;

use faer::Mat;

use super::hp::FIXED;
use crate::basis::quadrature::triangle_rule;
use crate::basis::rtn::{bary_to_point, rtn_dim, RtnElement};
use crate::basis::scalar::poly_dim;
use crate::error::{Error, Result};
use crate::linalg::{mat_t_vec, mat_vec, norm, DenseLu};
use crate::mesh::{MeshLevel, Patch};

#[derive(Debug, Clone)]
pub struct PatchMixedSpace {
    pub degree: usize,
    pub interior: bool,
    /// Fine elements of the patch.
    pub elements: Vec<usize>,
    pub rtn: Vec<RtnElement>,
    /// Global flux dof of each local RTN function, `FIXED` on `Gamma_a`.
    pub flux_dofs: Vec<Vec<usize>>,
    pub n_flux: usize,
    /// First pressure dof of each element; pressures are element-local.
    pub pressure_offset: Vec<usize>,
    pub n_pressure: usize,
    pub areas: Vec<f64>,
}

impl PatchMixedSpace {
    pub fn new(patch: &Patch, fine: &MeshLevel) -> Result<Self> {
        let p = patch.degree;
        let gamma: std::collections::HashSet<usize> = patch.gamma_edges.iter().copied().collect();
        let ids = fine.point_ids();
        let mut edge_first: HashMap<usize, usize> = HashMap::new();
        let mut next = 0;
        let mut rtn = Vec::with_capacity(patch.elements.len());
        let mut flux_dofs = Vec::with_capacity(patch.elements.len());
        let mut areas = Vec::with_capacity(patch.elements.len());
        for &t in &patch.elements {
            let tri = fine.triangles()[t];
            let pts = fine.element_points(t);
            let mut ends = [[[0.0; 2]; 2]; 3];
            for (k, e) in ends.iter_mut().enumerate() {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let (a, b) = if ids[a] < ids[b] { (a, b) } else { (b, a) };
                *e = [fine.vertices()[a], fine.vertices()[b]];
            }
            let el = RtnElement::new(pts, ends, p)?;
            let mut d = vec![FIXED; rtn_dim(p)];
            for (k, &e) in fine.tri_edges()[t].iter().enumerate() {
                if gamma.contains(&e) {
                    continue;
                }
                let first = *edge_first.entry(e).or_insert_with(|| {
                    let f = next;
                    next += p + 1;
                    f
                });
                for m in 0..=p {
                    d[el.edge_dof(k, m)] = first + m;
                }
            }
            flux_dofs.push(d);
            areas.push(fine.area(t));
            rtn.push(el);
        }
        for (el, d) in rtn.iter().zip(flux_dofs.iter_mut()) {
            for i in el.interior_range() {
                d[i] = next;
                next += 1;
            }
        }
        let np = poly_dim(p);
        let pressure_offset = (0..patch.elements.len()).map(|i| i * np).collect();
        Ok(Self {
            degree: p,
            interior: patch.is_interior(),
            elements: patch.elements.clone(),
            rtn,
            flux_dofs,
            n_flux: next,
            pressure_offset,
            n_pressure: np * patch.elements.len(),
            areas,
        })
    }

    pub fn n_local_pressure(&self) -> usize {
        poly_dim(self.degree)
    }

    /// Values of the pressure basis of local element `e` at `x`.
    pub fn pressure_values(&self, e: usize, x: [f64; 2], out: &mut Vec<f64>) {
        self.rtn[e].ortho().values(x, out);
    }

    /// Quadrature degree that integrates every product of two members exactly.
    pub fn quad_degree(&self) -> usize {
        2 * self.degree
    }

    /// Assembles the flux mass matrix, the divergence coupling
    /// `B[q][v] = (div v, q)` and the pressure integrals `(q, 1)`.
    pub fn assemble_saddle(&self) -> SaddleSystem {
        let nf = self.n_flux;
        let np = self.n_pressure;
        let npl = self.n_local_pressure();
        let mut m = Mat::<f64>::zeros(nf, nf);
        let mut b = Mat::<f64>::zeros(np, nf);
        let mut mean = vec![0.0; np];
        let rule = triangle_rule(self.quad_degree());
        let mut v = Vec::new();
        for (e, el) in self.rtn.iter().enumerate() {
            let d = &self.flux_dofs[e];
            let pts = el.vertices;
            let area2 = 2.0 * self.areas[e];
            let nl = el.len();
            for (lam, w) in rule.points.iter().zip(&rule.weights) {
                let x = bary_to_point(&pts, *lam);
                let w = w * area2;
                el.values(x, &mut v);
                for i in 0..nl {
                    if d[i] == FIXED {
                        continue;
                    }
                    for j in 0..nl {
                        if d[j] != FIXED {
                            m[(d[i], d[j])] += w * (v[i][0] * v[j][0] + v[i][1] * v[j][1]);
                        }
                    }
                }
            }
            // The pressure basis is orthonormal in |K|^{-1} (., .)_K.
            let div = el.divergence_matrix();
            let off = self.pressure_offset[e];
            mean[off] = self.areas[e];
            for i in 0..npl {
                for j in 0..nl {
                    if d[j] != FIXED {
                        b[(off + i, d[j])] += self.areas[e] * div[(i, j)];
                    }
                }
            }
        }
        let mut constant = vec![0.0; np];
        for &o in &self.pressure_offset {
            constant[o] = 1.0;
        }
        SaddleSystem {
            mass: m,
            div: b,
            mean: if self.interior { Some(mean) } else { None },
            constant,
        }
    }

    /// Flux value on local element `e` at `x` for global coefficients `c`.
    pub fn flux_at(&self, c: &[f64], e: usize, x: [f64; 2]) -> [f64; 2] {
        let mut v = Vec::new();
        self.rtn[e].values(x, &mut v);
        self.combine_flux(c, e, &v)
    }

    pub fn combine_flux(&self, c: &[f64], e: usize, vals: &[[f64; 2]]) -> [f64; 2] {
        let mut s = [0.0; 2];
        for (k, &d) in self.flux_dofs[e].iter().enumerate() {
            if d != FIXED {
                s[0] += c[d] * vals[k][0];
                s[1] += c[d] * vals[k][1];
            }
        }
        s
    }

    /// Divergence of the flux on local element `e` as monomial coefficients.
    pub fn divergence_coeffs(&self, c: &[f64], e: usize) -> Vec<f64> {
        let el = &self.rtn[e];
        let div = el.divergence_matrix();
        let local: Vec<f64> = self.flux_dofs[e]
            .iter()
            .map(|&d| if d == FIXED { 0.0 } else { c[d] })
            .collect();
        mat_vec(div, &local)
    }

    /// Divergence of the flux on local element `e` at `x`.
    pub fn divergence_at(&self, c: &[f64], e: usize, x: [f64; 2]) -> f64 {
        let coef = self.divergence_coeffs(c, e);
        let mut mv = Vec::new();
        self.pressure_values(e, x, &mut mv);
        coef.iter().zip(&mv).map(|(a, b)| a * b).sum()
    }
}

/// `[[M, B^T, 0], [B, 0, m], [0, m^T, 0]]`; the last row/column only for
/// interior patches.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub mass: Mat<f64>,
    pub div: Mat<f64>,
    pub mean: Option<Vec<f64>>,
    /// Pressure coefficients of the constant function 1.
    pub constant: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SaddleSolution {
    pub flux: Vec<f64>,
    /// Pressure-like multiplier `r` of the constraint.
    pub pressure: Vec<f64>,
    /// Multiplier of the mean-value row; zero for compatible data.
    pub multiplier: f64,
    /// Relative KKT residual.
    pub residual: f64,
}

pub struct SaddleFactor {
    nf: usize,
    np: usize,
    has_mean: bool,
    lu: DenseLu,
    sys: SaddleSystem,
}

impl SaddleSystem {
    pub fn n_flux(&self) -> usize {
        self.mass.nrows()
    }

    pub fn n_pressure(&self) -> usize {
        self.div.nrows()
    }

    fn full(&self) -> Mat<f64> {
        let nf = self.n_flux();
        let np = self.n_pressure();
        let nm = usize::from(self.mean.is_some());
        let n = nf + np + nm;
        let mut k = Mat::<f64>::zeros(n, n);
        for i in 0..nf {
            for j in 0..nf {
                k[(i, j)] = self.mass[(i, j)];
            }
        }
        for i in 0..np {
            for j in 0..nf {
                k[(nf + i, j)] = self.div[(i, j)];
                k[(j, nf + i)] = self.div[(i, j)];
            }
        }
        if let Some(m) = &self.mean {
            for i in 0..np {
                k[(nf + i, nf + np)] = m[i];
                k[(nf + np, nf + i)] = m[i];
            }
        }
        k
    }

    pub fn factor(&self) -> Result<SaddleFactor> {
        let lu = DenseLu::new(&self.full())?;
        Ok(SaddleFactor {
            nf: self.n_flux(),
            np: self.n_pressure(),
            has_mean: self.mean.is_some(),
            lu,
            sys: self.clone(),
        })
    }

    /// Factor and solve once.
    pub fn solve(&self, rhs_flux: &[f64], rhs_pressure: &[f64]) -> Result<SaddleSolution> {
        self.factor()?.solve(rhs_flux, rhs_pressure)
    }

    /// `0.5 |v|_M^2 - (rhs, v)`-free objective `|v - tau|^2` minus the
    /// constant `|tau|^2`, i.e. `v^T M v - 2 rhs^T v`.
    pub fn objective(&self, v: &[f64], rhs_flux: &[f64]) -> f64 {
        let mv = mat_vec(&self.mass, v);
        v.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>()
            - 2.0 * v.iter().zip(rhs_flux).map(|(a, b)| a * b).sum::<f64>()
    }
}

impl SaddleFactor {
    /// Solves the system. For interior patches the returned `multiplier`
    /// equals the mean of the pressure data over the patch; data violating
    /// compatibility beyond `1e-9` relative is reported as singular.
    pub fn solve(&self, rhs_flux: &[f64], rhs_pressure: &[f64]) -> Result<SaddleSolution> {
        if rhs_flux.len() != self.nf || rhs_pressure.len() != self.np {
            return Err(Error::InvalidArgument(
                "saddle right-hand side has the wrong size".into(),
            ));
        }
        let mut rhs = Vec::with_capacity(self.nf + self.np + 1);
        rhs.extend_from_slice(rhs_flux);
        rhs.extend_from_slice(rhs_pressure);
        if self.has_mean {
            rhs.push(0.0);
        }
        let mut x = self.lu.solve(&rhs);
        // One step of iterative refinement keeps the KKT residual at roundoff.
        let r = self.residual_vec(&x, &rhs);
        let dx = self.lu.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        let flux = x[..self.nf].to_vec();
        let pressure = x[self.nf..self.nf + self.np].iter().map(|v| -v).collect();
        let multiplier = if self.has_mean {
            x[self.nf + self.np]
        } else {
            0.0
        };
        let res = self.residual_vec(&x, &rhs);
        let scale = norm(&rhs).max(f64::MIN_POSITIVE);
        let residual = norm(&res) / scale;
        if self.has_mean {
            let rel = compatibility(&self.sys.constant, rhs_pressure);
            if rel > 1e-9 {
                return Err(Error::Singular(format!(
                    "pressure data not orthogonal to constants (relative {rel:.2e})"
                )));
            }
        }
        Ok(SaddleSolution {
            flux,
            pressure,
            multiplier,
            residual,
        })
    }

    fn residual_vec(&self, x: &[f64], rhs: &[f64]) -> Vec<f64> {
        let nf = self.nf;
        let np = self.np;
        let s = &self.sys;
        let (xf, rest) = x.split_at(nf);
        let xp = &rest[..np];
        let mut r = rhs.to_vec();
        let mf = mat_vec(&s.mass, xf);
        let btp = mat_t_vec(&s.div, xp);
        for i in 0..nf {
            r[i] -= mf[i] + btp[i];
        }
        let bf = mat_vec(&s.div, xf);
        for i in 0..np {
            r[nf + i] -= bf[i];
        }
        if let Some(m) = &s.mean {
            let lam = x[nf + np];
            for i in 0..np {
                r[nf + i] -= m[i] * lam;
            }
            r[nf + np] -= m.iter().zip(xp).map(|(a, b)| a * b).sum::<f64>();
        }
        r
    }

    pub fn system(&self) -> &SaddleSystem {
        &self.sys
    }
}

/// Cosine between pressure data and the constant direction.
pub fn compatibility(constant: &[f64], rhs_pressure: &[f64]) -> f64 {
    let g = norm(rhs_pressure);
    if g == 0.0 {
        return 0.0;
    }
    let c: f64 = constant.iter().zip(rhs_pressure).map(|(a, b)| a * b).sum();
    c.abs() / (norm(constant) * g)
}
