//! Weighted patch projections `Pi^{a,n} f` and the assembled data
//! approximation `f_htau = sum_a psi_a Pi^{a,n} f`.

use faer::Mat;

use super::data::SourceMoments;
use crate::basis::monomial::MonomialBasis;
use crate::error::Result;
use crate::linalg::DenseCholesky;
use crate::mesh::{MeshLevel, Patch, Point};

/// `Pi^{a,n} f` in `Q_q(I_n; P_{p_a - 1})` on the patch submesh, stored as
/// monomial coefficients per local element and temporal mode.
#[derive(Debug, Clone)]
pub struct PatchProjection {
    pub vertex: usize,
    pub degree: usize,
    pub monomials: Vec<MonomialBasis>,
    /// `coeffs[i][j]`: local element `i`, mode `j`.
    pub coeffs: Vec<Vec<Vec<f64>>>,
}

impl PatchProjection {
    pub fn modes(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    /// Values of every mode on local element `i` at `x`.
    pub fn values(&self, i: usize, x: Point, out: &mut Vec<f64>) {
        let mut mv = Vec::new();
        self.monomials[i].values(x, &mut mv);
        out.clear();
        out.extend(
            self.coeffs[i]
                .iter()
                .map(|c| c.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>()),
        );
    }
}

/// Solves the `psi_a`-weighted normal equations per fine element and mode.
pub fn project_patch_data(
    patch: &Patch,
    fine: &MeshLevel,
    src: &SourceMoments,
) -> Result<PatchProjection> {
    let deg = patch.degree - 1;
    let rule = &src.quad.rule;
    let mut monomials = Vec::with_capacity(patch.elements.len());
    let mut coeffs = Vec::with_capacity(patch.elements.len());
    let mut mv = Vec::new();
    for (i, &t) in patch.elements.iter().enumerate() {
        let mono = MonomialBasis::for_triangle(deg, &fine.element_points(t));
        let nb = mono.len();
        let mut gram = Mat::<f64>::zeros(nb, nb);
        let mut rhs = Mat::<f64>::zeros(nb, src.modes);
        for (k, (&x, &w)) in src.quad.points[t]
            .iter()
            .zip(&src.quad.weights[t])
            .enumerate()
        {
            let ww = w * patch.hat_at(i, rule.points[k]);
            mono.values(x, &mut mv);
            for r in 0..nb {
                for c in 0..nb {
                    gram[(r, c)] += ww * mv[r] * mv[c];
                }
                for j in 0..src.modes {
                    rhs[(r, j)] += ww * mv[r] * src.moment(t, k, j);
                }
            }
        }
        let sol = DenseCholesky::new(&gram)?.solve_many(&rhs);
        coeffs.push(
            (0..src.modes)
                .map(|j| (0..nb).map(|r| sol[(r, j)]).collect())
                .collect(),
        );
        monomials.push(mono);
    }
    Ok(PatchProjection {
        vertex: patch.vertex,
        degree: deg,
        monomials,
        coeffs,
    })
}

/// `f_htau` modes at the quadrature points of the step source samples.
#[derive(Debug, Clone)]
pub struct DataApproximation {
    pub projections: Vec<PatchProjection>,
    /// `values[t][k * modes + j]`.
    pub values: Vec<Vec<f64>>,
    pub modes: usize,
}

impl DataApproximation {
    #[inline]
    pub fn moment(&self, t: usize, k: usize, j: usize) -> f64 {
        self.values[t][k * self.modes + j]
    }
}

/// Sums `psi_a Pi^{a,n} f` over all patches of the step.
pub fn assemble_f_htau(
    patches: &[Patch],
    projections: Vec<PatchProjection>,
    src: &SourceMoments,
) -> DataApproximation {
    let modes = src.modes;
    let rule = &src.quad.rule;
    let mut values: Vec<Vec<f64>> = src.values.iter().map(|v| vec![0.0; v.len()]).collect();
    let mut pv = Vec::new();
    for (patch, proj) in patches.iter().zip(&projections) {
        for (i, &t) in patch.elements.iter().enumerate() {
            for (k, &x) in src.quad.points[t].iter().enumerate() {
                let psi = patch.hat_at(i, rule.points[k]);
                proj.values(i, x, &mut pv);
                for j in 0..modes {
                    values[t][k * modes + j] += psi * pv[j];
                }
            }
        }
    }
    DataApproximation {
        projections,
        values,
        modes,
    }
}
