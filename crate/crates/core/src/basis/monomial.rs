//! Scaled monomials `((x - c) / h)^alpha` used for broken polynomial spaces
//! (pressures, weighted projections) and as the primal set for RTN.

use super::scalar::poly_dim;

/// Exponents ordered by total degree: `(0,0), (1,0), (0,1), (2,0), ...`.
pub fn exponents(p: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(poly_dim(p));
    for total in 0..=p {
        for j in 0..=total {
            e.push((total - j, j));
        }
    }
    e
}

#[derive(Debug, Clone)]
pub struct MonomialBasis {
    pub degree: usize,
    pub center: [f64; 2],
    pub scale: f64,
    exps: Vec<(usize, usize)>,
}

impl MonomialBasis {
    pub fn new(degree: usize, center: [f64; 2], scale: f64) -> Self {
        Self {
            degree,
            center,
            scale,
            exps: exponents(degree),
        }
    }

    /// Basis centred at the triangle centroid, scaled by its diameter.
    pub fn for_triangle(degree: usize, v: &[[f64; 2]; 3]) -> Self {
        let c = [
            (v[0][0] + v[1][0] + v[2][0]) / 3.0,
            (v[0][1] + v[1][1] + v[2][1]) / 3.0,
        ];
        Self::new(degree, c, crate::mesh::diameter(v))
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exps
    }

    pub fn local(&self, x: [f64; 2]) -> [f64; 2] {
        [
            (x[0] - self.center[0]) / self.scale,
            (x[1] - self.center[1]) / self.scale,
        ]
    }

    fn powers(&self, xi: f64) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.degree + 1);
        p.push(1.0);
        for k in 1..=self.degree {
            p.push(p[k - 1] * xi);
        }
        p
    }

    pub fn values(&self, x: [f64; 2], out: &mut Vec<f64>) {
        let xi = self.local(x);
        let (px, py) = (self.powers(xi[0]), self.powers(xi[1]));
        out.clear();
        out.extend(self.exps.iter().map(|&(a, b)| px[a] * py[b]));
    }

    pub fn values_and_grads(&self, x: [f64; 2], vals: &mut Vec<f64>, grads: &mut Vec<[f64; 2]>) {
        let xi = self.local(x);
        let (px, py) = (self.powers(xi[0]), self.powers(xi[1]));
        vals.clear();
        grads.clear();
        for &(a, b) in &self.exps {
            vals.push(px[a] * py[b]);
            let gx = if a > 0 {
                a as f64 * px[a - 1] * py[b]
            } else {
                0.0
            };
            let gy = if b > 0 {
                b as f64 * px[a] * py[b - 1]
            } else {
                0.0
            };
            grads.push([gx / self.scale, gy / self.scale]);
        }
    }

    /// Index of exponent `(a, b)` in this basis.
    pub fn index_of(a: usize, b: usize) -> usize {
        let t = a + b;
        t * (t + 1) / 2 + b
    }
}
