//! Orthonormal polynomials on a physical triangle (Dubiner basis), evaluated
//! by recurrences in collapsed coordinates. Functions are ordered by total
//! degree and normalised so that `|K|^{-1} (psi_i, psi_j)_K = delta_ij`.

use super::scalar::poly_dim;

#[derive(Debug, Clone)]
pub struct OrthoBasis {
    pub degree: usize,
    origin: [f64; 2],
    /// Rows map physical offsets to reference coordinates `(r, s)`.
    inv_jac: [[f64; 2]; 2],
    /// `(i, j)` of each function: Legendre index and Jacobi index.
    index: Vec<(usize, usize)>,
    norms: Vec<f64>,
}

impl OrthoBasis {
    pub fn new(degree: usize, v: &[[f64; 2]; 3]) -> Self {
        let j = [
            [v[1][0] - v[0][0], v[2][0] - v[0][0]],
            [v[1][1] - v[0][1], v[2][1] - v[0][1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv_jac = [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ];
        let mut index = Vec::with_capacity(poly_dim(degree));
        for total in 0..=degree {
            for jj in 0..=total {
                index.push((total - jj, jj));
            }
        }
        // |K|^{-1} int_K psi_ij^2 = 2 int_ref psi_ij^2 = 1 / ((2i+1)(i+j+1)).
        let norms = index
            .iter()
            .map(|&(i, jj)| (((2 * i + 1) * (i + jj + 1)) as f64).sqrt())
            .collect();
        Self {
            degree,
            origin: v[0],
            inv_jac,
            index,
            norms,
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Index of the first function of total degree `d`.
    pub fn degree_start(d: usize) -> usize {
        if d == 0 {
            0
        } else {
            poly_dim(d - 1)
        }
    }

    fn reference(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inv_jac[0][0] * d[0] + self.inv_jac[0][1] * d[1],
            self.inv_jac[1][0] * d[0] + self.inv_jac[1][1] * d[1],
        ]
    }

    pub fn values(&self, x: [f64; 2], out: &mut Vec<f64>) {
        let [r, s] = self.reference(x);
        let p = self.degree;
        let (q, _, _) = legendre_collapsed(p, r, s, false);
        out.clear();
        let b = 2.0 * s - 1.0;
        let mut jac = vec![0.0; p + 1];
        let mut i_prev = usize::MAX;
        for (k, &(i, j)) in self.index.iter().enumerate() {
            if i != i_prev {
                jacobi(p - i, (2 * i + 1) as f64, b, &mut jac, None);
                i_prev = i;
            }
            out.push(self.norms[k] * q[i] * jac[j]);
        }
    }

    /// Values and physical gradients.
    pub fn values_and_grads(&self, x: [f64; 2], vals: &mut Vec<f64>, grads: &mut Vec<[f64; 2]>) {
        let [r, s] = self.reference(x);
        let p = self.degree;
        let (q, qr, qs) = legendre_collapsed(p, r, s, true);
        let b = 2.0 * s - 1.0;
        vals.clear();
        grads.clear();
        let mut jac = vec![0.0; p + 1];
        let mut djac = vec![0.0; p + 1];
        let mut i_prev = usize::MAX;
        for (k, &(i, j)) in self.index.iter().enumerate() {
            if i != i_prev {
                jacobi(p - i, (2 * i + 1) as f64, b, &mut jac, Some(&mut djac));
                i_prev = i;
            }
            let n = self.norms[k];
            let (pj, dpj) = (jac[j], 2.0 * djac[j]);
            vals.push(n * q[i] * pj);
            let gr = n * qr[i] * pj;
            let gs = n * (qs[i] * pj + q[i] * dpj);
            // grad_x = J^{-T} grad_ref
            grads.push([
                self.inv_jac[0][0] * gr + self.inv_jac[1][0] * gs,
                self.inv_jac[0][1] * gr + self.inv_jac[1][1] * gs,
            ]);
        }
    }
}

/// `Q_i = P_i(X / Y) Y^i` with `X = 2r + s - 1`, `Y = 1 - s`, for `i <= p`,
/// optionally with derivatives in `r` and `s`.
fn legendre_collapsed(p: usize, r: f64, s: f64, derivs: bool) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let x = 2.0 * r + s - 1.0;
    let y = 1.0 - s;
    let mut q = vec![0.0; p + 1];
    let (mut qr, mut qs) = if derivs {
        (vec![0.0; p + 1], vec![0.0; p + 1])
    } else {
        (Vec::new(), Vec::new())
    };
    q[0] = 1.0;
    if p >= 1 {
        q[1] = x;
        if derivs {
            qr[1] = 2.0;
            qs[1] = 1.0;
        }
    }
    for i in 1..p {
        let a = (2 * i + 1) as f64;
        let c = i as f64;
        let d = (i + 1) as f64;
        q[i + 1] = (a * x * q[i] - c * y * y * q[i - 1]) / d;
        if derivs {
            qr[i + 1] = (a * (2.0 * q[i] + x * qr[i]) - c * y * y * qr[i - 1]) / d;
            qs[i + 1] =
                (a * (q[i] + x * qs[i]) - c * (-2.0 * y * q[i - 1] + y * y * qs[i - 1])) / d;
        }
    }
    (q, qr, qs)
}

/// Jacobi polynomials `P_n^{(alpha, 0)}(b)`, `n = 0..=m`, and their
/// derivatives in `b`.
fn jacobi(m: usize, alpha: f64, b: f64, out: &mut [f64], mut deriv: Option<&mut [f64]>) {
    out[0] = 1.0;
    if let Some(d) = deriv.as_deref_mut() {
        d[0] = 0.0;
    }
    if m == 0 {
        return;
    }
    out[1] = 0.5 * (alpha + 2.0) * b + 0.5 * alpha;
    if let Some(d) = deriv.as_deref_mut() {
        d[1] = 0.5 * (alpha + 2.0);
    }
    for n in 1..m {
        let nf = n as f64;
        let s = 2.0 * nf + alpha;
        let a1 = 2.0 * (nf + 1.0) * (nf + alpha + 1.0) * s;
        let a2 = (s + 1.0) * alpha * alpha;
        let a3 = s * (s + 1.0) * (s + 2.0);
        let a4 = 2.0 * (nf + alpha) * nf * (s + 2.0);
        out[n + 1] = ((a2 + a3 * b) * out[n] - a4 * out[n - 1]) / a1;
        if let Some(d) = deriv.as_deref_mut() {
            d[n + 1] = ((a2 + a3 * b) * d[n] + a3 * out[n] - a4 * d[n - 1]) / a1;
        }
    }
}
