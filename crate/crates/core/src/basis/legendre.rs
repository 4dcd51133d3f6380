//! Legendre polynomials on `[-1, 1]` and their affine images on time intervals.
//!
//! `L_q` mapped to `(t_start, t_end)` satisfies `L_q(t_end) = 1`,
//! `L_q(t_start) = (-1)^q` and `int L_q L_r dt = delta_qr * tau / (2q + 1)`.
//! The orthonormal family `phi_j = sqrt((2j + 1) / tau) L_j` is what the
//! solver, reconstruction and flux modules use for temporal modes.

use crate::error::{Error, Result};

/// Values `P_0(s) ..= P_n(s)` via the three-term recurrence.
pub fn legendre_values(n: usize, s: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    out.push(s);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * s * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
}

/// Values and first derivatives of `P_0 ..= P_n` at `s`.
///
/// Derivatives use `P'_{k+1} = P'_{k-1} + (2k + 1) P_k`, which stays exact at
/// the endpoints.
pub fn legendre_values_and_derivs(n: usize, s: f64, vals: &mut Vec<f64>, ders: &mut Vec<f64>) {
    legendre_values(n, s, vals);
    ders.clear();
    ders.push(0.0);
    if n == 0 {
        return;
    }
    ders.push(1.0);
    for k in 1..n {
        let d = ders[k - 1] + (2.0 * k as f64 + 1.0) * vals[k];
        ders.push(d);
    }
}

/// Single Legendre value `P_n(s)`.
pub fn legendre(n: usize, s: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, s);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * s * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Legendre polynomials mapped affinely onto one time interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreTimeBasis {
    pub t_start: f64,
    pub t_end: f64,
    pub degree: usize,
}

impl LegendreTimeBasis {
    pub fn new(t_start: f64, t_end: f64, degree: usize) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(Error::InvalidArgument(format!(
                "empty time interval ({t_start}, {t_end})"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            degree,
        })
    }

    pub fn tau(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Reference coordinate `s in [-1, 1]` of time `t`.
    pub fn to_reference(&self, t: f64) -> f64 {
        (2.0 * t - self.t_start - self.t_end) / self.tau()
    }

    pub fn from_reference(&self, s: f64) -> f64 {
        0.5 * (self.t_start + self.t_end) + 0.5 * self.tau() * s
    }

    /// `L_q(t)`. Negative degrees are rejected.
    pub fn eval(&self, q: i64, t: f64) -> Result<f64> {
        if q < 0 {
            return Err(Error::InvalidArgument(format!(
                "negative Legendre degree {q}"
            )));
        }
        Ok(legendre(q as usize, self.to_reference(t)))
    }

    /// `int_{I} |L_q|^2 dt`.
    pub fn l2_norm_sq(&self, q: usize) -> f64 {
        self.tau() / (2.0 * q as f64 + 1.0)
    }

    /// Scaling between `L_j` and the orthonormal `phi_j`.
    pub fn ortho_scale(&self, j: usize) -> f64 {
        ((2.0 * j as f64 + 1.0) / self.tau()).sqrt()
    }

    /// `phi_0(t) ..= phi_n(t)`.
    pub fn orthonormal_values(&self, n: usize, t: f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(n + 1);
        legendre_values(n, self.to_reference(t), &mut v);
        for (j, x) in v.iter_mut().enumerate() {
            *x *= self.ortho_scale(j);
        }
        v
    }

    /// `phi_j` and `d phi_j / dt` for `j = 0..=n`.
    pub fn orthonormal_values_and_derivs(&self, n: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
        let (mut v, mut d) = (Vec::new(), Vec::new());
        legendre_values_and_derivs(n, self.to_reference(t), &mut v, &mut d);
        let dsdt = 2.0 / self.tau();
        for j in 0..=n {
            let c = self.ortho_scale(j);
            v[j] *= c;
            d[j] *= c * dsdt;
        }
        (v, d)
    }

    /// `phi_j(t_start^+)`.
    pub fn orthonormal_at_start(&self, j: usize) -> f64 {
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * self.ortho_scale(j)
    }

    pub fn orthonormal_at_end(&self, j: usize) -> f64 {
        self.ortho_scale(j)
    }

    /// `D[i][k] = int_I phi_k' phi_i dt`, computed from
    /// `int_{-1}^{1} P_k' P_i ds = 2` when `i < k` and `i + k` is odd.
    pub fn derivative_coupling(&self, n: usize) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; n + 1]; n + 1];
        for (i, row) in d.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                if i < k && (i + k) % 2 == 1 {
                    *x = 2.0 * self.ortho_scale(i) * self.ortho_scale(k);
                }
            }
        }
        d
    }

    /// DG temporal block: `C[i][k] = int phi_k' phi_i + phi_k(t^+) phi_i(t^+)`.
    pub fn dg_coupling(&self, n: usize) -> Vec<Vec<f64>> {
        let mut c = self.derivative_coupling(n);
        for (i, row) in c.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                *x += self.orthonormal_at_start(i) * self.orthonormal_at_start(k);
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::quadrature::gauss_legendre;

    #[test]
    fn endpoint_values() {
        let b = LegendreTimeBasis::new(0.3, 0.7, 3).unwrap();
        assert_eq!(b.eval(0, 0.41).unwrap(), 1.0);
        assert!((b.eval(3, 0.7).unwrap() - 1.0).abs() < 1e-14);
        assert!((b.eval(3, 0.3).unwrap() + 1.0).abs() < 1e-14);
        for q in 0..8 {
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            assert!((b.eval(q, 0.3).unwrap() - sign).abs() < 1e-13);
        }
    }

    #[test]
    fn negative_degree_rejected() {
        let b = LegendreTimeBasis::new(0.0, 1.0, 2).unwrap();
        assert!(b.eval(-1, 0.5).is_err());
    }

    #[test]
    fn norm_formula_and_quadrature() {
        let b = LegendreTimeBasis::new(0.0, 1.0, 0).unwrap();
        assert_eq!(b.l2_norm_sq(0), 1.0);
        let b = LegendreTimeBasis::new(0.0, 0.5, 0).unwrap();
        assert!((b.l2_norm_sq(2) - 0.1).abs() < 1e-15);

        let b = LegendreTimeBasis::new(1.0, 1.25, 0).unwrap();
        let (s, w) = gauss_legendre(8);
        let quad: f64 = s
            .iter()
            .zip(&w)
            .map(|(&si, &wi)| {
                let v = legendre(5, si);
                wi * v * v * 0.5 * b.tau()
            })
            .sum();
        assert!((quad - 0.25 / 11.0).abs() < 1e-14);
        assert!((b.l2_norm_sq(5) - 0.25 / 11.0).abs() < 1e-16);
    }

    #[test]
    fn orthonormal_gram_is_identity() {
        let b = LegendreTimeBasis::new(0.2, 0.45, 0).unwrap();
        let n = 6;
        let (s, w) = gauss_legendre(n + 2);
        let mut g = vec![vec![0.0; n + 1]; n + 1];
        for (&si, &wi) in s.iter().zip(&w) {
            let phi = b.orthonormal_values(n, b.from_reference(si));
            for i in 0..=n {
                for j in 0..=n {
                    g[i][j] += wi * 0.5 * b.tau() * phi[i] * phi[j];
                }
            }
        }
        for i in 0..=n {
            for j in 0..=n {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - e).abs() < 1e-13, "{i} {j} {}", g[i][j]);
            }
        }
    }

    #[test]
    fn derivative_coupling_matches_quadrature() {
        let b = LegendreTimeBasis::new(0.0, 0.3, 0).unwrap();
        let n = 5;
        let d = b.derivative_coupling(n);
        let (s, w) = gauss_legendre(n + 2);
        for i in 0..=n {
            for k in 0..=n {
                let mut acc = 0.0;
                for (&si, &wi) in s.iter().zip(&w) {
                    let (v, dv) = b.orthonormal_values_and_derivs(n, b.from_reference(si));
                    acc += wi * 0.5 * b.tau() * dv[k] * v[i];
                }
                assert!((acc - d[i][k]).abs() < 1e-11 * (1.0 + acc.abs()), "{i} {k}");
            }
        }
    }

    #[test]
    fn derivative_endpoint_values() {
        let (mut v, mut d) = (Vec::new(), Vec::new());
        legendre_values_and_derivs(6, 1.0, &mut v, &mut d);
        for n in 0..=6 {
            assert!((d[n] - (n * (n + 1)) as f64 / 2.0).abs() < 1e-12);
        }
    }
}
