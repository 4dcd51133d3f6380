//! Gauss-Legendre rules on `[-1, 1]` and collapsed (Duffy) product rules on
//! the reference triangle.

use std::f64::consts::PI;

use super::legendre::legendre_values_and_derivs;

/// `n`-point Gauss-Legendre nodes and weights on `[-1, 1]`, exact to degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let (mut v, mut d) = (Vec::new(), Vec::new());
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            legendre_values_and_derivs(n, x, &mut v, &mut d);
            let dx = v[n] / d[n];
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        legendre_values_and_derivs(n, x, &mut v, &mut d);
        let w = 2.0 / ((1.0 - x * x) * d[n] * d[n]);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A one-dimensional rule on `[-1, 1]` with its declared exactness degree.
#[derive(Debug, Clone)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl LineRule {
    pub fn gauss(npoints: usize) -> Self {
        let (points, weights) = gauss_legendre(npoints);
        Self {
            points,
            weights,
            degree: 2 * npoints - 1,
        }
    }

    pub fn with_degree(degree: usize) -> Self {
        Self::gauss(degree / 2 + 1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rule on the reference triangle `{x, y >= 0, x + y <= 1}` (area 1/2).
/// Points are stored as barycentric triples `(1 - x - y, x, y)`.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// Conical product rule exact for polynomials of total degree `degree`.
    pub fn with_degree(degree: usize) -> Self {
        let n = (degree + 2).div_ceil(2).max(1);
        let (g, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&gv, &wv) in g.iter().zip(&w) {
            let v = 0.5 * (gv + 1.0);
            for (&gu, &wu) in g.iter().zip(&w) {
                let u = 0.5 * (gu + 1.0);
                let x = u * (1.0 - v);
                let y = v;
                points.push([1.0 - x - y, x, y]);
                weights.push(0.25 * wu * wv * (1.0 - v));
            }
        }
        Self {
            points,
            weights,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Cached triangle rules indexed by degree.
#[derive(Debug, Default)]
pub struct TriangleRules {
    rules: std::sync::Mutex<Vec<Option<std::sync::Arc<TriangleRule>>>>,
}

impl TriangleRules {
    pub fn get(&self, degree: usize) -> std::sync::Arc<TriangleRule> {
        let mut g = self.rules.lock().expect("rule cache poisoned");
        if g.len() <= degree {
            g.resize(degree + 1, None);
        }
        g[degree]
            .get_or_insert_with(|| std::sync::Arc::new(TriangleRule::with_degree(degree)))
            .clone()
    }
}

/// Process-wide rule cache.
pub fn triangle_rule(degree: usize) -> std::sync::Arc<TriangleRule> {
    static CACHE: std::sync::OnceLock<TriangleRules> = std::sync::OnceLock::new();
    CACHE.get_or_init(TriangleRules::default).get(degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `int_T x^a y^b = a! b! / (a + b + 2)!` on the reference triangle.
    fn monomial_exact(a: u32, b: u32) -> f64 {
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn gauss_exactness_audit() {
        for n in 1..12 {
            let r = LineRule::gauss(n);
            for k in 0..=r.degree {
                let q: f64 = r
                    .points
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                let exact = if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                };
                assert!(
                    (q - exact).abs() <= 1e-13 * exact.abs().max(1.0),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn triangle_exactness_audit() {
        for deg in 0..=22 {
            let r = TriangleRule::with_degree(deg);
            for a in 0..=deg as u32 {
                for b in 0..=(deg as u32 - a) {
                    let q: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                        .sum();
                    let e = monomial_exact(a, b);
                    assert!((q - e).abs() <= 1e-13 * e, "deg={deg} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn triangle_points_inside() {
        let r = triangle_rule(9);
        for p in &r.points {
            assert!(p.iter().all(|&l| l > 0.0 && l < 1.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}
