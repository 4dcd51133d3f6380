//! Triangle geometry helpers.

pub type Point = [f64; 2];

pub fn signed_area(v: &[Point; 3]) -> f64 {
    0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
}

pub fn triangle_area(v: &[Point; 3]) -> f64 {
    signed_area(v).abs()
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn edge_lengths(v: &[Point; 3]) -> [f64; 3] {
    [dist(v[1], v[2]), dist(v[2], v[0]), dist(v[0], v[1])]
}

/// Longest edge.
pub fn diameter(v: &[Point; 3]) -> f64 {
    let l = edge_lengths(v);
    l[0].max(l[1]).max(l[2])
}

/// Circumradius over inradius; 2 for an equilateral triangle.
pub fn shape_ratio(v: &[Point; 3]) -> f64 {
    let [a, b, c] = edge_lengths(v);
    let area = triangle_area(v);
    let circum = a * b * c / (4.0 * area);
    let inr = 2.0 * area / (a + b + c);
    circum / inr
}

pub fn centroid(v: &[Point; 3]) -> Point {
    [
        (v[0][0] + v[1][0] + v[2][0]) / 3.0,
        (v[0][1] + v[1][1] + v[2][1]) / 3.0,
    ]
}

/// Barycentric coordinates of `x` with respect to `v`.
pub fn barycentric(v: &[Point; 3], x: Point) -> [f64; 3] {
    let det = 2.0 * signed_area(v);
    let l1 =
        ((x[0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (x[1] - v[0][1])) / det;
    let l2 =
        ((v[1][0] - v[0][0]) * (x[1] - v[0][1]) - (x[0] - v[0][0]) * (v[1][1] - v[0][1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Constant gradients of the barycentric coordinates.
pub fn barycentric_gradients(v: &[Point; 3]) -> [[f64; 2]; 3] {
    let det = 2.0 * signed_area(v);
    let mut g = [[0.0; 2]; 3];
    for k in 0..3 {
        let a = v[(k + 1) % 3];
        let b = v[(k + 2) % 3];
        // Gradient of lambda_k is the inward normal of the opposite edge over its height.
        g[k] = [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
    }
    g
}

pub fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}
