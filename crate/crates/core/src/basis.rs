//! Reference shape functions on axis-aligned rectangles: bilinear (Q1) for
//! the in-plane displacement and temperature, Bogner–Fox–Schmit bicubic
//! Hermite for the deflection.

use nalgebra::{Matrix2, Vector2};

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    const G1: [(f64, f64); 1] = [(0.0, 2.0)];
    const G2: [(f64, f64); 2] = [(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)];
    const G3: [(f64, f64); 3] = [
        (-0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
        (0.0, 0.888_888_888_888_889),
        (0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
    ];
    const G4: [(f64, f64); 4] = [
        (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
        (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    ];
    const G6: [(f64, f64); 6] = [
        (-0.932_469_514_203_152, 0.171_324_492_379_170_3),
        (-0.661_209_386_466_264_5, 0.360_761_573_048_138_6),
        (-0.238_619_186_083_196_9, 0.467_913_934_572_691),
        (0.238_619_186_083_196_9, 0.467_913_934_572_691),
        (0.661_209_386_466_264_5, 0.360_761_573_048_138_6),
        (0.932_469_514_203_152, 0.171_324_492_379_170_3),
    ];
    match n {
        1 => &G1,
        2 => &G2,
        3 => &G3,
        4 => &G4,
        6 => &G6,
        _ => panic!("no {n}-point Gauss rule"),
    }
}

/// Tensor Gauss rule on `[0, 1]²`: `(ξ, η, weight)`.
pub fn unit_square_rule(n: usize) -> Vec<(f64, f64, f64)> {
    let g = gauss_legendre(n);
    let mut out = Vec::with_capacity(n * n);
    for &(gy, wy) in g {
        for &(gx, wx) in g {
            out.push((0.5 * (1.0 + gx), 0.5 * (1.0 + gy), 0.25 * wx * wy));
        }
    }
    out
}

/// Corner offsets of element-local nodes, counter-clockwise from the origin.
pub const CORNERS: [(usize, usize); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];

/// Bilinear basis on the unit square: values and physical gradients.
pub fn q1(xi: f64, eta: f64, hx: f64, hy: f64) -> ([f64; 4], [Vector2<f64>; 4]) {
    let lx = [1.0 - xi, xi];
    let ly = [1.0 - eta, eta];
    let dlx = [-1.0 / hx, 1.0 / hx];
    let dly = [-1.0 / hy, 1.0 / hy];
    let mut n = [0.0; 4];
    let mut g = [Vector2::zeros(); 4];
    for (k, &(a, b)) in CORNERS.iter().enumerate() {
        n[k] = lx[a] * ly[b];
        g[k] = Vector2::new(dlx[a] * ly[b], lx[a] * dly[b]);
    }
    (n, g)
}

/// 1D cubic Hermite function of the given end (`0` or `1`) and kind
/// (`false` = value, `true` = slope) on an interval of length `h`:
/// value, first and second physical derivative.
pub fn hermite(end: usize, slope: bool, s: f64, h: f64) -> (f64, f64, f64) {
    let (s2, s3) = (s * s, s * s * s);
    match (end, slope) {
        (0, false) => (
            1.0 - 3.0 * s2 + 2.0 * s3,
            (-6.0 * s + 6.0 * s2) / h,
            (-6.0 + 12.0 * s) / (h * h),
        ),
        (1, false) => (
            3.0 * s2 - 2.0 * s3,
            (6.0 * s - 6.0 * s2) / h,
            (6.0 - 12.0 * s) / (h * h),
        ),
        (0, true) => (h * (s - 2.0 * s2 + s3), 1.0 - 4.0 * s + 3.0 * s2, (-4.0 + 6.0 * s) / h),
        (1, true) => (h * (-s2 + s3), -2.0 * s + 3.0 * s2, (-2.0 + 6.0 * s) / h),
        _ => unreachable!(),
    }
}

/// One Bogner–Fox–Schmit basis function at a point.
#[derive(Debug, Clone, Copy)]
pub struct C1Shape {
    pub value: f64,
    pub grad: Vector2<f64>,
    pub hess: Matrix2<f64>,
}

/// The 16 BFS functions at `(ξ, η)`, indexed `4 * node + k` with
/// `k` = value, ∂₁, ∂₂, ∂₁₂.
pub fn bfs(xi: f64, eta: f64, hx: f64, hy: f64) -> [C1Shape; 16] {
    let mut out = [C1Shape {
        value: 0.0,
        grad: Vector2::zeros(),
        hess: Matrix2::zeros(),
    }; 16];
    for (node, &(a, b)) in CORNERS.iter().enumerate() {
        for k in 0..4 {
            let (fx, dfx, ddfx) = hermite(a, k == 1 || k == 3, xi, hx);
            let (fy, dfy, ddfy) = hermite(b, k == 2 || k == 3, eta, hy);
            out[4 * node + k] = C1Shape {
                value: fx * fy,
                grad: Vector2::new(dfx * fy, fx * dfy),
                hess: Matrix2::new(ddfx * fy, dfx * dfy, dfx * dfy, fx * ddfy),
            };
        }
    }
    out
}

/// Shape data of every basis at every point of a fixed element rule. All
/// elements of a structured grid share the same table.
#[derive(Debug, Clone)]
pub struct ElementTable {
    pub points: Vec<QuadPoint>,
}

#[derive(Debug, Clone)]
pub struct QuadPoint {
    /// Reference coordinates in `[0, 1]²`.
    pub xi: f64,
    pub eta: f64,
    /// Weight including the element area.
    pub weight: f64,
    pub q1: [f64; 4],
    pub q1_grad: [Vector2<f64>; 4],
    pub bfs: [C1Shape; 16],
}

impl ElementTable {
    pub fn new(hx: f64, hy: f64, order: usize) -> Self {
        let points = unit_square_rule(order)
            .into_iter()
            .map(|(xi, eta, w)| {
                let (q1, q1_grad) = q1(xi, eta, hx, hy);
                QuadPoint {
                    xi,
                    eta,
                    weight: w * hx * hy,
                    q1,
                    q1_grad,
                    bfs: bfs(xi, eta, hx, hy),
                }
            })
            .collect();
        Self { points }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for n in [1, 2, 3, 4, 6] {
            let deg = 2 * n - 1;
            for p in 0..=deg {
                let q: f64 = gauss_legendre(n).iter().map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert_relative_eq!(q, exact, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn bfs_nodal_interpolation_property() {
        let (hx, hy) = (0.3, 0.7);
        for (node, &(a, b)) in CORNERS.iter().enumerate() {
            let s = bfs(a as f64, b as f64, hx, hy);
            for (j, f) in s.iter().enumerate() {
                let expect = |k: usize| if j == 4 * node + k { 1.0 } else { 0.0 };
                assert_relative_eq!(f.value, expect(0), epsilon = 1e-14);
                assert_relative_eq!(f.grad[0], expect(1), epsilon = 1e-13);
                assert_relative_eq!(f.grad[1], expect(2), epsilon = 1e-13);
                assert_relative_eq!(f.hess[(0, 1)], expect(3), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn bfs_value_functions_partition_unity() {
        for &(xi, eta) in &[(0.1, 0.2), (0.5, 0.5), (0.9, 0.33)] {
            let s = bfs(xi, eta, 0.25, 0.5);
            let sum: f64 = (0..4).map(|n| s[4 * n].value).sum();
            assert_relative_eq!(sum, 1.0, epsilon = 1e-14);
            let (n, _) = q1(xi, eta, 0.25, 0.5);
            assert_relative_eq!(n.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn bfs_derivatives_match_finite_differences() {
        let (hx, hy) = (0.4, 0.6);
        let (xi, eta) = (0.37, 0.61);
        let eps = 1e-6;
        let s = bfs(xi, eta, hx, hy);
        let sx = bfs(xi + eps / hx, eta, hx, hy);
        let sxm = bfs(xi - eps / hx, eta, hx, hy);
        let sy = bfs(xi, eta + eps / hy, hx, hy);
        let sym = bfs(xi, eta - eps / hy, hx, hy);
        for j in 0..16 {
            let dx = (sx[j].value - sxm[j].value) / (2.0 * eps);
            let dy = (sy[j].value - sym[j].value) / (2.0 * eps);
            assert_relative_eq!(s[j].grad[0], dx, epsilon = 1e-8);
            assert_relative_eq!(s[j].grad[1], dy, epsilon = 1e-8);
            let dxx = (sx[j].grad[0] - sxm[j].grad[0]) / (2.0 * eps);
            let dxy = (sy[j].grad[0] - sym[j].grad[0]) / (2.0 * eps);
            let dyy = (sy[j].grad[1] - sym[j].grad[1]) / (2.0 * eps);
            assert_relative_eq!(s[j].hess[(0, 0)], dxx, epsilon = 1e-6);
            assert_relative_eq!(s[j].hess[(0, 1)], dxy, epsilon = 1e-6);
            assert_relative_eq!(s[j].hess[(1, 1)], dyy, epsilon = 1e-6);
        }
    }
}
