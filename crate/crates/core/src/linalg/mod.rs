//! Small dense helpers plus the sparse kernels used by assembly and the solvers.

mod band;
mod cg;
mod csr;

pub use band::{BandCholesky, BandLu};
pub use cg::{cg_jacobi, CgReport};
pub use csr::{CsrMatrix, SparsityBuilder};

use nalgebra::{Matrix2, Vector2, Vector3};

/// Engineering-shear Voigt vector `(a11, a22, 2 a12)` of the symmetric part of `a`.
pub fn voigt2(a: &Matrix2<f64>) -> Vector3<f64> {
    Vector3::new(a[(0, 0)], a[(1, 1)], a[(0, 1)] + a[(1, 0)])
}

/// Symmetric matrix from a stress-like Voigt vector `(s11, s22, s12)`.
pub fn from_voigt2_stress(s: &Vector3<f64>) -> Matrix2<f64> {
    Matrix2::new(s[0], s[2], s[2], s[1])
}

/// `(a ⊗ b + b ⊗ a) / 2`
pub fn sym_outer(a: &Vector2<f64>, b: &Vector2<f64>) -> Matrix2<f64> {
    let ab = a * b.transpose();
    (ab + ab.transpose()) * 0.5
}

pub fn sym2(a: &Matrix2<f64>) -> Matrix2<f64> {
    (a + a.transpose()) * 0.5
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
