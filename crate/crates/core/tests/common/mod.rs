#![allow(dead_code)]

pub mod mms;
pub mod poly;

use nalgebra::{DMatrix, Matrix3, Matrix6};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use vkplate::constitutive::SymTensor2D;
use vkplate::{Field, MaterialSet};

pub fn random_spd6(rng: &mut ChaCha8Rng) -> Matrix6<f64> {
    let l = Matrix6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    l * l.transpose() + Matrix6::identity() * 0.5
}

pub fn random_spd3(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let l = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    l * l.transpose() + Matrix3::identity() * 0.3
}

pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

/// Plate material with the `|A|²` form for both tensors and unit expansion.
pub fn identity_material(alpha: f64, kappa: f64) -> MaterialSet {
    let c = SymTensor2D::identity_form();
    MaterialSet::new(
        c.clone(),
        c,
        nalgebra::Matrix2::identity(),
        1.0,
        nalgebra::Matrix2::identity(),
        kappa,
        alpha,
    )
    .unwrap()
}

pub fn field(f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Field {
    Field::new(f)
}
