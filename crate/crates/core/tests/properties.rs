mod common;

use nalgebra::{Matrix2, Matrix3, Matrix6};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vkplate::assembly::{assemble_mech_elastic, membrane_strain};
use vkplate::constitutive::{reduce_form, reduce_heat_conductivity, SymTensor3D};
use vkplate::diagnostics::elastic_energy;
use vkplate::export::Table;
use vkplate::expr::Expr;
use vkplate::{Edge, Grid2D, Loads, PlateState};

use common::{identity_material, random_spd3, random_spd6};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3..1e3f64, any::<f64>().prop_filter("finite", |v| v.is_finite()),]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduced_form_is_the_minimum_over_completions(
        seed in any::<u64>(),
        a in prop::array::uniform3(-2.0..2.0f64),
        extra in prop::array::uniform3(-2.0..2.0f64),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c3 = SymTensor3D::from_voigt(random_spd6(&mut rng)).unwrap();
        let (c2, map) = reduce_form(&c3).unwrap();
        let a = Matrix2::new(a[0], a[2], a[2], a[1]);
        let q2 = c2.quad_form(&a);
        let best = map.complete(&a);
        prop_assert!((c3.quad_form(&best) - q2).abs() <= 1e-10 * (1.0 + q2.abs()));
        let mut other = best;
        other[(0, 2)] += extra[0];
        other[(2, 0)] += extra[0];
        other[(1, 2)] += extra[1];
        other[(2, 1)] += extra[1];
        other[(2, 2)] += extra[2];
        prop_assert!(c3.quad_form(&other) >= q2 - 1e-10 * (1.0 + q2.abs()));
        prop_assert!(q2 >= -1e-12);
    }

    #[test]
    fn reduced_tensor_is_symmetric_positive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c2, _) = reduce_form(&SymTensor3D::from_voigt(random_spd6(&mut rng)).unwrap()).unwrap();
        let v = c2.voigt();
        prop_assert!((v - v.transpose()).abs().max() == 0.0);
        prop_assert!(v.symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn reduced_conductivity_is_spd_and_below_the_block(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k3 = random_spd3(&mut rng);
        let k2 = reduce_heat_conductivity(&k3).unwrap();
        prop_assert!(k2.symmetric_eigen().eigenvalues.min() > 0.0);
        let gap = k3.fixed_view::<2, 2>(0, 0).into_owned() - k2;
        prop_assert!(gap.symmetric_eigen().eigenvalues.min() >= -1e-12);
    }

    #[test]
    fn block_diagonal_tensors_reduce_to_their_block(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let full = random_spd6(&mut rng);
        let keep = [0usize, 1, 5];
        let mut m = Matrix6::zeros();
        for i in 0..6 {
            for j in 0..6 {
                if keep.contains(&i) == keep.contains(&j) {
                    m[(i, j)] = full[(i, j)];
                }
            }
        }
        let (c2, map) = reduce_form(&SymTensor3D::from_voigt(m).unwrap()).unwrap();
        let block = Matrix3::from_fn(|r, c| m[(keep[r], keep[c])]);
        prop_assert!((c2.voigt() - block).abs().max() <= 1e-12 * block.abs().max());
        prop_assert!(map.coeff.abs().max() <= 1e-12);
    }

    #[test]
    fn membrane_strain_is_symmetric(g in prop::array::uniform4(-5.0..5.0f64), w in prop::array::uniform2(-5.0..5.0f64)) {
        let e = membrane_strain(&Matrix2::new(g[0], g[1], g[2], g[3]), &nalgebra::Vector2::new(w[0], w[1]));
        prop_assert_eq!(e[(0, 1)], e[(1, 0)]);
        prop_assert!((e[(0, 0)] - g[0] - 0.5 * w[0] * w[0]).abs() <= 1e-12);
    }

    #[test]
    fn elastic_energy_is_nonnegative_and_tangent_symmetric(
        u in prop::collection::vec(-0.5..0.5f64, 18),
        v in prop::collection::vec(-0.5..0.5f64, 36),
    ) {
        let g = Grid2D::new(2, 2, 1.0, 1.0, &[Edge::Left]).unwrap();
        let mut s = PlateState::zeros(&g);
        s.u.copy_from_slice(&u);
        s.v.copy_from_slice(&v);
        let mat = identity_material(3.0, 0.0);
        prop_assert!(elastic_energy(&g, &s, &mat) >= 0.0);
        let a = assemble_mech_elastic(&g, &s, &mat, &Loads::default()).unwrap();
        let scale = a.jacobian.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(a.jacobian.max_asymmetry() <= 1e-12 * scale);
    }

    #[test]
    fn affine_expressions_evaluate_exactly(a in -100.0..100.0f64, b in -100.0..100.0f64, x in -3.0..3.0f64) {
        let e = Expr::parse(&format!("({a:e}) + ({b:e}) * x1")).unwrap();
        prop_assert_eq!(e.eval(x, 0.0, 0.0), a + b * x);
    }

    #[test]
    fn expressions_respect_precedence(a in 0.1..4.0f64, b in 0.1..4.0f64, t in 0.0..2.0f64) {
        let e = Expr::parse(&format!("-{a:e}^2 + {b:e} * t / 2 - sin(x2)")).unwrap();
        let want = -(a.powf(2.0)) + b * t / 2.0 - 0.3f64.sin();
        prop_assert!((e.eval(0.0, 0.3, t) - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }

    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec(prop::array::uniform3(finite()), 0..8)) {
        let mut t = Table::new(["a", "b", "c"]);
        for r in &rows {
            t.push(r.to_vec());
        }
        let back = Table::parse_csv(&t.to_csv()).unwrap();
        prop_assert_eq!(back.columns, t.columns);
        prop_assert_eq!(back.rows.len(), rows.len());
        for (x, y) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
