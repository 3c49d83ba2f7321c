mod common;

use std::sync::Arc;

use vkplate::diagnostics::{balance_residual, elastic_energy};
use vkplate::stepper::{SimParams, Stepper};
use vkplate::{Edge, Field, Grid2D, InitialCondition, Loads, PlateState};

use common::identity_material;
use common::mms::Mms;
use common::poly::Poly2;

fn bumped_ic() -> InitialCondition {
    // clamped on the left: v = x² b(y) has zero value and slope at x = 0
    InitialCondition {
        u0: [Field::new(|x, y, _| 0.05 * x * y), Field::zero()],
        v0: Field::new(|x, _, _| 0.2 * x * x),
        v0_derivatives: Some([Field::new(|x, _, _| 0.4 * x), Field::zero(), Field::zero()]),
        mu0: Field::new(|x, _, _| 1.0 + x),
    }
}

#[test]
fn one_step_zero_trajectory() {
    let g = Grid2D::new(3, 3, 1.0, 1.0, &[Edge::Bottom]).unwrap();
    let p = SimParams {
        dt: 0.25,
        t_end: 0.25,
        ..Default::default()
    };
    let t = vkplate::run(
        &g,
        &identity_material(3.0, 1.0),
        &Loads::default(),
        &InitialCondition::default(),
        &p,
    )
    .unwrap();
    assert_eq!(t.states.len(), 2);
    assert_eq!(t.ledger.len(), 2);
    assert!(t
        .ledger
        .entries
        .iter()
        .all(|e| e.balance_residual == 0.0 && e.elastic == 0.0));
    assert_eq!(t.states[1].t, 0.25);
}

#[test]
fn times_increase_from_zero() {
    let g = Grid2D::new(3, 3, 1.0, 1.0, &[Edge::Left]).unwrap();
    let p = SimParams {
        dt: 0.3,
        t_end: 1.0,
        ..Default::default()
    };
    let t = vkplate::run(&g, &identity_material(4.0, 0.0), &Loads::default(), &bumped_ic(), &p).unwrap();
    assert_eq!(t.states[0].t, 0.0);
    assert!(t.states.windows(2).all(|w| w[1].t > w[0].t));
    assert!((t.last().t - 1.0).abs() < 1e-15);
}

#[test]
fn unloaded_viscous_steps_dissipate_elastic_energy() {
    let g = Grid2D::new(6, 6, 1.0, 1.0, &[Edge::Left]).unwrap();
    for alpha in [3.0, 4.0] {
        let mat = identity_material(alpha, 0.0);
        let mut ic = bumped_ic();
        ic.mu0 = Field::zero();
        let p = SimParams {
            dt: 0.1,
            t_end: 1.0,
            ..Default::default()
        };
        let t = vkplate::run(&g, &mat, &Loads::default(), &ic, &p).unwrap();
        let e: Vec<f64> = t.states.iter().map(|s| elastic_energy(&g, s, &mat)).collect();
        assert!(e[0] > 0.0);
        for w in e.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "energy grew: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn ledger_invariants() {
    let g = Grid2D::new(6, 6, 1.0, 1.0, &[Edge::Left]).unwrap();
    let p = SimParams {
        dt: 0.1,
        t_end: 1.0,
        ..Default::default()
    };
    // α = 3: no coupling work, nonnegative dissipation
    let t = vkplate::run(
        &g,
        &identity_material(3.0, 0.5),
        &Loads::transverse(Field::constant(0.3)),
        &bumped_ic(),
        &p,
    )
    .unwrap();
    for e in &t.ledger.entries {
        assert_eq!(e.cpl_work_cum, 0.0);
        assert!(e.increments.visc_diss >= 0.0);
    }
    // no transverse load: no external work
    let t = vkplate::run(&g, &identity_material(2.0, 0.5), &Loads::default(), &bumped_ic(), &p).unwrap();
    assert!(t.ledger.entries.iter().all(|e| e.ext_work_cum == 0.0));
    assert!(t.ledger.entries.iter().any(|e| e.cpl_work_cum != 0.0));
}

#[test]
fn balance_is_insensitive_to_shifting_the_ambient_temperature_when_insulated() {
    let g = Grid2D::new(5, 5, 1.0, 1.0, &[Edge::Left]).unwrap();
    let mat = identity_material(2.0, 0.0);
    let p = SimParams {
        dt: 0.1,
        t_end: 0.5,
        ..Default::default()
    };
    let run = |shift: f64| {
        let loads = Loads {
            f2d: Field::constant(0.2),
            mu_flat: Field::new(move |x, _, _| x + shift),
            ..Default::default()
        };
        let t = vkplate::run(&g, &mat, &loads, &bumped_ic(), &p).unwrap();
        balance_residual(&g, &t.states, &mat, &loads)
    };
    let (a, b) = (run(0.0), run(7.0));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn ledger_matches_recomputed_balance() {
    let g = Grid2D::new(5, 5, 1.0, 1.0, &[Edge::Left]).unwrap();
    let mat = identity_material(4.0, 0.2);
    let loads = Loads::transverse(Field::new(|x, _, t| x * (1.0 + t)));
    let p = SimParams {
        dt: 0.1,
        t_end: 0.5,
        ..Default::default()
    };
    let t = vkplate::run(&g, &mat, &loads, &bumped_ic(), &p).unwrap();
    let r = balance_residual(&g, &t.states, &mat, &loads);
    let from_ledger: Vec<f64> = t.ledger.entries.iter().map(|e| e.balance_residual).collect();
    assert_eq!(r, from_ledger);
}

#[test]
fn consecutive_dissipation_vanishes_in_long_runs() {
    let g = Grid2D::new(6, 6, 1.0, 1.0, &[Edge::Left]).unwrap();
    let mat = identity_material(4.0, 0.0);
    let loads = Loads::transverse(Field::constant(0.5));
    let p = SimParams {
        dt: 1.0,
        t_end: 40.0,
        ..Default::default()
    };
    let t = Stepper::new(&g, &mat, &loads, p)
        .unwrap()
        .run_from(PlateState::zeros(&g))
        .unwrap();
    let d: Vec<f64> = t
        .ledger
        .entries
        .iter()
        .skip(1)
        .map(|e| e.increments.visc_diss)
        .collect();
    assert!(d[0] > 1e-3);
    assert!(*d.last().unwrap() < 1e-14);
}

#[test]
fn newton_shows_quadratic_tail() {
    let g = Grid2D::new(6, 6, 1.0, 1.0, &[Edge::Left]).unwrap();
    let mat = identity_material(4.0, 0.0);
    let loads = Loads::transverse(Field::constant(2.0));
    let p = SimParams {
        dt: 0.5,
        t_end: 0.5,
        newton_tol: 1e-13,
        ..Default::default()
    };
    let t = Stepper::new(&g, &mat, &loads, p)
        .unwrap()
        .run_from(PlateState::zeros(&g))
        .unwrap();
    let r = &t.reports[0].newton_residuals;
    assert!(r.len() >= 4, "{r:?}");
    // the contraction constant r_{k+1} / r_k² stays bounded near convergence
    let k = r.len() - 2;
    let c = r[k] / (r[k - 1] * r[k - 1]);
    assert!(r[k] < 1e-3 * r[k - 1] && c < 1e3, "{r:?}");
}

#[test]
fn non_divisible_end_time_is_reached_exactly() {
    let g = Grid2D::new(3, 3, 1.0, 1.0, &[Edge::Left]).unwrap();
    let p = SimParams {
        dt: 0.3,
        t_end: 1.0,
        ..Default::default()
    };
    let t = vkplate::run(
        &g,
        &identity_material(3.0, 0.0),
        &Loads::transverse(Field::constant(0.1)),
        &InitialCondition::default(),
        &p,
    )
    .unwrap();
    assert_eq!(t.states.len(), 5);
    assert_eq!(t.last().t, 1.0);
}

#[test]
fn clamping_violation_in_initial_data_is_rejected() {
    let g = Grid2D::new(3, 3, 1.0, 1.0, &[Edge::Left]).unwrap();
    let ic = InitialCondition {
        v0: Field::constant(1.0),
        v0_derivatives: None,
        ..Default::default()
    };
    assert!(ic.interpolate(&g).is_err());
}

#[test]
fn derivative_fallback_matches_supplied_derivatives() {
    let g = Grid2D::new(4, 4, 1.0, 1.0, &[Edge::Left]).unwrap();
    let exact = bumped_ic().interpolate(&g).unwrap();
    let mut ic = bumped_ic();
    ic.v0_derivatives = None;
    let fd = ic.interpolate(&g).unwrap();
    for (a, b) in exact.v.iter().zip(&fd.v) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn manufactured_forcing_vanishes_on_exact_interpolant_as_mesh_refines() {
    // the discrete residual at the interpolated exact solution shrinks under refinement
    let mms = Arc::new(Mms::new());
    let mat = mms.material();
    let loads = mms.loads();
    let ic = mms.initial_condition();
    let mut norms = Vec::new();
    for n in [4, 8] {
        let g = Grid2D::new(n, n, 1.0, 1.0, &Edge::ALL).unwrap();
        let p = SimParams {
            dt: 0.05,
            t_end: 0.05,
            ..Default::default()
        };
        let t = vkplate::run(&g, &mat, &loads, &ic, &p).unwrap();
        norms.push(mms.errors(&g, t.last()));
    }
    assert!(norms[1].1 < norms[0].1);
}

#[test]
fn polynomial_algebra() {
    let x = Poly2::x();
    let y = Poly2::y();
    let p = &(&x * &x) * &(&y + &Poly2::constant(2.0));
    assert_eq!(p.eval(3.0, 0.5), 9.0 * 2.5);
    assert_eq!(p.dx().eval(3.0, 0.5), 6.0 * 2.5);
    assert_eq!(p.dy().eval(3.0, 0.5), 9.0);
    assert_eq!((&p - &p).eval(1.3, 0.7), 0.0);
}
