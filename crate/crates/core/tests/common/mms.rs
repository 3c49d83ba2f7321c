//! Manufactured solution for the coupled plate system on the unit square
//! with all edges clamped and Robin heat exchange, `alpha = 2`.
//!
//! `u* = (1+t) b (a₁, a₂)`, `v* = (1+t) 16 b²`, `μ* = M₀ + t M₁` with
//! `b = x(1−x) y(1−y)`. Every field is linear in time, so backward
//! differences are exact and only the spatial error remains.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{Matrix2, Matrix3};

use vkplate::basis::{bfs, gauss_legendre, q1};
use vkplate::constitutive::SymTensor2D;
use vkplate::{Field, Grid2D, InitialCondition, Loads, MaterialSet, PlateState};

use super::poly::Poly2;

pub const A1: f64 = 1.0;
pub const A2: f64 = -0.5;

pub struct Mms {
    pub c_el: Matrix3<f64>,
    pub c_r: Matrix3<f64>,
    pub b: Matrix2<f64>,
    pub k: Matrix2<f64>,
    pub cv: f64,
    pub kappa: f64,
    u1: Poly2,
    u2: Poly2,
    v: Poly2,
    m0: Poly2,
    m1: Poly2,
}

/// Right-hand sides of the strong form at one instant.
pub struct Forcing {
    pub f: Poly2,
    pub g1: Poly2,
    pub g2: Poly2,
    pub gmu: Poly2,
}

fn c(a: f64) -> Poly2 {
    Poly2::constant(a)
}

impl Mms {
    pub fn new() -> Self {
        let x = Poly2::x();
        let y = Poly2::y();
        let bx = &x * &(&c(1.0) - &x);
        let by = &y * &(&c(1.0) - &y);
        let b = &bx * &by;
        Self {
            c_el: Matrix3::new(1.2, 0.3, 0.0, 0.3, 1.0, 0.0, 0.0, 0.0, 0.4),
            c_r: Matrix3::new(0.5, 0.1, 0.0, 0.1, 0.6, 0.0, 0.0, 0.0, 0.2),
            b: Matrix2::new(1.0, 0.3, 0.3, 0.5),
            k: Matrix2::new(1.0, 0.2, 0.2, 0.5),
            cv: 1.0,
            kappa: 1.0,
            u1: b.scale(A1),
            u2: b.scale(A2),
            v: (&b * &b).scale(16.0),
            m0: &(&c(1.0) + &x.scale(0.5)) + &(&y * &y).scale(0.25),
            m1: &c(0.3) + &(&x * &y).scale(0.2),
        }
    }

    pub fn material(&self) -> MaterialSet {
        MaterialSet::new(
            SymTensor2D::from_voigt(self.c_el).unwrap(),
            SymTensor2D::from_voigt(self.c_r).unwrap(),
            self.b,
            self.cv,
            self.k,
            self.kappa,
            2.0,
        )
        .unwrap()
    }

    fn mu(&self, t: f64) -> Poly2 {
        &self.m0 + &self.m1.scale(t)
    }

    pub fn exact(&self, t: f64, x: f64, y: f64) -> ([f64; 2], f64, f64) {
        let s = 1.0 + t;
        (
            [s * self.u1.eval(x, y), s * self.u2.eval(x, y)],
            s * self.v.eval(x, y),
            self.mu(t).eval(x, y),
        )
    }

    /// `C · (e11, e22, 2 e12)` as polynomials.
    fn apply(c: &Matrix3<f64>, e: [&Poly2; 3]) -> [Poly2; 3] {
        let eng = [e[0].clone(), e[1].clone(), e[2].scale(2.0)];
        std::array::from_fn(|i| (0..3).fold(Poly2::zero(), |acc, j| &acc + &eng[j].scale(c[(i, j)])))
    }

    pub fn forcing(&self, t: f64) -> Forcing {
        let s = 1.0 + t;
        let (u1, u2, v) = (self.u1.scale(s), self.u2.scale(s), self.v.scale(s));
        let (vx, vy) = (v.dx(), v.dy());
        let (wx, wy) = (self.v.dx(), self.v.dy());
        let half = 0.5;
        let e11 = &u1.dx() + &(&vx * &vx).scale(half);
        let e22 = &u2.dy() + &(&vy * &vy).scale(half);
        let e12 = &(&u1.dy() + &u2.dx()).scale(half) + &(&vx * &vy).scale(half);
        let r11 = &self.u1.dx() + &(&wx * &vx);
        let r22 = &self.u2.dy() + &(&wy * &vy);
        let r12 = &(&self.u1.dy() + &self.u2.dx()).scale(half) + &(&(&wx * &vy) + &(&wy * &vx)).scale(half);
        let mu = self.mu(t);
        let se = Self::apply(&self.c_el, [&e11, &e22, &e12]);
        let sr = Self::apply(&self.c_r, [&r11, &r22, &r12]);
        let sigma: [Poly2; 3] = std::array::from_fn(|i| {
            let bij = [self.b[(0, 0)], self.b[(1, 1)], self.b[(0, 1)]][i];
            &(&se[i] + &sr[i]) + &mu.scale(bij)
        });
        let (vxx, vyy, vxy) = (vx.dx(), vy.dy(), vx.dy());
        let (wxx, wyy, wxy) = (wx.dx(), wy.dy(), wx.dy());
        let me = Self::apply(&self.c_el, [&vxx, &vyy, &vxy]);
        let mr = Self::apply(&self.c_r, [&wxx, &wyy, &wxy]);
        let m: [Poly2; 3] = std::array::from_fn(|i| (&me[i] + &mr[i]).scale(1.0 / 12.0));
        let divdiv = &(&m[0].dx().dx() + &m[1].dy().dy()) + &m[2].dx().dy().scale(2.0);
        let q1 = &(&sigma[0] * &vx) + &(&sigma[2] * &vy);
        let q2 = &(&sigma[2] * &vx) + &(&sigma[1] * &vy);
        let f = &divdiv - &(&q1.dx() + &q2.dy());
        let g1 = -&(&sigma[0].dx() + &sigma[2].dy());
        let g2 = -&(&sigma[2].dx() + &sigma[1].dy());
        let (mx, my) = (mu.dx(), mu.dy());
        let flux1 = &mx.scale(self.k[(0, 0)]) + &my.scale(self.k[(0, 1)]);
        let flux2 = &mx.scale(self.k[(1, 0)]) + &my.scale(self.k[(1, 1)]);
        let gmu = &self.m1.scale(self.cv) - &(&flux1.dx() + &flux2.dy());
        Forcing { f, g1, g2, gmu }
    }

    /// Loads reproducing the manufactured solution, with forcing cached per instant.
    pub fn loads(self: &Arc<Self>) -> Loads {
        let cache: Arc<Mutex<HashMap<u64, Arc<Forcing>>>> = Arc::default();
        let get = {
            let me = Arc::clone(self);
            move |t: f64| -> Arc<Forcing> {
                let mut c = cache.lock().unwrap();
                Arc::clone(c.entry(t.to_bits()).or_insert_with(|| Arc::new(me.forcing(t))))
            }
        };
        let get = Arc::new(get);
        let mk = |pick: fn(&Forcing) -> &Poly2| {
            let get = Arc::clone(&get);
            Field::new(move |x, y, t| pick(&get(t)).eval(x, y))
        };
        let me = Arc::clone(self);
        let mu_flat = Field::new(move |x, y, t| {
            let mu = me.mu(t);
            let g = nalgebra::Vector2::new(mu.dx().eval(x, y), mu.dy().eval(x, y));
            let eps = 1e-12;
            let n = if x < eps {
                nalgebra::Vector2::new(-1.0, 0.0)
            } else if x > 1.0 - eps {
                nalgebra::Vector2::new(1.0, 0.0)
            } else if y < eps {
                nalgebra::Vector2::new(0.0, -1.0)
            } else {
                nalgebra::Vector2::new(0.0, 1.0)
            };
            mu.eval(x, y) + (me.k * g).dot(&n) / me.kappa
        });
        Loads {
            f2d: mk(|f| &f.f),
            mu_flat,
            gu_test: Some([mk(|f| &f.g1), mk(|f| &f.g2)]),
            gmu_test: Some(mk(|f| &f.gmu)),
        }
    }

    pub fn initial_condition(self: &Arc<Self>) -> InitialCondition {
        let p = |poly: Poly2| Field::new(move |x, y, _| poly.eval(x, y));
        InitialCondition {
            u0: [p(self.u1.clone()), p(self.u2.clone())],
            v0: p(self.v.clone()),
            v0_derivatives: Some([p(self.v.dx()), p(self.v.dy()), p(self.v.dx().dy())]),
            mu0: p(self.m0.clone()),
        }
    }

    /// L² errors of `(u, v, μ)` at `state.t` with a 6-point Gauss rule per direction.
    pub fn errors(&self, grid: &Grid2D, state: &PlateState) -> (f64, f64, f64) {
        let (hx, hy) = grid.spacing();
        let g = gauss_legendre(6);
        let (mut eu, mut ev, mut em) = (0.0, 0.0, 0.0);
        for e in 0..grid.n_elements() {
            let nodes = grid.element_nodes(e);
            let (ox, oy) = grid.element_origin(e);
            for &(gy, wy) in g {
                for &(gx, wx) in g {
                    let (xi, eta) = (0.5 * (1.0 + gx), 0.5 * (1.0 + gy));
                    let w = 0.25 * wx * wy * hx * hy;
                    let (vals, _) = q1(xi, eta, hx, hy);
                    let shapes = bfs(xi, eta, hx, hy);
                    let (mut u, mut v, mut mu) = ([0.0; 2], 0.0, 0.0);
                    for (a, &n) in nodes.iter().enumerate() {
                        u[0] += vals[a] * state.u[2 * n];
                        u[1] += vals[a] * state.u[2 * n + 1];
                        mu += vals[a] * state.mu[n];
                        for k in 0..4 {
                            v += shapes[4 * a + k].value * state.v[4 * n + k];
                        }
                    }
                    let (ue, ve, me) = self.exact(state.t, ox + xi * hx, oy + eta * hy);
                    eu += w * ((u[0] - ue[0]).powi(2) + (u[1] - ue[1]).powi(2));
                    ev += w * (v - ve).powi(2);
                    em += w * (mu - me).powi(2);
                }
            }
        }
        (eu.sqrt(), ev.sqrt(), em.sqrt())
    }
}
