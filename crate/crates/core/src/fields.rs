//! Space-time scalar fields, loads, plate states and initial data.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, U_PER_NODE, V_PER_NODE};

type ScalarFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

/// Scalar field `(x1, x2, t) ↦ value`.
#[derive(Clone)]
pub struct Field {
    f: Arc<ScalarFn>,
    zero: bool,
}

impl Field {
    pub fn new(f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            zero: false,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            f: Arc::new(move |_, _, _| c),
            zero: c == 0.0,
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Known to vanish identically; lets assembly skip the term.
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    #[inline]
    pub fn eval(&self, x1: f64, x2: f64, t: f64) -> f64 {
        (self.f)(x1, x2, t)
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero {
            f.write_str("Field(0)")
        } else {
            f.write_str("Field(..)")
        }
    }
}

/// External data of the plate problem.
#[derive(Debug, Clone)]
pub struct Loads {
    /// Transverse force density.
    pub f2d: Field,
    /// External temperature on the boundary; nonnegative.
    pub mu_flat: Field,
    /// Test-only body force in the in-plane equation (manufactured solutions).
    pub gu_test: Option<[Field; 2]>,
    /// Test-only heat source (manufactured solutions).
    pub gmu_test: Option<Field>,
}

impl Default for Loads {
    fn default() -> Self {
        Self {
            f2d: Field::zero(),
            mu_flat: Field::zero(),
            gu_test: None,
            gmu_test: None,
        }
    }
}

impl Loads {
    pub fn transverse(f2d: Field) -> Self {
        Self { f2d, ..Self::default() }
    }

    /// Rejects negative external temperatures at the boundary nodes.
    pub fn check_mu_flat(&self, grid: &Grid2D, t: f64) -> Result<()> {
        if self.mu_flat.is_zero() {
            return Ok(());
        }
        for (a, _, _) in grid.boundary_segments() {
            let (x, y) = grid.node_coords(a);
            let m = self.mu_flat.eval(x, y, t);
            if !(m >= 0.0) {
                return Err(Error::Invalid(format!(
                    "external temperature must be >= 0, got {m} at ({x}, {y}), t = {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Discrete fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateState {
    pub t: f64,
    /// `u_dofs[2 node + c]`
    pub u: Vec<f64>,
    /// `v_dofs[4 node + k]`, `k` = value, ∂₁, ∂₂, ∂₁₂
    pub v: Vec<f64>,
    /// `mu_dofs[node]`
    pub mu: Vec<f64>,
}

impl PlateState {
    pub fn zeros(grid: &Grid2D) -> Self {
        let l = grid.layout();
        Self {
            t: 0.0,
            u: vec![0.0; l.n_u()],
            v: vec![0.0; l.n_v()],
            mu: vec![0.0; l.n_mu()],
        }
    }

    pub fn check_shape(&self, grid: &Grid2D) -> Result<()> {
        let l = grid.layout();
        if self.u.len() != l.n_u() || self.v.len() != l.n_v() || self.mu.len() != l.n_mu() {
            return Err(Error::Invalid(format!(
                "state sizes ({}, {}, {}) do not match the grid ({}, {}, {})",
                self.u.len(),
                self.v.len(),
                self.mu.len(),
                l.n_u(),
                l.n_v(),
                l.n_mu()
            )));
        }
        Ok(())
    }

    /// Nodal deflection values.
    pub fn v_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.v.iter().step_by(V_PER_NODE).copied()
    }

    pub fn min_mu(&self) -> f64 {
        self.mu.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Initial data. Missing deflection derivatives fall back to central
/// differences of `v0`.
#[derive(Debug, Clone)]
pub struct InitialCondition {
    pub u0: [Field; 2],
    pub v0: Field,
    /// `(∂₁v0, ∂₂v0, ∂₁₂v0)`
    pub v0_derivatives: Option<[Field; 3]>,
    pub mu0: Field,
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self {
            u0: [Field::zero(), Field::zero()],
            v0: Field::zero(),
            v0_derivatives: Some([Field::zero(), Field::zero(), Field::zero()]),
            mu0: Field::zero(),
        }
    }
}

impl InitialCondition {
    /// Nodal interpolation at `t = 0`. Clamped DOFs must be (numerically) zero
    /// and are stored as exact zeros.
    pub fn interpolate(&self, grid: &Grid2D) -> Result<PlateState> {
        let mut s = PlateState::zeros(grid);
        let scale = grid.lx().max(grid.ly());
        let eps = 1e-5 * scale;
        for n in 0..grid.n_nodes() {
            let (x, y) = grid.node_coords(n);
            for c in 0..U_PER_NODE {
                s.u[U_PER_NODE * n + c] = self.u0[c].eval(x, y, 0.0);
            }
            let v0 = |x: f64, y: f64| self.v0.eval(x, y, 0.0);
            let d = match &self.v0_derivatives {
                Some(d) => [d[0].eval(x, y, 0.0), d[1].eval(x, y, 0.0), d[2].eval(x, y, 0.0)],
                None => [
                    (v0(x + eps, y) - v0(x - eps, y)) / (2.0 * eps),
                    (v0(x, y + eps) - v0(x, y - eps)) / (2.0 * eps),
                    (v0(x + eps, y + eps) - v0(x + eps, y - eps) - v0(x - eps, y + eps) + v0(x - eps, y - eps))
                        / (4.0 * eps * eps),
                ],
            };
            s.v[V_PER_NODE * n] = v0(x, y);
            s.v[V_PER_NODE * n + 1..V_PER_NODE * (n + 1)].copy_from_slice(&d);
            s.mu[n] = self.mu0.eval(x, y, 0.0);
        }
        let l = grid.layout();
        let magnitude = s.u.iter().chain(&s.v).fold(0.0f64, |m, v| m.max(v.abs()));
        // The derivative fallback carries O(eps) noise on the clamped edges.
        let tol = 1e-6 * (1.0 + magnitude);
        for (vals, fixed, what) in [(&mut s.u, l.u_fixed(), "u0"), (&mut s.v, l.v_fixed(), "v0")] {
            for (i, val) in vals.iter_mut().enumerate() {
                if fixed[i] {
                    if val.abs() > tol {
                        return Err(Error::Invalid(format!(
                            "initial {what} violates the clamping condition at DOF {i} (value {val})"
                        )));
                    }
                    *val = 0.0;
                }
            }
        }
        Ok(s)
    }
}
