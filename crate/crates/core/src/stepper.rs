//! Implicit Euler time stepping with regime-dependent ordering of the
//! mechanical and heat subproblems.

use crate::assembly::{assemble_heat, assemble_mech_with, mech_pattern, MechRates};
use crate::constitutive::MaterialSet;
use crate::diagnostics::EnergyLedger;
use crate::error::{Error, Result};
use crate::fields::{InitialCondition, Loads, PlateState};
use crate::grid::Grid2D;
use crate::linalg::{cg_jacobi, norm2, BandCholesky, BandLu, CgReport, CsrMatrix};

/// Solver for the SPD heat system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolver {
    Direct,
    Cg { rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub dt: f64,
    pub t_end: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub linear_solver: LinearSolver,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_end: 1.0,
            newton_tol: 1e-10,
            newton_max_iter: 25,
            linear_solver: LinearSolver::Direct,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.dt <= self.t_end * (1.0 + 1e-12)) {
            return Err(Error::Invalid(format!(
                "dt = {} must not exceed t_end = {}",
                self.dt, self.t_end
            )));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::Invalid("newton_tol must be > 0".into()));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::Invalid("newton_max_iter must be ≥ 1".into()));
        }
        if let LinearSolver::Cg { rel_tol } = self.linear_solver {
            if !(rel_tol > 0.0) {
                return Err(Error::Invalid("linear solver tolerance must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Number of steps covering `[0, t_end]`; the last step is shortened if
    /// `t_end` is not a multiple of `dt`.
    pub fn step_count(&self) -> usize {
        let r = self.t_end / self.dt;
        let n = r.round();
        if (r - n).abs() <= 1e-9 * r.max(1.0) {
            n as usize
        } else {
            r.ceil() as usize
        }
    }
}

/// Convergence history of one time step.
#[derive(Debug, Clone, Default)]
pub struct StepReport {
    pub newton_residuals: Vec<f64>,
    pub heat_cg: Option<CgReport>,
}

/// Whether the heat problem is solved before mechanics.
pub fn heat_first(mat: &MaterialSet) -> bool {
    mat.has_thermal_stress()
}

/// Reusable step machinery with cached sparsity patterns.
pub struct Stepper<'a> {
    grid: &'a Grid2D,
    mat: &'a MaterialSet,
    loads: &'a Loads,
    params: SimParams,
    pattern: CsrMatrix,
}

impl<'a> Stepper<'a> {
    pub fn new(grid: &'a Grid2D, mat: &'a MaterialSet, loads: &'a Loads, params: SimParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            grid,
            mat,
            loads,
            params,
            pattern: mech_pattern(grid),
        })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    /// Newton solve of the mechanical step with temperature `mu` in the
    /// thermal-stress term.
    fn mechanics(&self, prev: &PlateState, t_next: f64, dt: f64, mu: &[f64]) -> Result<(PlateState, Vec<f64>)> {
        let layout = self.grid.layout();
        let mut guess = prev.clone();
        guess.t = t_next;
        guess.mu = mu.to_vec();
        let mut history = Vec::new();
        let mut r0 = None;
        for it in 0..=self.params.newton_max_iter {
            let a = assemble_mech_with(self.grid, prev, &guess, dt, self.mat, self.loads, &self.pattern)?;
            let r = norm2(&a.residual);
            history.push(r);
            if !r.is_finite() {
                return Err(Error::NewtonDiverged {
                    iterations: it,
                    residual: r,
                });
            }
            let r0 = *r0.get_or_insert(r);
            if r <= self.params.newton_tol * (1.0 + r0) {
                return Ok((guess, history));
            }
            if it == self.params.newton_max_iter {
                return Err(Error::NoConvergence {
                    iterations: it,
                    residual: r,
                });
            }
            let delta = BandLu::factor(&a.jacobian)?.solve(&a.residual);
            let mut x = layout.gather_free(&guess.u, &guess.v);
            x.iter_mut().zip(&delta).for_each(|(x, d)| *x -= d);
            layout.scatter_free(&x, &mut guess.u, &mut guess.v);
        }
        unreachable!("loop returns on its last iteration")
    }

    /// Implicit heat step from `prev` using the given mechanical rates.
    pub fn heat(
        &self,
        prev: &PlateState,
        rates: &MechRates,
        t_next: f64,
        dt: f64,
    ) -> Result<(Vec<f64>, Option<CgReport>)> {
        self.loads.check_mu_flat(self.grid, t_next)?;
        let sys = assemble_heat(self.grid, prev, rates, dt, t_next, self.mat, self.loads)?;
        match self.params.linear_solver {
            LinearSolver::Direct => Ok((BandCholesky::factor(&sys.matrix)?.solve(&sys.rhs), None)),
            LinearSolver::Cg { rel_tol } => {
                let (x, rep) = cg_jacobi(&sys.matrix, &sys.rhs, &prev.mu, rel_tol, 10 * sys.rhs.len() + 100)?;
                Ok((x, Some(rep)))
            }
        }
    }

    /// One step of length `dt` from `prev`.
    pub fn step_with_report(&self, prev: &PlateState, dt: f64) -> Result<(PlateState, StepReport)> {
        prev.check_shape(self.grid)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Invalid(format!("time step must be > 0, got {dt}")));
        }
        let t_next = prev.t + dt;
        if heat_first(self.mat) {
            // no dissipative heating in this regime, so the rates are irrelevant
            let (mu, cg) = self.heat(prev, &MechRates::zeros(self.grid), t_next, dt)?;
            let (next, newton) = self.mechanics(prev, t_next, dt, &mu)?;
            Ok((
                next,
                StepReport {
                    newton_residuals: newton,
                    heat_cg: cg,
                },
            ))
        } else {
            let (mut next, newton) = self.mechanics(prev, t_next, dt, &prev.mu)?;
            let rates = MechRates::between(prev, &next, dt);
            let (mu, cg) = self.heat(prev, &rates, t_next, dt)?;
            next.mu = mu;
            Ok((
                next,
                StepReport {
                    newton_residuals: newton,
                    heat_cg: cg,
                },
            ))
        }
    }

    pub fn step(&self, prev: &PlateState) -> Result<PlateState> {
        Ok(self.step_with_report(prev, self.params.dt)?.0)
    }

    /// Runs from `initial` to `t_end`, recording every state and the ledger.
    pub fn run_from(&self, initial: PlateState) -> Result<Trajectory> {
        initial.check_shape(self.grid)?;
        let n = self.params.step_count();
        let mut ledger = EnergyLedger::start(self.grid, &initial, self.mat);
        let mut states = Vec::with_capacity(n + 1);
        let mut reports = Vec::with_capacity(n);
        states.push(initial);
        for k in 0..n {
            let prev = states.last().expect("non-empty");
            let t_target = ((k + 1) as f64 * self.params.dt).min(self.params.t_end);
            let dt = t_target - prev.t;
            let (next, rep) = self.step_with_report(prev, dt)?;
            ledger.push_step(self.grid, prev, &next, self.mat, self.loads);
            states.push(next);
            reports.push(rep);
        }
        Ok(Trajectory {
            states,
            ledger,
            reports,
        })
    }
}

/// States at every step, the energy ledger and solver histories.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<PlateState>,
    pub ledger: EnergyLedger,
    pub reports: Vec<StepReport>,
}

impl Trajectory {
    pub fn last(&self) -> &PlateState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Advances one step of length `params.dt`.
pub fn step(
    grid: &Grid2D,
    state: &PlateState,
    mat: &MaterialSet,
    loads: &Loads,
    params: &SimParams,
) -> Result<PlateState> {
    Stepper::new(grid, mat, loads, *params)?.step(state)
}

/// Interpolates the initial condition and runs to `params.t_end`.
pub fn run(
    grid: &Grid2D,
    mat: &MaterialSet,
    loads: &Loads,
    ic: &InitialCondition,
    params: &SimParams,
) -> Result<Trajectory> {
    let initial = ic.interpolate(grid)?;
    Stepper::new(grid, mat, loads, *params)?.run_from(initial)
}
