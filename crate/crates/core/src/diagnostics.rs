//! Energy bookkeeping for trajectories of the time-discrete plate system.

use crate::assembly::{gather_mech, gather_nodal, kinematics, membrane_strain, nodal_at, rate_fields};
use crate::constitutive::MaterialSet;
use crate::fields::{Loads, PlateState};
use crate::grid::Grid2D;
use crate::linalg::voigt2;
use crate::parallel::map_indexed;

/// Stored elastic energy `∫ ½ Q_el(E) + (1/24) Q_el(∇²v)`.
pub fn elastic_energy(grid: &Grid2D, state: &PlateState, mat: &MaterialSet) -> f64 {
    let c = mat.c_el();
    map_indexed(grid.n_elements(), |e| {
        let d = gather_mech(grid, e, &state.u, &state.v);
        grid.table()
            .points
            .iter()
            .map(|qp| {
                let k = kinematics(qp, &d);
                let strain = membrane_strain(&k.grad_u, &k.grad_v);
                qp.weight * (0.5 * c.quad_form(&strain) + c.quad_form(&k.hess_v) / 24.0)
            })
            .sum::<f64>()
    })
    .into_iter()
    .sum()
}

/// Energy exchanged during one step `prev → next`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepIncrements {
    /// `dt ∫ Q_R(Ė) + (1/12) Q_R(Ḣ)` with the full viscosity tensor.
    pub visc_diss: f64,
    /// `dt ∫ μⁿ⁺¹ B:Ė`.
    pub cpl_work: f64,
    /// `∫ f(tⁿ⁺¹)(vⁿ⁺¹ − vⁿ)` plus the work of any test-only in-plane force.
    pub ext_work: f64,
}

pub fn step_increments(
    grid: &Grid2D,
    prev: &PlateState,
    next: &PlateState,
    mat: &MaterialSet,
    loads: &Loads,
) -> StepIncrements {
    let dt = next.t - prev.t;
    let (hx, hy) = grid.spacing();
    let t = next.t;
    let thermal = mat.has_thermal_stress();
    let b = mat.b_thermal();
    let b_voigt = nalgebra::Vector3::new(b[(0, 0)], b[(1, 1)], 0.5 * (b[(0, 1)] + b[(1, 0)]));
    let parts = map_indexed(grid.n_elements(), |e| {
        let (ox, oy) = grid.element_origin(e);
        let cur = gather_mech(grid, e, &next.u, &next.v);
        let old = gather_mech(grid, e, &prev.u, &prev.v);
        let mut diff = cur;
        diff.u.iter_mut().zip(old.u).for_each(|(a, b)| *a -= b);
        diff.v.iter_mut().zip(old.v).for_each(|(a, b)| *a -= b);
        let mu = gather_nodal(grid, e, &next.mu);
        let mut inc = StepIncrements::default();
        for qp in &grid.table().points {
            let w = qp.weight;
            let k = kinematics(qp, &cur);
            // increments of strain and curvature over the step, i.e. dt·Ė and dt·Ḣ
            let (de, dh) = rate_fields(qp, &diff, &k);
            if dt > 0.0 {
                inc.visc_diss += w * (mat.c_visc().quad_form(&de) + mat.c_visc().quad_form(&dh) / 12.0) / dt;
            }
            if thermal {
                inc.cpl_work += w * nodal_at(qp, &mu) * b_voigt.dot(&voigt2(&de));
            }
            let x = ox + qp.xi * hx;
            let y = oy + qp.eta * hy;
            if !loads.f2d.is_zero() {
                let dv = kinematics(qp, &diff).v;
                inc.ext_work += w * loads.f2d.eval(x, y, t) * dv;
            }
            if let Some(g) = &loads.gu_test {
                let du = kinematics(qp, &diff).u;
                inc.ext_work += w * (g[0].eval(x, y, t) * du[0] + g[1].eval(x, y, t) * du[1]);
            }
        }
        inc
    });
    parts
        .into_iter()
        .fold(StepIncrements::default(), |a, b| StepIncrements {
            visc_diss: a.visc_diss + b.visc_diss,
            cpl_work: a.cpl_work + b.cpl_work,
            ext_work: a.ext_work + b.ext_work,
        })
}

/// One row of the energy ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub t: f64,
    pub elastic: f64,
    pub increments: StepIncrements,
    pub visc_diss_cum: f64,
    pub cpl_work_cum: f64,
    pub ext_work_cum: f64,
    /// `elastic − elastic(0) + visc_cum + cpl_cum − ext_cum`.
    pub balance_residual: f64,
    /// Residual divided by `max(1, elastic(0) + ext_cum)`.
    pub normalized_residual: f64,
    pub min_mu: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    pub entries: Vec<LedgerEntry>,
}

impl EnergyLedger {
    pub fn start(grid: &Grid2D, state: &PlateState, mat: &MaterialSet) -> Self {
        let elastic = elastic_energy(grid, state, mat);
        Self {
            entries: vec![LedgerEntry {
                t: state.t,
                elastic,
                increments: StepIncrements::default(),
                visc_diss_cum: 0.0,
                cpl_work_cum: 0.0,
                ext_work_cum: 0.0,
                balance_residual: 0.0,
                normalized_residual: 0.0,
                min_mu: state.min_mu(),
            }],
        }
    }

    pub fn push_step(&mut self, grid: &Grid2D, prev: &PlateState, next: &PlateState, mat: &MaterialSet, loads: &Loads) {
        let inc = step_increments(grid, prev, next, mat, loads);
        let first = self.entries[0].elastic;
        let last = *self.entries.last().expect("ledger is never empty");
        let elastic = elastic_energy(grid, next, mat);
        let visc = last.visc_diss_cum + inc.visc_diss;
        let cpl = last.cpl_work_cum + inc.cpl_work;
        let ext = last.ext_work_cum + inc.ext_work;
        let residual = elastic - first + visc + cpl - ext;
        self.entries.push(LedgerEntry {
            t: next.t,
            elastic,
            increments: inc,
            visc_diss_cum: visc,
            cpl_work_cum: cpl,
            ext_work_cum: ext,
            balance_residual: residual,
            normalized_residual: residual / (first + ext).max(1.0),
            min_mu: next.min_mu(),
        });
    }

    pub fn last(&self) -> &LedgerEntry {
        self.entries.last().expect("ledger is never empty")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Per-step balance residuals of a sequence of states.
pub fn balance_residual(grid: &Grid2D, states: &[PlateState], mat: &MaterialSet, loads: &Loads) -> Vec<f64> {
    let Some(first) = states.first() else {
        return Vec::new();
    };
    let mut ledger = EnergyLedger::start(grid, first, mat);
    for w in states.windows(2) {
        ledger.push_step(grid, &w[0], &w[1], mat, loads);
    }
    ledger.entries.iter().map(|e| e.balance_residual).collect()
}
