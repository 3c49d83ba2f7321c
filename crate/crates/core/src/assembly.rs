//! Pointwise plate kinematics and assembly of the mechanical residual,
//! its consistent tangent, and the implicit heat system.

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::basis::QuadPoint;
use crate::constitutive::MaterialSet;
use crate::error::{Error, Result};
use crate::fields::{Loads, PlateState};
use crate::grid::{DofLayout, Grid2D, MECH_PER_NODE, U_PER_NODE, V_PER_NODE};
use crate::linalg::{from_voigt2_stress, sym2, sym_outer, voigt2, CsrMatrix, SparsityBuilder};
use crate::parallel::map_indexed;

const N_LOCAL: usize = 24;
type LocalMatrix = [[f64; N_LOCAL]; N_LOCAL];

/// Membrane strain `sym(∇u) + ½ ∇v ⊗ ∇v`.
pub fn membrane_strain(grad_u: &Matrix2<f64>, grad_v: &Vector2<f64>) -> Matrix2<f64> {
    sym2(grad_u) + grad_v * grad_v.transpose() * 0.5
}

/// Membrane strain rate `sym(∇u̇) + ∇v̇ ⊙ ∇v`.
pub fn membrane_strain_rate(grad_du: &Matrix2<f64>, grad_v: &Vector2<f64>, grad_dv: &Vector2<f64>) -> Matrix2<f64> {
    sym2(grad_du) + sym_outer(grad_dv, grad_v)
}

/// Element-local copies of the nodal unknowns.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalDofs {
    pub u: [f64; 8],
    pub v: [f64; 16],
}

pub(crate) fn gather_mech(grid: &Grid2D, e: usize, u: &[f64], v: &[f64]) -> LocalDofs {
    let nodes = grid.element_nodes(e);
    let mut out = LocalDofs {
        u: [0.0; 8],
        v: [0.0; 16],
    };
    for (a, &n) in nodes.iter().enumerate() {
        out.u[U_PER_NODE * a..U_PER_NODE * (a + 1)].copy_from_slice(&u[U_PER_NODE * n..U_PER_NODE * (n + 1)]);
        out.v[V_PER_NODE * a..V_PER_NODE * (a + 1)].copy_from_slice(&v[V_PER_NODE * n..V_PER_NODE * (n + 1)]);
    }
    out
}

pub(crate) fn gather_nodal(grid: &Grid2D, e: usize, mu: &[f64]) -> [f64; 4] {
    grid.element_nodes(e).map(|n| mu[n])
}

/// Displacement, deflection and their derivatives at a quadrature point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kinematics {
    pub u: Vector2<f64>,
    pub grad_u: Matrix2<f64>,
    pub v: f64,
    pub grad_v: Vector2<f64>,
    pub hess_v: Matrix2<f64>,
}

pub(crate) fn kinematics(qp: &QuadPoint, d: &LocalDofs) -> Kinematics {
    let mut k = Kinematics {
        u: Vector2::zeros(),
        grad_u: Matrix2::zeros(),
        v: 0.0,
        grad_v: Vector2::zeros(),
        hess_v: Matrix2::zeros(),
    };
    for a in 0..4 {
        let g = qp.q1_grad[a];
        for c in 0..2 {
            let val = d.u[2 * a + c];
            k.u[c] += val * qp.q1[a];
            k.grad_u[(c, 0)] += val * g[0];
            k.grad_u[(c, 1)] += val * g[1];
        }
    }
    for (l, s) in qp.bfs.iter().enumerate() {
        let val = d.v[l];
        k.v += val * s.value;
        k.grad_v += s.grad * val;
        k.hess_v += s.hess * val;
    }
    k
}

pub(crate) fn nodal_at(qp: &QuadPoint, vals: &[f64; 4]) -> f64 {
    (0..4).map(|a| qp.q1[a] * vals[a]).sum()
}

/// Rates of the mechanical unknowns and the deflection at which the rate of
/// the membrane strain is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct MechRates {
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
    pub v: Vec<f64>,
}

impl MechRates {
    /// Backward differences between consecutive states, evaluated at `next`.
    pub fn between(prev: &PlateState, next: &PlateState, dt: f64) -> Self {
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(n, p)| (n - p) / dt).collect();
        Self {
            du: diff(&next.u, &prev.u),
            dv: diff(&next.v, &prev.v),
            v: next.v.clone(),
        }
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        let l = grid.layout();
        Self {
            du: vec![0.0; l.n_u()],
            dv: vec![0.0; l.n_v()],
            v: vec![0.0; l.n_v()],
        }
    }
}

/// Strain rate and curvature rate at a point.
pub(crate) fn rate_fields(qp: &QuadPoint, rate: &LocalDofs, at: &Kinematics) -> (Matrix2<f64>, Matrix2<f64>) {
    let r = kinematics(qp, rate);
    (membrane_strain_rate(&r.grad_u, &at.grad_v, &r.grad_v), r.hess_v)
}

/// Mechanical residual and Jacobian over the free `(u, v)` unknowns.
#[derive(Debug, Clone)]
pub struct AssembledMech {
    pub residual: Vec<f64>,
    pub jacobian: CsrMatrix,
    /// Residual over every mechanical DOF (`6 node + local`), clamped ones included.
    pub full_residual: Vec<f64>,
}

/// Sparsity of the free mechanical system.
pub fn mech_pattern(grid: &Grid2D) -> CsrMatrix {
    let n = grid.layout().n_free_mech();
    let mut b = SparsityBuilder::new(n, n);
    for e in 0..grid.n_elements() {
        let dofs: Vec<usize> = grid.element_mech_dofs(e).iter().flatten().copied().collect();
        b.add_clique(&dofs);
    }
    b.build()
}

pub(crate) fn local_to_mech(grid: &Grid2D, e: usize) -> [usize; N_LOCAL] {
    let nodes = grid.element_nodes(e);
    let mut out = [0; N_LOCAL];
    for (a, &n) in nodes.iter().enumerate() {
        for c in 0..U_PER_NODE {
            out[U_PER_NODE * a + c] = DofLayout::mech_index_u(n, c);
        }
        for k in 0..V_PER_NODE {
            out[8 + V_PER_NODE * a + k] = DofLayout::mech_index_v(n, k);
        }
    }
    out
}

struct MechElement {
    res: [f64; N_LOCAL],
    jac: Option<Box<LocalMatrix>>,
}

#[allow(clippy::too_many_arguments)]
fn mech_element(
    grid: &Grid2D,
    e: usize,
    prev: Option<(&PlateState, f64)>,
    guess: &PlateState,
    mat: &MaterialSet,
    loads: &Loads,
    want_jac: bool,
) -> MechElement {
    let (hx, hy) = grid.spacing();
    let (ox, oy) = grid.element_origin(e);
    let t = guess.t;
    let cur = gather_mech(grid, e, &guess.u, &guess.v);
    let rate = prev.map(|(p, dt)| {
        let old = gather_mech(grid, e, &p.u, &p.v);
        let mut r = cur;
        r.u.iter_mut().zip(old.u).for_each(|(a, b)| *a = (*a - b) / dt);
        r.v.iter_mut().zip(old.v).for_each(|(a, b)| *a = (*a - b) / dt);
        (r, dt)
    });
    let thermal = mat.has_thermal_stress();
    let mu_loc = gather_nodal(grid, e, &guess.mu);
    let b_stress = {
        let b = mat.b_thermal();
        Vector3::new(b[(0, 0)], b[(1, 1)], 0.5 * (b[(0, 1)] + b[(1, 0)]))
    };
    let c_el = *mat.c_el().voigt();
    let c_r = *mat.c_visc().voigt();

    let mut res = [0.0; N_LOCAL];
    let mut jac: Option<Box<LocalMatrix>> = want_jac.then(|| Box::new([[0.0; N_LOCAL]; N_LOCAL]));
    let mut de = [Vector3::zeros(); N_LOCAL];
    let mut de_dot = [Vector3::zeros(); N_LOCAL];
    let mut dh = [Vector3::zeros(); N_LOCAL];

    for qp in &grid.table().points {
        let w = qp.weight;
        let x = ox + qp.xi * hx;
        let y = oy + qp.eta * hy;
        let k = kinematics(qp, &cur);
        let strain = membrane_strain(&k.grad_u, &k.grad_v);
        let mut stress = c_el * voigt2(&strain);
        let mut moment = c_el * voigt2(&k.hess_v);
        if thermal {
            stress += b_stress * nodal_at(qp, &mu_loc);
        }
        let mut grad_w = Vector2::zeros();
        if let Some((r, _)) = &rate {
            let (e_dot, h_dot) = rate_fields(qp, r, &k);
            grad_w = kinematics(qp, r).grad_v;
            stress += c_r * voigt2(&e_dot);
            moment += c_r * voigt2(&h_dot);
        }
        moment /= 12.0;
        let sigma = from_voigt2_stress(&stress);

        let inv_dt = rate.as_ref().map_or(0.0, |(_, dt)| 1.0 / dt);
        for a in 0..4 {
            let g = qp.q1_grad[a];
            de[2 * a] = Vector3::new(g[0], 0.0, g[1]);
            de[2 * a + 1] = Vector3::new(0.0, g[1], g[0]);
            de_dot[2 * a] = de[2 * a] * inv_dt;
            de_dot[2 * a + 1] = de[2 * a + 1] * inv_dt;
            dh[2 * a] = Vector3::zeros();
            dh[2 * a + 1] = Vector3::zeros();
        }
        for (l, s) in qp.bfs.iter().enumerate() {
            let i = 8 + l;
            de[i] = voigt2(&sym_outer(&k.grad_v, &s.grad));
            de_dot[i] = (de[i] * inv_dt) + voigt2(&sym_outer(&grad_w, &s.grad));
            dh[i] = voigt2(&s.hess);
        }

        for i in 0..N_LOCAL {
            res[i] += w * (stress.dot(&de[i]) + moment.dot(&dh[i]));
        }
        if !loads.f2d.is_zero() {
            let f = loads.f2d.eval(x, y, t);
            for (l, s) in qp.bfs.iter().enumerate() {
                res[8 + l] -= w * f * s.value;
            }
        }
        if let Some(gu) = &loads.gu_test {
            let g = [gu[0].eval(x, y, t), gu[1].eval(x, y, t)];
            for a in 0..4 {
                for c in 0..2 {
                    res[2 * a + c] -= w * g[c] * qp.q1[a];
                }
            }
        }

        if let Some(jm) = jac.as_mut() {
            let bend = (c_el + c_r * inv_dt) / 12.0;
            for j in 0..N_LOCAL {
                let s_j = c_el * de[j] + c_r * de_dot[j];
                let m_j = bend * dh[j];
                for i in 0..N_LOCAL {
                    jm[i][j] += w * (s_j.dot(&de[i]) + m_j.dot(&dh[i]));
                }
            }
            for li in 0..16 {
                let sg = sigma * qp.bfs[li].grad;
                for lj in 0..16 {
                    jm[8 + lj][8 + li] += w * qp.bfs[lj].grad.dot(&sg);
                }
            }
        }
    }
    MechElement { res, jac }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("time step must be > 0, got {dt}")))
    }
}

fn assemble_mech_impl(
    grid: &Grid2D,
    prev: Option<(&PlateState, f64)>,
    guess: &PlateState,
    mat: &MaterialSet,
    loads: &Loads,
    pattern: Option<&CsrMatrix>,
) -> Result<AssembledMech> {
    guess.check_shape(grid)?;
    if let Some((p, dt)) = prev {
        p.check_shape(grid)?;
        check_dt(dt)?;
    }
    let layout = grid.layout();
    let want_jac = pattern.is_some();
    let elements = map_indexed(grid.n_elements(), |e| {
        mech_element(grid, e, prev, guess, mat, loads, want_jac)
    });
    let mut residual = vec![0.0; layout.n_free_mech()];
    let mut full = vec![0.0; MECH_PER_NODE * grid.n_nodes()];
    let mut jacobian = pattern.cloned().unwrap_or_else(|| SparsityBuilder::new(0, 0).build());
    jacobian.zero_values();
    for (e, el) in elements.iter().enumerate() {
        let free = grid.element_mech_dofs(e);
        let mech = local_to_mech(grid, e);
        for i in 0..N_LOCAL {
            full[mech[i]] += el.res[i];
            if let Some(fi) = free[i] {
                residual[fi] += el.res[i];
            }
        }
        if let Some(jm) = &el.jac {
            for i in 0..N_LOCAL {
                let Some(fi) = free[i] else { continue };
                for j in 0..N_LOCAL {
                    if let Some(fj) = free[j] {
                        jacobian.add(fi, fj, jm[i][j]);
                    }
                }
            }
        }
    }
    Ok(AssembledMech {
        residual,
        jacobian,
        full_residual: full,
    })
}

/// Residual and consistent tangent of the time-discrete mechanical system.
/// Rates are backward differences between `prev` and `guess`; the
/// temperature in the thermal stress is `guess.mu`, and loads are evaluated
/// at `guess.t`.
pub fn assemble_mech(
    grid: &Grid2D,
    prev: &PlateState,
    guess: &PlateState,
    dt: f64,
    mat: &MaterialSet,
    loads: &Loads,
) -> Result<AssembledMech> {
    let pattern = mech_pattern(grid);
    assemble_mech_impl(grid, Some((prev, dt)), guess, mat, loads, Some(&pattern))
}

/// Like [`assemble_mech`] with a precomputed pattern.
pub(crate) fn assemble_mech_with(
    grid: &Grid2D,
    prev: &PlateState,
    guess: &PlateState,
    dt: f64,
    mat: &MaterialSet,
    loads: &Loads,
    pattern: &CsrMatrix,
) -> Result<AssembledMech> {
    assemble_mech_impl(grid, Some((prev, dt)), guess, mat, loads, Some(pattern))
}

/// Residual of [`assemble_mech`] without forming the tangent.
pub fn mech_residual(
    grid: &Grid2D,
    prev: &PlateState,
    guess: &PlateState,
    dt: f64,
    mat: &MaterialSet,
    loads: &Loads,
) -> Result<Vec<f64>> {
    Ok(assemble_mech_impl(grid, Some((prev, dt)), guess, mat, loads, None)?.residual)
}

/// Residual of the mechanical system without the viscous terms.
pub fn mech_residual_elastic(grid: &Grid2D, state: &PlateState, mat: &MaterialSet, loads: &Loads) -> Result<Vec<f64>> {
    Ok(assemble_mech_impl(grid, None, state, mat, loads, None)?.residual)
}

/// Tangent of the elastic-only residual (used for stationary solves).
pub fn assemble_mech_elastic(
    grid: &Grid2D,
    state: &PlateState,
    mat: &MaterialSet,
    loads: &Loads,
) -> Result<AssembledMech> {
    let pattern = mech_pattern(grid);
    assemble_mech_impl(grid, None, state, mat, loads, Some(&pattern))
}

/// Dissipation density `C Ė : Ė + (1/12) C Ḣ : Ḣ` at a point.
pub(crate) fn dissipation_density(
    c: &crate::constitutive::SymTensor2D,
    e_dot: &Matrix2<f64>,
    h_dot: &Matrix2<f64>,
) -> f64 {
    c.quad_form(e_dot) + c.quad_form(h_dot) / 12.0
}

/// The implicit heat system `A μⁿ⁺¹ = rhs`.
#[derive(Debug, Clone)]
pub struct HeatSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Dissipative heating load `∫ D φ_i` per unit time.
    pub source: Vec<f64>,
}

pub fn heat_pattern(grid: &Grid2D) -> CsrMatrix {
    let n = grid.n_nodes();
    let mut b = SparsityBuilder::new(n, n);
    for e in 0..grid.n_elements() {
        b.add_clique(&grid.element_nodes(e));
    }
    b.build()
}

/// Dissipative heating load `∫ (C_α Ė:Ė + (1/12) C_α Ḣ:Ḣ) φ_i` for the given rates.
pub fn heat_source(grid: &Grid2D, rates: &MechRates, mat: &MaterialSet) -> Vec<f64> {
    let mut s = vec![0.0; grid.n_nodes()];
    if !mat.has_dissipative_heating() {
        return s;
    }
    let locals = map_indexed(grid.n_elements(), |e| {
        let r = gather_mech(grid, e, &rates.du, &rates.dv);
        let at = gather_mech(grid, e, &vec![0.0; rates.du.len()], &rates.v);
        let mut out = [0.0; 4];
        for qp in &grid.table().points {
            let k = kinematics(qp, &at);
            let (e_dot, h_dot) = rate_fields(qp, &r, &k);
            let d = dissipation_density(mat.c_visc_alpha(), &e_dot, &h_dot);
            for a in 0..4 {
                out[a] += qp.weight * d * qp.q1[a];
            }
        }
        out
    });
    for (e, loc) in locals.iter().enumerate() {
        for (a, n) in grid.element_nodes(e).into_iter().enumerate() {
            s[n] += loc[a];
        }
    }
    s
}

/// Heat system for one implicit Euler step from `prev` to `t_next`:
/// `(c̄/dt M + K_K̃ + κ M_Γ) μⁿ⁺¹ = c̄/dt M μⁿ + κ b_Γ(μ♭) + s (+ test source)`.
pub fn assemble_heat(
    grid: &Grid2D,
    prev: &PlateState,
    rates: &MechRates,
    dt: f64,
    t_next: f64,
    mat: &MaterialSet,
    loads: &Loads,
) -> Result<HeatSystem> {
    check_dt(dt)?;
    prev.check_shape(grid)?;
    let cv = mat.cv_bar();
    let k = *mat.k_tilde();
    let (hx, hy) = grid.spacing();
    let mut matrix = heat_pattern(grid);
    let mut rhs = vec![0.0; grid.n_nodes()];
    let locals = map_indexed(grid.n_elements(), |e| {
        let (ox, oy) = grid.element_origin(e);
        let mut m = [[0.0; 4]; 4];
        let mut kk = [[0.0; 4]; 4];
        let mut g = [0.0; 4];
        for qp in &grid.table().points {
            for a in 0..4 {
                for b in 0..4 {
                    m[a][b] += qp.weight * qp.q1[a] * qp.q1[b];
                    kk[a][b] += qp.weight * qp.q1_grad[a].dot(&(k * qp.q1_grad[b]));
                }
            }
            if let Some(src) = &loads.gmu_test {
                let val = src.eval(ox + qp.xi * hx, oy + qp.eta * hy, t_next);
                for a in 0..4 {
                    g[a] += qp.weight * val * qp.q1[a];
                }
            }
        }
        (m, kk, g)
    });
    for (e, (m, kk, g)) in locals.iter().enumerate() {
        let nodes = grid.element_nodes(e);
        for a in 0..4 {
            let mut mass_mu = 0.0;
            for b in 0..4 {
                matrix.add(nodes[a], nodes[b], cv / dt * m[a][b] + kk[a][b]);
                mass_mu += m[a][b] * prev.mu[nodes[b]];
            }
            rhs[nodes[a]] += cv / dt * mass_mu + g[a];
        }
    }
    let kappa = mat.kappa();
    if kappa > 0.0 {
        let rule = crate::basis::gauss_legendre(4);
        for (na, nb, _) in grid.boundary_segments() {
            let (xa, ya) = grid.node_coords(na);
            let (xb, yb) = grid.node_coords(nb);
            let len = ((xb - xa).powi(2) + (yb - ya).powi(2)).sqrt();
            let nodes = [na, nb];
            let mut m = [[0.0; 2]; 2];
            let mut b = [0.0; 2];
            for &(gp, gw) in rule {
                let s = 0.5 * (1.0 + gp);
                let w = 0.5 * gw * len;
                let phi = [1.0 - s, s];
                let flat = loads.mu_flat.eval(xa + s * (xb - xa), ya + s * (yb - ya), t_next);
                for i in 0..2 {
                    for j in 0..2 {
                        m[i][j] += w * phi[i] * phi[j];
                    }
                    b[i] += w * phi[i] * flat;
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    matrix.add(nodes[i], nodes[j], kappa * m[i][j]);
                }
                rhs[nodes[i]] += kappa * b[i];
            }
        }
    }
    let source = heat_source(grid, rates, mat);
    if mat.has_dissipative_heating() {
        rhs.iter_mut().zip(&source).for_each(|(r, s)| *r += s);
    }
    Ok(HeatSystem { matrix, rhs, source })
}

/// Lumped-consistent integral `∫ μ` of a nodal temperature field.
pub fn integrate_nodal(grid: &Grid2D, mu: &[f64]) -> f64 {
    let mut total = 0.0;
    for e in 0..grid.n_elements() {
        let loc = gather_nodal(grid, e, mu);
        for qp in &grid.table().points {
            total += qp.weight * nodal_at(qp, &loc);
        }
    }
    total
}
