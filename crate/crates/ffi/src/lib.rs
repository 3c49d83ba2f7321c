//! C ABI over the `vkplate` solver.
//!
//! Every entry point returns a [`VkStatus`]; on failure a message is kept in
//! thread-local storage and can be read with [`vk_last_error`]. Handles are
//! opaque and must be released with the matching `*_free` function. Matrices
//! cross the boundary as row-major `double` arrays in Voigt order
//! `(11, 22, 33, 23, 13, 12)` (3D, 6×6) or `(11, 22, 12)` (2D, 3×3) with
//! engineering shear.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::{Matrix2, Matrix3, Matrix6};
use vkplate::config::parse_config;
use vkplate::constitutive::{check_compatibility, reduce_form, reduce_heat_conductivity, SymTensor3D};
use vkplate::diagnostics::elastic_energy;
use vkplate::korn::{korn_constant, SlabMesh3D, ZField};
use vkplate::stepper::{SimParams, Stepper};
use vkplate::{Edge, Error, Grid2D, Loads, Material3D, MaterialSet, PlateState};

/// Result codes of every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VkStatus {
    Ok = 0,
    /// Bad input: malformed config, non-symmetric or indefinite tensors, wrong buffer length.
    Invalid = 1,
    /// Newton, eigen or linear solver failure.
    Solver = 2,
    NullPointer = 3,
    Io = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

/// Reduced plate material.
pub struct VkMaterial {
    inner: MaterialSet,
}

/// A running simulation: grid, material, loads, parameters and current state.
pub struct VkSim {
    grid: Grid2D,
    material: MaterialSet,
    loads: Loads,
    params: SimParams,
    state: PlateState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(VkStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => VkStatus::Io,
            e if e.is_validation() => VkStatus::Invalid,
            _ => VkStatus::Solver,
        };
        Failure(code, e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(VkStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            VkStatus::Ok
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            VkStatus::Internal
        }
    }
}

unsafe fn read<'a>(p: *const f64, n: usize, name: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn write<'a>(p: *mut f64, n: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn tensor3d(p: *const f64, name: &str) -> Result<SymTensor3D, Failure> {
    Ok(SymTensor3D::from_voigt(Matrix6::from_row_slice(read(p, 36, name)?))?)
}

unsafe fn matrix3(p: *const f64, name: &str) -> Result<Matrix3<f64>, Failure> {
    Ok(Matrix3::from_row_slice(read(p, 9, name)?))
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn vk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Reduces a 3D elasticity tensor `c3[36]` to the plate tensor `out_c2[9]`
/// and the relaxation map `out_map[9]` (rows `a13, a23, a33`).
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out_map` may be null.
#[no_mangle]
pub unsafe extern "C" fn vk_reduce_form(c3: *const f64, out_c2: *mut f64, out_map: *mut f64) -> VkStatus {
    guard(|| {
        let (c2, map) = reduce_form(&tensor3d(c3, "c3")?)?;
        let out = write(out_c2, 9, "out_c2")?;
        for (k, o) in out.iter_mut().enumerate() {
            *o = c2.voigt()[(k / 3, k % 3)];
        }
        if !out_map.is_null() {
            let m = write(out_map, 9, "out_map")?;
            for (k, o) in m.iter_mut().enumerate() {
                *o = map.coeff[(k / 3, k % 3)];
            }
        }
        Ok(())
    })
}

/// Reduced form of a 3D tensor evaluated at the 2×2 identity.
///
/// # Safety
/// `c3` must point to 36 doubles and `out` to one.
#[no_mangle]
pub unsafe extern "C" fn vk_reduce_q2_identity(c3: *const f64, out: *mut f64) -> VkStatus {
    guard(|| {
        let (c2, _) = reduce_form(&tensor3d(c3, "c3")?)?;
        *out_ptr(out, "out")? = c2.quad_form(&Matrix2::identity());
        Ok(())
    })
}

/// Reduced conductivity `out_k2[4]` of a 3×3 conductivity `k3[9]`.
///
/// # Safety
/// `k3` must point to 9 doubles and `out_k2` to 4.
#[no_mangle]
pub unsafe extern "C" fn vk_reduce_heat_conductivity(k3: *const f64, out_k2: *mut f64) -> VkStatus {
    guard(|| {
        let k2 = reduce_heat_conductivity(&matrix3(k3, "k3")?)?;
        write(out_k2, 4, "out_k2")?.copy_from_slice(&[k2[(0, 0)], k2[(0, 1)], k2[(1, 0)], k2[(1, 1)]]);
        Ok(())
    })
}

/// Writes 1 to `out_pass` when `c3[36]` does not couple in-plane and
/// out-of-plane strains and `b3[9]` has a vanishing third row and column,
/// each up to `tol`; 0 otherwise.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn vk_check_compatibility(
    c3: *const f64,
    b3: *const f64,
    tol: f64,
    out_pass: *mut i32,
) -> VkStatus {
    guard(|| {
        let r = check_compatibility(&tensor3d(c3, "c3")?, &matrix3(b3, "b3")?, tol);
        *out_ptr(out_pass, "out_pass")? = i32::from(r.pass());
        Ok(())
    })
}

/// Korn constant of the slab `(0,1)² × (−h/2, h/2)` clamped on the left edge,
/// with `n × n × nz` trilinear elements. `perturbed` selects the perturbed
/// deformation instead of the identity.
///
/// # Safety
/// `out_constant` must point to one double.
#[no_mangle]
pub unsafe extern "C" fn vk_korn_constant(
    h: f64,
    n: usize,
    nz: usize,
    perturbed: i32,
    out_constant: *mut f64,
) -> VkStatus {
    guard(|| {
        let out = out_ptr(out_constant, "out_constant")?;
        let slab = SlabMesh3D::new(h, n, nz, &[Edge::Left])?;
        let z = if perturbed != 0 {
            ZField::Perturbed
        } else {
            ZField::Identity
        };
        *out = korn_constant(&slab, z)?.constant;
        Ok(())
    })
}

/// Builds a reduced material from 3D data: elastic and viscous tensors
/// `c_el[36]`, `c_visc[36]`, expansion `b3[9]`, conductivity `k3[9]`.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` receives a handle
/// to release with [`vk_material_free`].
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn vk_material_new(
    c_el: *const f64,
    c_visc: *const f64,
    b3: *const f64,
    cv_bar: f64,
    k3: *const f64,
    kappa: f64,
    alpha: f64,
    out: *mut *mut VkMaterial,
) -> VkStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = Material3D {
            c_el: tensor3d(c_el, "c_el")?,
            c_visc: tensor3d(c_visc, "c_visc")?,
            b_full: matrix3(b3, "b3")?,
            cv_bar,
            k3: matrix3(k3, "k3")?,
            kappa,
            alpha,
        };
        *out = Box::into_raw(Box::new(VkMaterial {
            inner: MaterialSet::from_3d(&m)?,
        }));
        Ok(())
    })
}

/// Copies the reduced elastic (`which = 0`), viscous (`1`) or dissipative
/// heating (`2`) tensor into `out[9]`.
///
/// # Safety
/// `mat` must be a live handle and `out` must point to 9 doubles.
#[no_mangle]
pub unsafe extern "C" fn vk_material_tensor(mat: *const VkMaterial, which: i32, out: *mut f64) -> VkStatus {
    guard(|| {
        let m = &mat.as_ref().ok_or_else(|| null("mat"))?.inner;
        let t = match which {
            0 => m.c_el(),
            1 => m.c_visc(),
            2 => m.c_visc_alpha(),
            w => return Err(Failure(VkStatus::Invalid, format!("unknown tensor selector {w}"))),
        };
        let o = write(out, 9, "out")?;
        for (k, v) in o.iter_mut().enumerate() {
            *v = t.voigt()[(k / 3, k % 3)];
        }
        Ok(())
    })
}

/// Copies the reduced conductivity into `out[4]`.
///
/// # Safety
/// `mat` must be a live handle and `out` must point to 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn vk_material_conductivity(mat: *const VkMaterial, out: *mut f64) -> VkStatus {
    guard(|| {
        let k = mat.as_ref().ok_or_else(|| null("mat"))?.inner.k_tilde();
        write(out, 4, "out")?.copy_from_slice(&[k[(0, 0)], k[(0, 1)], k[(1, 0)], k[(1, 1)]]);
        Ok(())
    })
}

/// Releases a material handle. Null is ignored.
///
/// # Safety
/// `mat` must come from [`vk_material_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vk_material_free(mat: *mut VkMaterial) {
    if !mat.is_null() {
        drop(Box::from_raw(mat));
    }
}

/// Creates a simulation from TOML configuration text, positioned at the
/// interpolated initial state. Material compatibility is not enforced here;
/// use [`vk_check_compatibility`] first if needed.
///
/// # Safety
/// `config` must be a nul-terminated UTF-8 string; `out` receives a handle to
/// release with [`vk_sim_free`].
#[no_mangle]
pub unsafe extern "C" fn vk_sim_from_config(config: *const c_char, out: *mut *mut VkSim) -> VkStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if config.is_null() {
            return Err(null("config"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|e| Failure(VkStatus::Invalid, format!("config is not UTF-8: {e}")))?;
        let cfg = parse_config(text)?;
        let state = cfg.ic.interpolate(&cfg.grid)?;
        cfg.sim.validate()?;
        *out = Box::into_raw(Box::new(VkSim {
            grid: cfg.grid,
            material: cfg.material,
            loads: cfg.loads,
            params: cfg.sim,
            state,
        }));
        Ok(())
    })
}

/// Advances the simulation by one step of the configured size. On failure
/// the state is left unchanged.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn vk_sim_step(sim: *mut VkSim) -> VkStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        let next = Stepper::new(&s.grid, &s.material, &s.loads, s.params)?.step(&s.state)?;
        s.state = next;
        Ok(())
    })
}

/// Current time, or NaN for a null handle.
///
/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn vk_sim_time(sim: *const VkSim) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.state.t)
}

/// Number of grid nodes, or 0 for a null handle.
///
/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn vk_sim_n_nodes(sim: *const VkSim) -> usize {
    sim.as_ref().map_or(0, |s| s.grid.n_nodes())
}

/// Elastic energy of the current state.
///
/// # Safety
/// `sim` must be a live handle and `out` must point to one double.
#[no_mangle]
pub unsafe extern "C" fn vk_sim_elastic_energy(sim: *const VkSim, out: *mut f64) -> VkStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        *out_ptr(out, "out")? = elastic_energy(&s.grid, &s.state, &s.material);
        Ok(())
    })
}

unsafe fn copy_field(sim: *const VkSim, buf: *mut f64, len: usize, pick: fn(&PlateState) -> &[f64]) -> VkStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let src = pick(&s.state);
        if len != src.len() {
            return Err(Failure(
                VkStatus::Invalid,
                format!("buffer holds {len} values, field has {}", src.len()),
            ));
        }
        write(buf, len, "buf")?.copy_from_slice(src);
        Ok(())
    })
}

/// Copies the in-plane displacement, `2 × n_nodes` values `(u1, u2)` per node.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vk_sim_copy_u(sim: *const VkSim, buf: *mut f64, len: usize) -> VkStatus {
    copy_field(sim, buf, len, |s| &s.u)
}

/// Copies the deflection, `4 × n_nodes` values `(v, ∂1v, ∂2v, ∂12v)` per node.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vk_sim_copy_v(sim: *const VkSim, buf: *mut f64, len: usize) -> VkStatus {
    copy_field(sim, buf, len, |s| &s.v)
}

/// Copies the temperature, one value per node.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vk_sim_copy_mu(sim: *const VkSim, buf: *mut f64, len: usize) -> VkStatus {
    copy_field(sim, buf, len, |s| &s.mu)
}

/// Releases a simulation handle. Null is ignored.
///
/// # Safety
/// `sim` must come from [`vk_sim_from_config`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vk_sim_free(sim: *mut VkSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}
