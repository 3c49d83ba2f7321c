#ifndef VKPLATE_H
#define VKPLATE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every entry point.
 */
typedef enum VkStatus {
  VK_STATUS_OK = 0,
  /**
   * Bad input: malformed config, non-symmetric or indefinite tensors, wrong buffer length.
   */
  VK_STATUS_INVALID = 1,
  /**
   * Newton, eigen or linear solver failure.
   */
  VK_STATUS_SOLVER = 2,
  VK_STATUS_NULL_POINTER = 3,
  VK_STATUS_IO = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  VK_STATUS_INTERNAL = 5,
} VkStatus;

/**
 * Reduced plate material.
 */
typedef struct VkMaterial VkMaterial;

/**
 * A running simulation: grid, material, loads, parameters and current state.
 */
typedef struct VkSim VkSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *vk_last_error(void);

/**
 * Reduces a 3D elasticity tensor `c3[36]` to the plate tensor `out_c2[9]`
 * and the relaxation map `out_map[9]` (rows `a13, a23, a33`).
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out_map` may be null.
 */
enum VkStatus vk_reduce_form(const double *c3, double *out_c2, double *out_map);

/**
 * Reduced form of a 3D tensor evaluated at the 2×2 identity.
 *
 * # Safety
 * `c3` must point to 36 doubles and `out` to one.
 */
enum VkStatus vk_reduce_q2_identity(const double *c3, double *out);

/**
 * Reduced conductivity `out_k2[4]` of a 3×3 conductivity `k3[9]`.
 *
 * # Safety
 * `k3` must point to 9 doubles and `out_k2` to 4.
 */
enum VkStatus vk_reduce_heat_conductivity(const double *k3, double *out_k2);

/**
 * Writes 1 to `out_pass` when `c3[36]` does not couple in-plane and
 * out-of-plane strains and `b3[9]` has a vanishing third row and column,
 * each up to `tol`; 0 otherwise.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum VkStatus vk_check_compatibility(const double *c3,
                                     const double *b3,
                                     double tol,
                                     int32_t *out_pass);

/**
 * Korn constant of the slab `(0,1)² × (−h/2, h/2)` clamped on the left edge,
 * with `n × n × nz` trilinear elements. `perturbed` selects the perturbed
 * deformation instead of the identity.
 *
 * # Safety
 * `out_constant` must point to one double.
 */
enum VkStatus vk_korn_constant(double h,
                               size_t n,
                               size_t nz,
                               int32_t perturbed,
                               double *out_constant);

/**
 * Builds a reduced material from 3D data: elastic and viscous tensors
 * `c_el[36]`, `c_visc[36]`, expansion `b3[9]`, conductivity `k3[9]`.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` receives a handle
 * to release with [`vk_material_free`].
 */
enum VkStatus vk_material_new(const double *c_el,
                              const double *c_visc,
                              const double *b3,
                              double cv_bar,
                              const double *k3,
                              double kappa,
                              double alpha,
                              struct VkMaterial **out);

/**
 * Copies the reduced elastic (`which = 0`), viscous (`1`) or dissipative
 * heating (`2`) tensor into `out[9]`.
 *
 * # Safety
 * `mat` must be a live handle and `out` must point to 9 doubles.
 */
enum VkStatus vk_material_tensor(const struct VkMaterial *mat, int32_t which, double *out);

/**
 * Copies the reduced conductivity into `out[4]`.
 *
 * # Safety
 * `mat` must be a live handle and `out` must point to 4 doubles.
 */
enum VkStatus vk_material_conductivity(const struct VkMaterial *mat, double *out);

/**
 * Releases a material handle. Null is ignored.
 *
 * # Safety
 * `mat` must come from [`vk_material_new`] and not be used afterwards.
 */
void vk_material_free(struct VkMaterial *mat);

/**
 * Creates a simulation from TOML configuration text, positioned at the
 * interpolated initial state. Material compatibility is not enforced here;
 * use [`vk_check_compatibility`] first if needed.
 *
 * # Safety
 * `config` must be a nul-terminated UTF-8 string; `out` receives a handle to
 * release with [`vk_sim_free`].
 */
enum VkStatus vk_sim_from_config(const char *config, struct VkSim **out);

/**
 * Advances the simulation by one step of the configured size. On failure
 * the state is left unchanged.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum VkStatus vk_sim_step(struct VkSim *sim);

/**
 * Current time, or NaN for a null handle.
 *
 * # Safety
 * `sim` must be a live handle or null.
 */
double vk_sim_time(const struct VkSim *sim);

/**
 * Number of grid nodes, or 0 for a null handle.
 *
 * # Safety
 * `sim` must be a live handle or null.
 */
size_t vk_sim_n_nodes(const struct VkSim *sim);

/**
 * Elastic energy of the current state.
 *
 * # Safety
 * `sim` must be a live handle and `out` must point to one double.
 */
enum VkStatus vk_sim_elastic_energy(const struct VkSim *sim, double *out);

/**
 * Copies the in-plane displacement, `2 × n_nodes` values `(u1, u2)` per node.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` doubles.
 */
enum VkStatus vk_sim_copy_u(const struct VkSim *sim, double *buf, size_t len);

/**
 * Copies the deflection, `4 × n_nodes` values `(v, ∂1v, ∂2v, ∂12v)` per node.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` doubles.
 */
enum VkStatus vk_sim_copy_v(const struct VkSim *sim, double *buf, size_t len);

/**
 * Copies the temperature, one value per node.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` doubles.
 */
enum VkStatus vk_sim_copy_mu(const struct VkSim *sim, double *buf, size_t len);

/**
 * Releases a simulation handle. Null is ignored.
 *
 * # Safety
 * `sim` must come from [`vk_sim_from_config`] and not be used afterwards.
 */
void vk_sim_free(struct VkSim *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VKPLATE_H */
