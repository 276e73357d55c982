#ifndef WKGEOM_H
#define WKGEOM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WkStatus {
  WK_STATUS_OK = 0,
  WK_STATUS_NULL_POINTER = 1,
  WK_STATUS_INVALID_ARGUMENT = 2,
  // Weights or potentials outside the admissible set.
  WK_STATUS_INFEASIBLE = 3,
  // A numerical check or iteration failed.
  WK_STATUS_NUMERICAL_FAILURE = 4,
  WK_STATUS_PANIC = 5,
} WkStatus;

typedef enum WkWeightFamily {
  // params: `[value]`
  WK_WEIGHT_FAMILY_CONSTANT = 0,
  // params: `[constant, slope_1, .., slope_d]`
  WK_WEIGHT_FAMILY_AFFINE = 1,
  // params: `[xi_1, .., xi_d]`
  WK_WEIGHT_FAMILY_EXPONENTIAL = 2,
  // params: `[xi_1, .., xi_d, c, alpha]`
  WK_WEIGHT_FAMILY_POWER = 3,
  // params: monomial coefficients `[c_0, c_1, ..]`, intervals only
  WK_WEIGHT_FAMILY_POLYNOMIAL = 4,
} WkWeightFamily;

typedef struct WkExtremal WkExtremal;

typedef struct WkPolytope WkPolytope;

typedef struct WkPotential WkPotential;

typedef struct WkWeight WkWeight;

// Energies of one potential. `mabuchi_rel` is NaN when not computed.
typedef struct WkEnergyReport {
  double h_v;
  double e_v_ric;
  double e_w;
  double c_vw;
  double mabuchi;
  double mabuchi_rel;
  double vol_v;
  double vol;
} WkEnergyReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or an empty string.
// The pointer stays valid until the next failing call on this thread.
const char *wk_last_error(void);

// Library version as a static NUL-terminated string.
const char *wk_version(void);

// Creates the interval `[lo, hi]`.
//
// # Safety
// `out_p` must be valid for writes.
enum WkStatus wk_polytope_interval(double lo, double hi, struct WkPolytope **out_p);

// Creates the polytope `{x : <n_i, x> + offset_i >= 0}` from `count` facets.
// `normals` holds `count * dim` integers, facet by facet.
//
// # Safety
// `normals` must point to `count * dim` values, `offsets` to `count`
// values, and `out_p` must be valid for writes.
enum WkStatus wk_polytope_from_facets(const int64_t *normals,
                                      const double *offsets,
                                      size_t count,
                                      size_t dim,
                                      struct WkPolytope **out_p);

// # Safety
// `p` and `out_v` must be valid.
enum WkStatus wk_polytope_volume(const struct WkPolytope *p, double *out_v);

// # Safety
// `p` and `out_d` must be valid.
enum WkStatus wk_polytope_dim(const struct WkPolytope *p, size_t *out_d);

// # Safety
// `p` must come from this library and not be used afterwards. Null is ignored.
void wk_polytope_free(struct WkPolytope *p);

// Creates a weight of `family` times `scale` on `p`, which must be positive
// on `p`. See [`WkWeightFamily`] for the parameter layout.
//
// # Safety
// `p` must be valid, `params` must point to `nparams` values and `out_w`
// must be valid for writes.
enum WkStatus wk_weight_new(const struct WkPolytope *p,
                            enum WkWeightFamily family,
                            const double *params,
                            size_t nparams,
                            double scale,
                            struct WkWeight **out_w);

// Value of `w` at the point `x` of length `dim`.
//
// # Safety
// `w` must be valid, `x` must point to `dim` values, `out_v` valid for writes.
enum WkStatus wk_weight_value(const struct WkWeight *w, const double *x, size_t dim, double *out_v);

// # Safety
// `w` must come from this library and not be used afterwards. Null is ignored.
void wk_weight_free(struct WkWeight *w);

// Symplectic potential `u_G + f` on the interval `p`, where `f` has the
// Chebyshev coefficients `coeffs` on that interval.
//
// # Safety
// `p` must be valid, `coeffs` must point to `n` values and `out_u` must be
// valid for writes.
enum WkStatus wk_potential_new(const struct WkPolytope *p,
                               const double *coeffs,
                               size_t n,
                               struct WkPotential **out_u);

// # Safety
// `u` must come from this library and not be used afterwards. Null is ignored.
void wk_potential_free(struct WkPotential *u);

// The constant `c_{v,w}`.
//
// # Safety
// All handles must be valid and `out_c` valid for writes.
enum WkStatus wk_c_constant(const struct WkPolytope *p,
                            const struct WkWeight *v,
                            const struct WkWeight *w,
                            double *out_c);

// The extremal affine function `constant + <slope, x>`; `slope` receives
// `dim(p)` values.
//
// # Safety
// All handles must be valid, `constant` valid for writes and `slope` valid
// for `dim(p)` writes.
enum WkStatus wk_extremal_affine(const struct WkPolytope *p,
                                 const struct WkWeight *v,
                                 const struct WkWeight *w,
                                 double *constant,
                                 double *slope);

// Weighted Mabuchi energy of `u` and its pieces, with default quadrature.
// The relative energy is included when `relative` is nonzero.
//
// # Safety
// All handles must be valid and `report` valid for writes.
enum WkStatus wk_mabuchi_energy(const struct WkPolytope *p,
                                const struct WkPotential *u,
                                const struct WkWeight *v,
                                const struct WkWeight *w,
                                int32_t relative,
                                struct WkEnergyReport *report);

// Geodesic distance between two potentials on the same interval.
//
// # Safety
// Both handles must be valid and `out_d` valid for writes.
enum WkStatus wk_mabuchi_distance(const struct WkPotential *u0,
                                  const struct WkPotential *u1,
                                  double *out_d);

// Solves for the weighted extremal profile on the interval `p`.
//
// # Safety
// All handles must be valid and `out_e` valid for writes.
enum WkStatus wk_extremal_solve(const struct WkPolytope *p,
                                const struct WkWeight *v,
                                const struct WkWeight *w,
                                struct WkExtremal **out_e);

// The solved profile `H` at `mu`.
//
// # Safety
// `e` must be valid and `out_h` valid for writes.
enum WkStatus wk_extremal_profile(const struct WkExtremal *e, double mu, double *out_h);

// `ℓ = a + b μ` and the sup residual of the extremal equation.
//
// # Safety
// `e` must be valid; the three outputs must be valid for writes.
enum WkStatus wk_extremal_summary(const struct WkExtremal *e,
                                  double *ell_a,
                                  double *ell_b,
                                  double *residual);

// # Safety
// `e` must come from this library and not be used afterwards. Null is ignored.
void wk_extremal_free(struct WkExtremal *e);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WKGEOM_H */
