#ifndef REVQE_H
#define REVQE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status code returned by every fallible entry point.
 */
typedef enum RevqeStatus {
  REVQE_STATUS_OK = 0,
  /*
   A required pointer argument was NULL.
   */
  REVQE_STATUS_NULL_POINTER = 1,
  /*
   An argument or input table was rejected.
   */
  REVQE_STATUS_INVALID_ARGUMENT = 2,
  /*
   A solver did not meet its tolerance.
   */
  REVQE_STATUS_NUMERICAL_FAILURE = 3,
  /*
   An index or buffer length was out of range.
   */
  REVQE_STATUS_OUT_OF_BOUNDS = 4,
  /*
   Rust panicked; the library state is unchanged.
   */
  REVQE_STATUS_INTERNAL = 5,
} RevqeStatus;

/*
 Meridian profile of a surface of revolution.
 */
typedef struct RevqeProfile RevqeProfile;

/*
 Lowest eigenpairs of one Fourier mode.
 */
typedef struct RevqeSpectrum RevqeSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or NULL after a success.

 The string stays valid until the next call into the library from the
 same thread.
 */
const char *revqe_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *revqe_version(void);

/*
 Unit round sphere sampled with `grid_size` intervals.

 # Safety
 `out` must be a valid pointer to writable storage for a handle.
 */
enum RevqeStatus revqe_profile_sphere(size_t grid_size, struct RevqeProfile **out);

/*
 Ellipsoid of revolution with polar semi-axis 1 and equatorial radius
 `axis_ratio`.

 # Safety
 `out` must be a valid pointer to writable storage for a handle.
 */
enum RevqeStatus revqe_profile_ellipsoid(double axis_ratio,
                                         size_t grid_size,
                                         struct RevqeProfile **out);

/*
 Profile from a tabulated meridian `(t, R(t), z(t))` with `len` rows.

 # Safety
 `t`, `r` and `z` must each point to `len` readable doubles; `out` must be
 a valid pointer to writable storage for a handle.
 */
enum RevqeStatus revqe_profile_table(const double *t,
                                     const double *r,
                                     const double *z,
                                     size_t len,
                                     size_t grid_size,
                                     struct RevqeProfile **out);

/*
 Releases a profile. NULL is ignored.

 # Safety
 `profile` must be NULL or a handle from a `revqe_profile_*` constructor
 that has not been freed.
 */
void revqe_profile_free(struct RevqeProfile *profile);

/*
 Meridian length `L`.

 # Safety
 `profile` must be a live handle and `out` a writable double.
 */
enum RevqeStatus revqe_profile_length(const struct RevqeProfile *profile, double *out);

/*
 Profile radius `R(θ)` for `θ ∈ [0, L]`.

 # Safety
 `profile` must be a live handle and `out` a writable double.
 */
enum RevqeStatus revqe_profile_radius(const struct RevqeProfile *profile,
                                      double theta,
                                      double *out);

/*
 Length `2πR(θ)` of the rotation orbit through `θ`.

 # Safety
 `profile` must be a live handle and `out` a writable double.
 */
enum RevqeStatus revqe_profile_orbit_volume(const struct RevqeProfile *profile,
                                            double theta,
                                            double *out);

/*
 Solves for the `count` lowest eigenpairs of mode `m` on `intervals`
 finite-volume cells.

 # Safety
 `profile` must be a live handle and `out` a valid pointer to writable
 storage for a handle.
 */
enum RevqeStatus revqe_spectrum_solve(const struct RevqeProfile *profile,
                                      int64_t m,
                                      size_t intervals,
                                      size_t count,
                                      struct RevqeSpectrum **out);

/*
 Releases a spectrum. NULL is ignored.

 # Safety
 `spectrum` must be NULL or a handle from [`revqe_spectrum_solve`] that has
 not been freed.
 */
void revqe_spectrum_free(struct RevqeSpectrum *spectrum);

/*
 Number of eigenpairs held, or 0 for NULL.

 # Safety
 `spectrum` must be NULL or a live handle.
 */
size_t revqe_spectrum_len(const struct RevqeSpectrum *spectrum);

/*
 Eigenvalue of the `k`-th pair (0-based, ascending).

 # Safety
 `spectrum` must be a live handle and `out` a writable double.
 */
enum RevqeStatus revqe_spectrum_eigenvalue(const struct RevqeSpectrum *spectrum,
                                           size_t k,
                                           double *out);

/*
 Copies the `k`-th eigenfunction's nodal values into `values` and their
 θ-coordinates into `theta` (either may be NULL). `*len` is set to the
 node count; the call fails with `OutOfBounds` if `capacity` is smaller,
 so passing `capacity = 0` queries the size.

 # Safety
 Non-null `values`/`theta` must hold `capacity` writable doubles; `len`
 must be writable.
 */
enum RevqeStatus revqe_spectrum_eigenfunction(const struct RevqeSpectrum *spectrum,
                                              size_t k,
                                              double *theta,
                                              double *values,
                                              size_t capacity,
                                              size_t *len);

/*
 Associated Legendre function `P_l^m(x)` with the Condon–Shortley phase.

 # Safety
 `out` must be a writable double.
 */
enum RevqeStatus revqe_legendre_assoc(int64_t l, int64_t m, double x, double *out);

/*
 θ-part of the normalized spherical harmonic `Y_l^m`, so that
 `2π ∫ |f|² sin θ dθ = 1`.

 # Safety
 `out` must be a writable double.
 */
enum RevqeStatus revqe_ylm_radial(int64_t l, int64_t m, double theta, double *out);

/*
 Partitions the nondecreasing positive sequence `a[0..len]` into blocks
 with exponent `beta`.

 `p` receives `len` entries, `p[j-1] = P(j)` (1-based block starts). The
 block starts themselves go to `jk` when it is non-NULL and `jk_capacity`
 suffices; `*jk_len` always receives their count.

 # Safety
 `a` must hold `len` readable doubles, `p` `len` writable slots, non-null
 `jk` `jk_capacity` writable slots, and `jk_len` must be writable.
 */
enum RevqeStatus revqe_partition(const double *a,
                                 size_t len,
                                 double beta,
                                 size_t *p,
                                 size_t *jk,
                                 size_t jk_capacity,
                                 size_t *jk_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REVQE_H */
