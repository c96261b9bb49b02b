#ifndef ACSPLIT_H
#define ACSPLIT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result of a call. Values match the exit codes of the `acsplit` CLI where
// the categories overlap.
typedef enum AcsStatus {
  ACS_STATUS_OK = 0,
  // A required pointer argument was null.
  ACS_STATUS_NULL_POINTER = 1,
  // Bad parameter, unknown scheme id or non-UTF-8 string.
  ACS_STATUS_INVALID_ARGUMENT = 2,
  ACS_STATUS_IO = 3,
  // Field file or value buffer with the wrong shape or content.
  ACS_STATUS_MALFORMED_FIELD = 4,
  ACS_STATUS_INVALID_OMEGA = 5,
  // The integration blew up; the field holds the last finite state.
  ACS_STATUS_DIVERGED = 6,
  ACS_STATUS_CONVERGENCE_FAILURE = 7,
  // Invalid grid, mismatched grids or a zero reference norm.
  ACS_STATUS_INVALID_GRID = 8,
  // A Rust panic was caught at the boundary.
  ACS_STATUS_PANIC = 9,
} AcsStatus;

// A scalar field on a 1D, 2D or 3D cell-centered grid.
typedef struct AcsField AcsField;

// Splitting coefficients `(a_j, b_j)` of one scheme.
typedef struct AcsScheme AcsScheme;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null when none
// failed yet. The pointer stays valid until the next failing call on the
// same thread.
const char *acs_last_error(void);

// Library version as a static NUL-terminated string.
const char *acs_version(void);

// Creates a field on a grid with `dims` axes of `cells[i]` cells and length
// `lengths[i]`. `values` holds the product of `cells` entries, or is null
// for an all-zero field.
//
// # Safety
// `cells` and `lengths` point to `dims` elements, `values` is null or points
// to the full cell count, and `out` is a valid pointer.
enum AcsStatus acs_field_new(size_t dims,
                             const size_t *cells,
                             const double *lengths,
                             const double *values,
                             struct AcsField **out);

// Releases a field. Null is ignored.
//
// # Safety
// `field` is null or a handle from this library that was not freed yet.
void acs_field_free(struct AcsField *field);

// Number of cells, 0 for a null handle.
//
// # Safety
// `field` is null or a live handle.
size_t acs_field_len(const struct AcsField *field);

// Number of axes, 0 for a null handle.
//
// # Safety
// `field` is null or a live handle.
size_t acs_field_dims(const struct AcsField *field);

// Borrowed pointer to the values; valid until the field is modified or
// freed. Null for a null handle.
//
// # Safety
// `field` is null or a live handle.
const double *acs_field_values(const struct AcsField *field);

// Writes a field file.
//
// # Safety
// `field` is a live handle and `path` a NUL-terminated string.
enum AcsStatus acs_field_save(const struct AcsField *field, const char *path);

// Reads a field file.
//
// # Safety
// `path` is a NUL-terminated string and `out` a valid pointer.
enum AcsStatus acs_field_load(const char *path, struct AcsField **out);

// Traveling front at time `t` on `[0, 4]` with `cells` cells.
//
// # Safety
// `out` is a valid pointer.
enum AcsStatus acs_traveling_wave(double epsilon, size_t cells, double t, struct AcsField **out);

// Seeded random initial state on the unit cube with `cells` cells per axis.
//
// # Safety
// `out` is a valid pointer.
enum AcsStatus acs_spinodal_initial(double epsilon,
                                    double amplitude,
                                    uint64_t seed,
                                    size_t cells,
                                    struct AcsField **out);

// `||f - reference|| / ||reference||`.
//
// # Safety
// Both handles are live and `out` is a valid pointer.
enum AcsStatus acs_relative_l2_error(const struct AcsField *field,
                                     const struct AcsField *reference,
                                     double *out);

// Looks up a scheme by id: `S1`, `S2`, `S2:<w>`, `S3X`, `S3Y`, `S3Z`,
// `S3+:<w>`, `S3-:<w>`, `S4U` or `S4V`.
//
// # Safety
// `id` is a NUL-terminated string and `out` a valid pointer.
enum AcsStatus acs_scheme_named(const char *id, struct AcsScheme **out);

// Third-order scheme with `b_3 = omega`; `branch` is `+1` or `-1`.
//
// # Safety
// `out` is a valid pointer.
enum AcsStatus acs_scheme_third_order(double omega, int branch, struct AcsScheme **out);

// Releases a scheme. Null is ignored.
//
// # Safety
// `scheme` is null or a handle from this library that was not freed yet.
void acs_scheme_free(struct AcsScheme *scheme);

// Number of stages `p`, 0 for a null handle.
//
// # Safety
// `scheme` is null or a live handle.
size_t acs_scheme_stages(const struct AcsScheme *scheme);

// Claimed order of accuracy, 0 for a null handle.
//
// # Safety
// `scheme` is null or a live handle.
uint8_t acs_scheme_order(const struct AcsScheme *scheme);

// Copies `a_1..a_p` and `b_1..b_p` into buffers of `len >= p` elements.
//
// # Safety
// `scheme` is a live handle; `a` and `b` each hold `len` writable elements.
enum AcsStatus acs_scheme_coeffs(const struct AcsScheme *scheme, double *a, double *b, size_t len);

// Advances `field` by one step of size `dt` in place. `k_tol` is the heat
// cut-off (`INFINITY` disables it). On error the field is unchanged.
//
// # Safety
// `field` and `scheme` are live handles.
enum AcsStatus acs_step(struct AcsField *field,
                        const struct AcsScheme *scheme,
                        double dt,
                        double epsilon,
                        double k_tol);

// Integrates `field` in place from 0 to `t_final` with step `dt`; a final
// shortened step covers any remainder. When the run diverges the field
// holds the last finite state and `ACS_STATUS_DIVERGED` is returned.
// `steps_done` (may be null) receives the number of completed steps.
//
// # Safety
// `field` and `scheme` are live handles; `steps_done` is null or valid.
enum AcsStatus acs_run(struct AcsField *field,
                       const struct AcsScheme *scheme,
                       double dt,
                       double t_final,
                       double epsilon,
                       double k_tol,
                       size_t *steps_done);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ACSPLIT_H */
