#ifndef TRANSBEM_H
#define TRANSBEM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum TbStatus {
  TB_STATUS_OK = 0,
  TB_STATUS_NULL_POINTER = 1,
  TB_STATUS_INVALID_ARGUMENT = 2,
  TB_STATUS_GEOMETRY = 3,
  TB_STATUS_ASSEMBLY = 4,
  TB_STATUS_BUILD = 5,
  TB_STATUS_SPECTRUM = 6,
  TB_STATUS_ANALYTIC = 7,
  TB_STATUS_FIELD = 8,
  TB_STATUS_ON_BOUNDARY = 9,
  TB_STATUS_BUFFER_TOO_SMALL = 10,
  TB_STATUS_PANIC = 11,
} TbStatus;

/**
 * A scene with its boundary mesh.
 */
typedef struct TbScene TbScene;

/**
 * A solved system: GMRES report and boundary densities.
 */
typedef struct TbSolution TbSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length including
 * the terminator, or 0 when the last call succeeded.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t tb_last_error_message(char *buf, size_t len);

/**
 * Static name of a status code.
 */
const char *tb_status_name(enum TbStatus status);

/**
 * Circle of `radius` with material `eps2` inside, `elements` elements.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum TbStatus tb_scene_circle(double radius,
                              double eps2,
                              double omega,
                              size_t elements,
                              struct TbScene **out);

/**
 * Concentric circles; the outer one gets two thirds of `elements`.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum TbStatus tb_scene_concentric(double r_inner,
                                  double r_outer,
                                  double eps2,
                                  double eps3,
                                  double omega,
                                  size_t elements,
                                  struct TbScene **out);

/**
 * Scene from a TOML description (NUL-terminated UTF-8).
 *
 * # Safety
 * `toml` must be a valid C string; `out` must be valid for one pointer write.
 */
enum TbStatus tb_scene_from_toml(const char *toml, struct TbScene **out);

/**
 * Total number of boundary elements.
 *
 * # Safety
 * `scene` must come from a `tb_scene_*` constructor; `out` must be writable.
 */
enum TbStatus tb_scene_element_count(const struct TbScene *scene, size_t *out);

/**
 * Domain containing `(x, y)` (1 is the host).
 *
 * # Safety
 * `scene` must come from a `tb_scene_*` constructor; `out` must be writable.
 */
enum TbStatus tb_scene_locate(const struct TbScene *scene, double x, double y, uint32_t *out);

/**
 * Releases a scene. Null is ignored.
 *
 * # Safety
 * `scene` must be null or come from a `tb_scene_*` constructor and not be
 * used afterwards.
 */
void tb_scene_free(struct TbScene *scene);

/**
 * Assembles and solves the formulation named `formulation` (for example
 * `"calderon-bm-minus-alpha"` or `"recipe"`) with GMRES at relative
 * tolerance `tol`; `max_iter = 0` means the system dimension. A solve that
 * stops without converging still returns `TB_STATUS_OK`; query
 * [`tb_solution_converged`].
 *
 * # Safety
 * `scene` must be a live scene handle, `formulation` a valid C string and
 * `out` valid for one pointer write.
 */
enum TbStatus tb_solve(const struct TbScene *scene,
                       const char *formulation,
                       double tol,
                       size_t max_iter,
                       struct TbSolution **out);

/**
 * GMRES iteration count.
 *
 * # Safety
 * `solution` must be a live solution handle; `out` must be writable.
 */
enum TbStatus tb_solution_iterations(const struct TbSolution *solution, size_t *out);

/**
 * Whether GMRES reached the tolerance.
 *
 * # Safety
 * `solution` must be a live solution handle; `out` must be writable.
 */
enum TbStatus tb_solution_converged(const struct TbSolution *solution, bool *out);

/**
 * Relative residual `‖b - A y‖ / ‖b‖` of the returned solution.
 *
 * # Safety
 * `solution` must be a live solution handle; `out` must be writable.
 */
enum TbStatus tb_solution_residual(const struct TbSolution *solution, double *out);

/**
 * Dimension of the solved system.
 *
 * # Safety
 * `solution` must be a live solution handle; `out` must be writable.
 */
enum TbStatus tb_solution_dimension(const struct TbSolution *solution, size_t *out);

/**
 * Copies the boundary densities in mesh element order as interleaved
 * `re, im` pairs; `u` and `w` must each hold `2 * elements` doubles.
 *
 * # Safety
 * `solution` must be a live solution handle; `u` and `w` must be valid for
 * `2 * elements` writes.
 */
enum TbStatus tb_solution_densities(const struct TbSolution *solution,
                                    double *u,
                                    double *w,
                                    size_t elements);

/**
 * Total field at `(x, y)` from the boundary densities.
 *
 * # Safety
 * `solution` must be a live solution handle; `re` and `im` must be writable.
 */
enum TbStatus tb_solution_field(const struct TbSolution *solution,
                                double x,
                                double y,
                                double *re,
                                double *im);

/**
 * Releases a solution. Null is ignored.
 *
 * # Safety
 * `solution` must be null or come from [`tb_solve`] and not be used afterwards.
 */
void tb_solution_free(struct TbSolution *solution);

/**
 * Series solution for a circle of `radius` and material `eps2` under the
 * unit plane wave along `+x`, evaluated at `(x, y)`.
 *
 * # Safety
 * `re` and `im` must be writable.
 */
enum TbStatus tb_series_circle(double radius,
                               double eps2,
                               double omega,
                               size_t truncation,
                               double x,
                               double y,
                               double *re,
                               double *im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRANSBEM_H */
