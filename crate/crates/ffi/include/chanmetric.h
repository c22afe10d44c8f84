#ifndef CHANMETRIC_H
#define CHANMETRIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

typedef enum CmStatus {
  CM_STATUS_OK = 0,
  CM_STATUS_NULL_POINTER = 1,
  CM_STATUS_SHAPE = 2,
  CM_STATUS_INVALID_CHANNEL = 3,
  CM_STATUS_INVALID_ARGUMENT = 4,
  CM_STATUS_CAP = 5,
  CM_STATUS_NUMERIC = 6,
  CM_STATUS_SOLVER = 7,
  CM_STATUS_NOT_FOUND = 8,
  CM_STATUS_IO = 9,
  CM_STATUS_JSON = 10,
  CM_STATUS_UTF8 = 11,
  CM_STATUS_PANIC = 12,
} CmStatus;

/*
 Opaque channel handle. Free with `cm_channel_free`.
 */
typedef struct CmChannel CmChannel;

typedef struct CmFidelity {
  double fidelity;
  double angle;
  double bures;
  /*
   Duality gap of the program.
   */
  double gap;
} CmFidelity;

/*
 Each bound is 0 when it could not be established.
 */
typedef struct CmBounds {
  uint64_t lb_angle;
  uint64_t lb_parallel_fixed_w;
  uint64_t lb_parallel_per_n;
  uint64_t lb_path;
  uint64_t direct_min_n;
} CmBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Builds a channel from `n_kraus` operators of shape `dim_out x dim_in`,
 stored one after another in row-major order as separate real and
 imaginary arrays of length `n_kraus * dim_out * dim_in`.

 # Safety
 `re` and `im` must point to that many doubles; `out` must be writable.
 */
enum CmStatus cm_channel_from_kraus(size_t dim_in,
                                    size_t dim_out,
                                    size_t n_kraus,
                                    const double *re,
                                    const double *im,
                                    struct CmChannel **out_channel);

/*
 Parses a channel JSON document.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CmStatus cm_channel_from_json(const char *json, struct CmChannel **out_channel);

/*
 Reads a channel JSON document from a file.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum CmStatus cm_channel_load(const char *path, struct CmChannel **out_channel);

/*
 Qubit rotation `exp(i theta X)`.

 # Safety
 `out` must be writable.
 */
enum CmStatus cm_channel_rotation_x(double theta, struct CmChannel **out_channel);

/*
 Qubit dephasing with coherence factor `eta` in `[0, 1]`.

 # Safety
 `out` must be writable.
 */
enum CmStatus cm_channel_dephasing(double eta, struct CmChannel **out_channel);

/*
 # Safety
 `out` must be writable.
 */
enum CmStatus cm_channel_identity(size_t d, struct CmChannel **out_channel);

/*
 Serializes a channel as a JSON document. Release the string with
 `cm_string_free`.

 # Safety
 `ch` must be a live handle; `out` must be writable.
 */
enum CmStatus cm_channel_to_json(const struct CmChannel *ch, char **out_json);

/*
 Input dimension, or 0 for a null handle.

 # Safety
 `ch` must be null or a live handle.
 */
size_t cm_channel_dim_in(const struct CmChannel *ch);

/*
 Output dimension, or 0 for a null handle.

 # Safety
 `ch` must be null or a live handle.
 */
size_t cm_channel_dim_out(const struct CmChannel *ch);

/*
 Number of Kraus operators, or 0 for a null handle.

 # Safety
 `ch` must be null or a live handle.
 */
size_t cm_channel_kraus_count(const struct CmChannel *ch);

/*
 # Safety
 `ch` must be null or a handle from this library not yet freed.
 */
void cm_channel_free(struct CmChannel *ch);

/*
 # Safety
 `s` must be null or a string returned by this library not yet freed.
 */
void cm_string_free(char *s);

/*
 Channel fidelity with angle and Bures distance, solved to duality gap `tol`.

 # Safety
 `a` and `b` must be live handles; `out` must be writable.
 */
enum CmStatus cm_fidelity(const struct CmChannel *a,
                          const struct CmChannel *b,
                          double tol,
                          struct CmFidelity *out_fidelity);

/*
 Fidelity of the `n`-fold tensor powers.

 # Safety
 `a` and `b` must be live handles; `out` must be writable.
 */
enum CmStatus cm_fidelity_power(const struct CmChannel *a,
                                const struct CmChannel *b,
                                size_t n,
                                double tol,
                                struct CmFidelity *out_fidelity);

/*
 Interval `[2(1-F), 2 sqrt(1-F^2)]` holding the diamond norm of `a - b`.

 # Safety
 `a` and `b` must be live handles; `lower` and `upper` must be writable.
 */
enum CmStatus cm_diamond_bounds(const struct CmChannel *a,
                                const struct CmChannel *b,
                                double tol,
                                double *lower,
                                double *upper);

/*
 Diamond norm of `a - b` by its own program.

 # Safety
 `a` and `b` must be live handles; `out` must be writable.
 */
enum CmStatus cm_diamond_norm(const struct CmChannel *a,
                              const struct CmChannel *b,
                              double tol,
                              double *out_norm);

/*
 Lower bounds on the uses needed to discriminate `a` from `b`, and the
 direct answer searched up to `max_n`. With `mixture_path` the path bound
 runs along `(1 - x) a + x b`; otherwise `lb_path` is 0.

 # Safety
 `a` and `b` must be live handles; `out` must be writable.
 */
enum CmStatus cm_discrimination_bounds(const struct CmChannel *a,
                                       const struct CmChannel *b,
                                       uint64_t max_n,
                                       double tol,
                                       bool mixture_path,
                                       struct CmBounds *out_bounds);

/*
 Message of the last failed call on this thread, or null. Valid until the
 next call into this library from the same thread.
 */
const char *cm_last_error_message(void);

/*
 Library version as a static string.
 */
const char *cm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHANMETRIC_H */
