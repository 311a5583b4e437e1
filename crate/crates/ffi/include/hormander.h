#ifndef HORMANDER_H
#define HORMANDER_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum HmStatus {
  HmStatus_Ok = 0,
  HmStatus_NullPointer = 1,
  HmStatus_InvalidInput = 2,
  HmStatus_Domain = 3,
  HmStatus_Evaluation = 4,
  HmStatus_Precondition = 5,
  HmStatus_Numerical = 6,
  HmStatus_NonConvergence = 7,
  HmStatus_Io = 8,
  HmStatus_Panic = 9,
} HmStatus;

/**
 * Opaque grid distribution.
 */
typedef struct HmGrid HmGrid;

/**
 * Opaque parameter expression.
 */
typedef struct HmParam HmParam;

typedef struct HmIndices {
  double sigma0;
  double sigma1;
  double bracket;
  bool lower_attained;
  bool upper_attained;
} HmIndices;

typedef struct HmRoCertificate {
  bool is_member;
  double s0;
  double s1;
  double log_c;
  struct HmIndices indices;
} HmRoCertificate;

typedef struct HmPseudoconcavity {
  bool passes;
  double log_c_best;
  /**
   * `log t` and `log tau` of the worst pair.
   */
  double worst_log_t;
  double worst_log_tau;
  uintptr_t points;
} HmPseudoconcavity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread; empty after success.
 * Valid until the next call into this library on the same thread.
 */
const char *hm_last_error(void);

/**
 * Library version, a static string.
 */
const char *hm_version(void);

/**
 * Parses a JSON parameter expression.
 */
enum HmStatus hm_param_from_json(const char *json, struct HmParam **out);

/**
 * Serializes a parameter to JSON; release the string with
 * [`hm_string_free`].
 */
enum HmStatus hm_param_to_json(const struct HmParam *param, char **out);

void hm_string_free(char *s);

void hm_param_free(struct HmParam *param);

/**
 * `phi(t)`.
 */
enum HmStatus hm_param_eval(const struct HmParam *param, double t, double *out);

/**
 * `log phi(e^x)`.
 */
enum HmStatus hm_param_log_eval(const struct HmParam *param, double x, double *out);

/**
 * `psi(tau) = tau^{-s0/(s1-s0)} phi(tau^{1/(s1-s0)})` as a new handle.
 */
enum HmStatus hm_psi_from_phi(const struct HmParam *phi,
                              double s0,
                              double s1,
                              struct HmParam **out);

/**
 * `phi(t) = t^{s0} psi(t^{s1-s0})` as a new handle.
 */
enum HmStatus hm_phi_from_psi(const struct HmParam *psi,
                              double s0,
                              double s1,
                              struct HmParam **out);

enum HmStatus hm_matuszewska_indices(const struct HmParam *phi,
                                     double log_t_max,
                                     struct HmIndices *out);

/**
 * RO certificate on `samples` log-spaced points of `[1, e^{log_t_max}]`
 * with constants capped at `cap`.
 */
enum HmStatus hm_ro_membership(const struct HmParam *phi,
                               double log_t_max,
                               uintptr_t samples,
                               double cap,
                               struct HmRoCertificate *out);

/**
 * Peetre test of `psi` on `(r, e^{log_t_max}]` with `density` points per
 * decade.
 */
enum HmStatus hm_pseudoconcavity_test(const struct HmParam *psi,
                                      double r,
                                      double log_t_max,
                                      double density,
                                      double cap,
                                      struct HmPseudoconcavity *out);

/**
 * Reads a distribution in the binary layout used by the command line.
 */
enum HmStatus hm_grid_from_binary(const uint8_t *bytes, uintptr_t len, struct HmGrid **out);

/**
 * Random samples on an `n`-dimensional grid with `points` points and
 * box length `box_length` per axis.
 */
enum HmStatus hm_grid_random(uintptr_t n,
                             uintptr_t points,
                             double box_length,
                             uint64_t seed,
                             struct HmGrid **out);

void hm_grid_free(struct HmGrid *grid);

/**
 * Spatial Riemann-sum norm of the samples.
 */
enum HmStatus hm_grid_l2_norm(const struct HmGrid *grid, double *out);

enum HmStatus hm_hormander_norm(const struct HmGrid *grid, const struct HmParam *phi, double *out);

/**
 * Quotient norm over a mask given in the binary layout used by the
 * command line.
 */
enum HmStatus hm_quotient_norm(const struct HmGrid *grid,
                               const uint8_t *mask_bytes,
                               uintptr_t mask_len,
                               const struct HmParam *phi,
                               double *out);

/**
 * Relative gap between the grid norm and the interpolation norm between
 * `H^(s0)` and `H^(s1)`.
 */
enum HmStatus hm_norm_identity_check(const struct HmGrid *grid,
                                     const struct HmParam *phi,
                                     double s0,
                                     double s1,
                                     double *out);

/**
 * `log(npsi / max(n0, n1))` for the rank-one map between spectral points
 * `e^{log_src}` and `e^{log_dst}`.
 */
enum HmStatus hm_rank_one_witness(const struct HmParam *psi,
                                  double log_src,
                                  double log_dst,
                                  double *out);

/**
 * `log phi(e^x)` for the oscillating slowly varying parameter.
 */
enum HmStatus hm_appendix_log_phi(double x, double *out);

/**
 * Closed-form lower bound for `log(phi(t_k)/phi(s_k))` and the value
 * observed by direct evaluation.
 */
enum HmStatus hm_ratio_log_lower_bound(uint32_t k, double *bound, double *observed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HORMANDER_H */
