#ifndef MARKOWITZ_H
#define MARKOWITZ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>

typedef enum MkStatus {
  MK_STATUS_OK = 0,
  MK_STATUS_NULL_POINTER = 1,
  MK_STATUS_INVALID_ARGUMENT = 2,
  MK_STATUS_BUFFER_TOO_SMALL = 3,
  MK_STATUS_DIMENSION_MISMATCH = 10,
  MK_STATUS_EMPTY_MARKET = 11,
  MK_STATUS_NON_FINITE = 12,
  MK_STATUS_NOT_SYMMETRIC = 13,
  MK_STATUS_NOT_POSITIVE_SEMIDEFINITE = 14,
  MK_STATUS_SINGULAR_TRANSFORM = 15,
  MK_STATUS_ARBITRAGE = 20,
  MK_STATUS_ILL_CONDITIONED = 21,
  MK_STATUS_DEGENERATE = 22,
  MK_STATUS_ZERO_COST_MARKET = 23,
  MK_STATUS_INFEASIBLE_TARGET = 24,
  MK_STATUS_ZERO_COST_PORTFOLIO = 25,
  MK_STATUS_ZERO_G = 26,
  MK_STATUS_G_NOT_POSITIVE = 27,
  MK_STATUS_UNSUPPORTED_COST_CLASS = 28,
  MK_STATUS_IO = 30,
  MK_STATUS_PARSE = 31,
  MK_STATUS_INSUFFICIENT_DATA = 32,
  MK_STATUS_PANIC = 99,
} MkStatus;

typedef enum MkCase {
  MK_CASE_RISKLESS_WITH_COST = 0,
  MK_CASE_NO_COSTLY_RISKLESS = 1,
  MK_CASE_ZERO_COST = 2,
} MkCase;

/**
 * Opaque market handle.
 */
typedef struct MkMarket MkMarket;

/**
 * Invariants of the canonical form. `m` and `i` are NaN when undefined for
 * the case; `g` is meaningful only when `g_defined` is set.
 */
typedef struct MkClassification {
  enum MkCase case_;
  size_t n;
  size_t k;
  double m;
  double g;
  double i;
  bool g_defined;
  double residual;
} MkClassification;

typedef struct MkDualInvariants {
  double m;
  double g;
  double i;
} MkDualInvariants;

/**
 * Frontier `g²(x² − m²) = (y + 1 − i)²`.
 */
typedef struct MkFrontier {
  double m;
  double g;
  double i;
  size_t n;
  /**
   * Set when every cost-1 portfolio lies on the curve (`n = 2`).
   */
  bool curve_only;
} MkFrontier;

typedef struct MkRiskReturn {
  double rr;
  double er;
  bool out_of_domain_sign;
} MkRiskReturn;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t mk_last_error_message(char *buf, size_t len);

/**
 * Validates a market from a row-major `n × n` covariance and length-`n`
 * cost and payoff vectors.
 *
 * # Safety
 * `r` must point to `n * n` doubles, `c` and `p` to `n` doubles each, and
 * `out` to writable storage for one handle pointer.
 */
enum MkStatus mk_market_new(size_t n,
                            const double *r,
                            const double *c,
                            const double *p,
                            struct MkMarket **out);

/**
 * Loads and validates a JSON market file.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
 */
enum MkStatus mk_market_load(const char *path, struct MkMarket **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `market` must come from this library and not be freed twice.
 */
void mk_market_free(struct MkMarket *market);

/**
 * Number of assets, or 0 for a null handle.
 *
 * # Safety
 * `market` must be null or a live handle.
 */
size_t mk_market_dim(const struct MkMarket *market);

/**
 * # Safety
 * `market` must be a live handle and `out` writable.
 */
enum MkStatus mk_classify(const struct MkMarket *market, struct MkClassification *out);

/**
 * Writes the canonical basis as a row-major `n × n` matrix whose columns are
 * the canonical basis portfolios.
 *
 * # Safety
 * `market` must be a live handle and `out` must hold `out_len` doubles.
 */
enum MkStatus mk_canonical_basis(const struct MkMarket *market, double *out, size_t out_len);

/**
 * `(m, g, i)` through the dual of `r + c ⊗ c`; nondegenerate markets only.
 *
 * # Safety
 * `market` must be a live handle and `out` writable.
 */
enum MkStatus mk_invariants_dual(const struct MkMarket *market, struct MkDualInvariants *out);

/**
 * # Safety
 * `a`, `b` must be live handles and `out` writable.
 */
enum MkStatus mk_isomorphic(const struct MkMarket *a, const struct MkMarket *b, bool *out);

/**
 * Writes an arbitrage portfolio into `out` and sets `found` when one exists.
 *
 * # Safety
 * `market` must be a live handle, `found` writable, `out` sized `out_len`.
 */
enum MkStatus mk_find_arbitrage(const struct MkMarket *market,
                                double *out,
                                size_t out_len,
                                bool *found);

/**
 * # Safety
 * `market` must be a live handle and `out` must hold `out_len` doubles.
 */
enum MkStatus mk_min_risk_portfolio(const struct MkMarket *market,
                                    double cost,
                                    double payoff,
                                    double *out,
                                    size_t out_len);

/**
 * # Safety
 * `market` must be a live handle and `out` writable.
 */
enum MkStatus mk_efficient_frontier(const struct MkMarket *market, struct MkFrontier *out);

/**
 * Samples `count` frontier points equally spaced in `y` over
 * `[y_min, y_max]` into `xs` and `ys`.
 *
 * # Safety
 * `frontier` must be readable; `xs` and `ys` must each hold `count` doubles.
 */
enum MkStatus mk_frontier_points(const struct MkFrontier *frontier,
                                 double y_min,
                                 double y_max,
                                 size_t count,
                                 double *xs,
                                 double *ys);

/**
 * `√r(v, v)` for a portfolio of length `n`.
 *
 * # Safety
 * `market` must be a live handle, `v` must hold `len` doubles, `out` writable.
 */
enum MkStatus mk_risk(const struct MkMarket *market, const double *v, size_t len, double *out);

/**
 * Relative risk and expected return of a portfolio with nonzero cost.
 *
 * # Safety
 * `market` must be a live handle, `v` must hold `len` doubles, `out` writable.
 */
enum MkStatus mk_risk_return(const struct MkMarket *market,
                             const double *v,
                             size_t len,
                             struct MkRiskReturn *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MARKOWITZ_H */
