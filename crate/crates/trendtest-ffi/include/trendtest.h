/* C interface to the trendtest trend-consistency library. */

#ifndef TRENDTEST_H
#define TRENDTEST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every C-ABI function.
 */
typedef enum TrendtestStatus {
  TRENDTEST_STATUS_OK = 0,
  TRENDTEST_STATUS_NULL_POINTER = 1,
  TRENDTEST_STATUS_INVALID_UTF8 = 2,
  TRENDTEST_STATUS_PARSE_ERROR = 3,
  TRENDTEST_STATUS_SCHEMA_ERROR = 4,
  TRENDTEST_STATUS_CONFIG_ERROR = 5,
  TRENDTEST_STATUS_RANGE_ERROR = 6,
  TRENDTEST_STATUS_DOMAIN_ERROR = 7,
  TRENDTEST_STATUS_DEGENERATE_INPUT = 8,
  TRENDTEST_STATUS_DOF_TOO_SMALL = 9,
  TRENDTEST_STATUS_NON_CONVERGENCE = 10,
  TRENDTEST_STATUS_INVALID_ARGUMENT = 11,
  TRENDTEST_STATUS_INTERNAL_ERROR = 12,
} TrendtestStatus;

/**
 * Lag-1 estimator selector.
 */
typedef enum TrendtestAr1Method {
  TRENDTEST_AR1_METHOD_ML = 0,
  TRENDTEST_AR1_METHOD_LAG1 = 1,
} TrendtestAr1Method;

/**
 * Effective-dof formula selector.
 */
typedef enum TrendtestDofFormula {
  TRENDTEST_DOF_FORMULA_QUENOUILLE = 0,
  TRENDTEST_DOF_FORMULA_NYCHKA = 1,
} TrendtestDofFormula;

/**
 * Opaque handle to a monthly series.
 */
typedef struct TrendtestSeries TrendtestSeries;

/**
 * Summary of an OLS trend fit.
 */
typedef struct TrendtestTrendFit {
  double slope;
  double intercept;
  double ols_se;
  double series_sd;
  double ssx;
  uint64_t n;
} TrendtestTrendFit;

/**
 * Ensemble trend statistics (mean trend, inter-model sd, model count).
 */
typedef struct TrendtestEnsemble {
  double mean_trend;
  double inter_model_sd;
  uint32_t n_models;
} TrendtestEnsemble;

/**
 * One row of the rolling analysis.
 */
typedef struct TrendtestEndpointRow {
  int32_t end_year;
  double trend;
  double se_adj;
  double series_sd;
  double r1;
  double n_eff;
  double d1_star;
  double d_star;
  double adj_df;
  double d1_zero;
} TrendtestEndpointRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the most recent error message on this thread into `buffer`
 * (NUL-terminated, truncated to `capacity`). Returns the full length of
 * the message in bytes, excluding the NUL.
 *
 * # Safety
 * `buffer` must point to at least `capacity` writable bytes, or be null.
 */
size_t trendtest_last_error_message(char *buffer, size_t capacity);

/**
 * Build a series from raw monthly values anchored at (start_year,
 * start_month).
 *
 * # Safety
 * `values` must point to `len` f64 values; `out` must be a valid pointer.
 * The returned handle must be released with [`trendtest_series_free`].
 */
enum TrendtestStatus trendtest_series_from_values(int32_t start_year,
                                                  uint32_t start_month,
                                                  const double *values,
                                                  size_t len,
                                                  struct TrendtestSeries **out);

/**
 * Parse a whitespace-delimited table with a header row.
 *
 * `year_column` defaults to "year" when null; a null `month_column` means
 * the year column holds decimal years on the monthly grid.
 *
 * # Safety
 * `text` and `value_column` must be valid NUL-terminated strings; `out`
 * must be a valid pointer. The returned handle must be released with
 * [`trendtest_series_free`].
 */
enum TrendtestStatus trendtest_series_parse(const char *text,
                                            const char *value_column,
                                            const char *year_column,
                                            const char *month_column,
                                            size_t skip_lines,
                                            struct TrendtestSeries **out);

/**
 * Release a series handle. Null is accepted and ignored.
 *
 * # Safety
 * `series` must have been returned by this library and not yet freed.
 */
void trendtest_series_free(struct TrendtestSeries *series);

/**
 * Number of monthly samples in the series.
 *
 * # Safety
 * `series` must be a live handle; `out` must be a valid pointer.
 */
enum TrendtestStatus trendtest_series_len(const struct TrendtestSeries *series, size_t *out);

/**
 * First calendar year of the series.
 *
 * # Safety
 * `series` must be a live handle; `out` must be a valid pointer.
 */
enum TrendtestStatus trendtest_series_start_year(const struct TrendtestSeries *series,
                                                 int32_t *out);

/**
 * First calendar month (1-12) of the series.
 *
 * # Safety
 * `series` must be a live handle; `out` must be a valid pointer.
 */
enum TrendtestStatus trendtest_series_start_month(const struct TrendtestSeries *series,
                                                  uint32_t *out);

/**
 * Copy the series values into `buffer`, which must hold at least
 * [`trendtest_series_len`] values.
 *
 * # Safety
 * `series` must be a live handle; `buffer` must point to `capacity`
 * writable f64 slots.
 */
enum TrendtestStatus trendtest_series_values(const struct TrendtestSeries *series,
                                             double *buffer,
                                             size_t capacity);

/**
 * Restrict a series to January `start_year` .. December `end_year`.
 *
 * # Safety
 * `series` must be a live handle; `out` must be a valid pointer. The
 * returned handle must be released with [`trendtest_series_free`].
 */
enum TrendtestStatus trendtest_series_window(const struct TrendtestSeries *series,
                                             int32_t start_year,
                                             int32_t end_year,
                                             struct TrendtestSeries **out);

/**
 * OLS trend fit on the series' centered decadal axis.
 *
 * # Safety
 * `series` must be a live handle; `out` must be a valid pointer.
 */
enum TrendtestStatus trendtest_fit_trend(const struct TrendtestSeries *series,
                                         struct TrendtestTrendFit *out);

/**
 * Full pipeline on one window: fit, lag-1 estimate, effective dof,
 * adjusted standard error, and the consistency statistics.
 *
 * # Safety
 * `series` must be a live handle; `ensemble` and `out` must be valid
 * pointers.
 */
enum TrendtestStatus trendtest_evaluate_endpoint(const struct TrendtestSeries *series,
                                                 const struct TrendtestEnsemble *ensemble,
                                                 int32_t start_year,
                                                 int32_t end_year,
                                                 enum TrendtestAr1Method ar1_method,
                                                 enum TrendtestDofFormula dof_formula,
                                                 struct TrendtestEndpointRow *out);

/**
 * Quenouille effective degrees of freedom, n (1 - r1) / (1 + r1).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TrendtestStatus trendtest_effective_dof_quenouille(uint64_t n, double r1, double *out);

/**
 * Effective dof with the 0.68/sqrt(n) correction term.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TrendtestStatus trendtest_effective_dof_nychka(uint64_t n, double r1, double *out);

/**
 * Scale an OLS standard error by sqrt((n - 2) / (n_eff - 2)).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TrendtestStatus trendtest_adjust_se(double ols_se, uint64_t n, double n_eff, double *out);

/**
 * Modified two-sample statistic with both trends stochastic.
 *
 * # Safety
 * `ensemble` and `out` must be valid pointers.
 */
enum TrendtestStatus trendtest_d1_star(const struct TrendtestEnsemble *ensemble,
                                       double b0,
                                       double se_adj,
                                       double *out);

/**
 * Statistic treating the observed trend as non-stochastic.
 *
 * # Safety
 * `ensemble` and `out` must be valid pointers.
 */
enum TrendtestStatus trendtest_d_star(const struct TrendtestEnsemble *ensemble,
                                      double b0,
                                      double *out);

/**
 * Trend-against-zero statistic, b0 / se_adj.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TrendtestStatus trendtest_d1_zero(double b0, double se_adj, double *out);

/**
 * Combined degrees of freedom for the two-variance statistic.
 *
 * # Safety
 * `ensemble` and `out` must be valid pointers.
 */
enum TrendtestStatus trendtest_welch_df(const struct TrendtestEnsemble *ensemble,
                                        double se_adj,
                                        double n_eff,
                                        double *out);

/**
 * Student-t CDF with (possibly fractional) df.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TrendtestStatus trendtest_t_cdf(double x, double df, double *out);

/**
 * Student-t quantile with (possibly fractional) df.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TrendtestStatus trendtest_t_quantile(double p, double df, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRENDTEST_H */
