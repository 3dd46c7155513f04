#ifndef QUASIHERM_H
#define QUASIHERM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QhStatus {
  QH_STATUS_OK = 0,
  QH_STATUS_NULL_POINTER = 1,
  QH_STATUS_INVALID_ARGUMENT = 2,
  QH_STATUS_PARSE = 3,
  QH_STATUS_VALIDATION = 4,
  QH_STATUS_NUMERICAL = 5,
  QH_STATUS_PANIC = 6,
} QhStatus;

typedef enum QhCheck {
  QH_CHECK_NORM_CONSERVED = 0,
  QH_CHECK_METRIC_RECONSTRUCTED = 1,
  QH_CHECK_QH_HOLDS = 2,
  QH_CHECK_CORRECTED_GENERATOR_OK = 3,
  QH_CHECK_NAIVE_FAILS_IFF_METRIC_MOVES = 4,
} QhCheck;

// Opaque report handle.
typedef struct QhReport QhReport;

// Opaque scenario handle.
typedef struct QhScenario QhScenario;

// One interior grid node of a diagnostics run.
typedef struct QhDiagnosticsRow {
  double t;
  double unitarity_defect;
  double norm_phys;
  double res_naive;
  double res_corrected;
  double res_metric;
  double res_qh;
} QhDiagnosticsRow;

typedef struct QhVerdict {
  enum QhCheck check;
  bool passed;
  double observed;
  double threshold;
  // `observed >= threshold` is required when set, `<=` otherwise.
  bool at_least;
} QhVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread. Valid until the next
// failing call on the same thread; never null.
const char *qh_last_error_message(void);

size_t qh_builtin_count(void);

// Name of builtin `index` (sorted), or null when out of range. The string
// is static.
const char *qh_builtin_name(size_t index);

// # Safety
// `name` must be a NUL-terminated string and `out` writable.
enum QhStatus qh_scenario_builtin(const char *name, struct QhScenario **out);

// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum QhStatus qh_scenario_from_json(const char *json, struct QhScenario **out);

// Fully explicit JSON for the scenario; free with [`qh_string_free`].
//
// # Safety
// `scenario` must be a live handle and `out` writable.
enum QhStatus qh_scenario_to_json(const struct QhScenario *scenario, char **out);

// # Safety
// `scenario` must be a live handle.
enum QhStatus qh_scenario_set_steps(struct QhScenario *scenario, size_t steps);

// # Safety
// `scenario` must be a live handle.
enum QhStatus qh_scenario_set_hbar(struct QhScenario *scenario, double hbar);

// Hilbert-space dimension, 0 for a null handle.
//
// # Safety
// `scenario` must be null or a live handle.
size_t qh_scenario_dim(const struct QhScenario *scenario);

// # Safety
// `scenario` must be null or a handle not yet freed.
void qh_scenario_free(struct QhScenario *scenario);

// Evolves the scenario and evaluates the verdicts.
//
// # Safety
// `scenario` must be a live handle and `out` writable.
enum QhStatus qh_run(const struct QhScenario *scenario, struct QhReport **out);

// # Safety
// `report` must be null or a live handle.
size_t qh_report_row_count(const struct QhReport *report);

// # Safety
// `report` must be a live handle and `out` writable.
enum QhStatus qh_report_row(const struct QhReport *report,
                            size_t index,
                            struct QhDiagnosticsRow *out);

// # Safety
// `report` must be null or a live handle.
size_t qh_report_verdict_count(const struct QhReport *report);

// # Safety
// `report` must be a live handle and `out` writable.
enum QhStatus qh_report_verdict(const struct QhReport *report, size_t index, struct QhVerdict *out);

// Name of a check as printed in reports; static.
const char *qh_check_name(enum QhCheck check);

// False for a null handle.
//
// # Safety
// `report` must be null or a live handle.
bool qh_report_all_passed(const struct QhReport *report);

// Diagnostics as CSV; free with [`qh_string_free`].
//
// # Safety
// `report` must be a live handle and `out` writable.
enum QhStatus qh_report_csv(const struct QhReport *report, char **out);

// # Safety
// `report` must be null or a handle not yet freed.
void qh_report_free(struct QhReport *report);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void qh_string_free(char *s);

// Principal square root of a Hermitian positive-definite matrix.
//
// # Safety
// `theta` and `out` must each hold `2 * n * n` doubles.
enum QhStatus qh_principal_sqrt(size_t n, const double *theta, double *out);

// Relative residual `|Theta H - H^dagger Theta| / |Theta H|`.
//
// # Safety
// `h` and `theta` must each hold `2 * n * n` doubles; `out` must be writable.
enum QhStatus qh_quasi_hermiticity_residual(size_t n,
                                            const double *h,
                                            const double *theta,
                                            double *out);

// Physical inner product `phi^dagger Theta psi` of reference-space kets;
// writes `(re, im)`.
//
// # Safety
// `theta` must hold `2 * n * n` doubles, `phi` and `psi` `2 * n` doubles,
// and `out` two doubles.
enum QhStatus qh_inner_physical(size_t n,
                                const double *theta,
                                const double *phi,
                                const double *psi,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUASIHERM_H */
