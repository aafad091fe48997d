#ifndef PPURSUIT_PPURSUIT_H
#define PPURSUIT_PPURSUIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PPURSUIT_BUILDING_LIBRARY)
#    define PPURSUIT_API __declspec(dllexport)
#  else
#    define PPURSUIT_API __declspec(dllimport)
#  endif
#else
#  define PPURSUIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every function returns one of these. On failure ppursuit_last_error()
 * holds a message for the calling thread. */
typedef enum ppursuit_status {
  PPURSUIT_OK = 0,
  PPURSUIT_E_DOMAIN = 1,
  PPURSUIT_E_PARAM = 2,
  PPURSUIT_E_SUPPORT = 3,
  PPURSUIT_E_DIMENSION_MISMATCH = 4,
  PPURSUIT_E_ZERO_DIRECTION = 5,
  PPURSUIT_E_SINGULAR_COVARIANCE = 6,
  PPURSUIT_E_DEGENERATE_CONSTRAINT = 7,
  PPURSUIT_E_DEGENERATE_AXIS = 8,
  PPURSUIT_E_TOO_FEW_RETAINED = 9,
  PPURSUIT_E_FLOOR_VIOLATION = 10,
  PPURSUIT_E_ZERO_VARIANCE = 11,
  PPURSUIT_E_DEGENERATE_WEIGHTS = 12,
  PPURSUIT_E_BASIS_DEGENERATE = 13,
  PPURSUIT_E_STRUCTURE_MISMATCH = 14,
  PPURSUIT_E_DEGENERATE_PREDICTOR = 15,
  PPURSUIT_E_PARSE = 16,
  PPURSUIT_E_EMPTY_DATA = 17,
  PPURSUIT_E_CONFIG = 18,
  PPURSUIT_E_IO = 19,
  PPURSUIT_E_NULL_ARGUMENT = 98,
  PPURSUIT_E_INTERNAL = 99
} ppursuit_status;

typedef struct ppursuit_matrix ppursuit_matrix;
typedef struct ppursuit_config ppursuit_config;
typedef struct ppursuit_result ppursuit_result;
typedef struct ppursuit_artifacts ppursuit_artifacts;

PPURSUIT_API const char* ppursuit_version(void);
PPURSUIT_API const char* ppursuit_last_error(void);
/* "ParamError", "ZeroVariance", ... */
PPURSUIT_API const char* ppursuit_status_name(int status);
/* Nonzero for statuses caused by bad input or configuration rather than
 * numerical failure. */
PPURSUIT_API int ppursuit_status_is_config_error(int status);

/* Strings returned through char** are owned by the caller. */
PPURSUIT_API void ppursuit_string_free(char* s);

/* Matrices are row-major: one observation per row. write_csv adds an
 * x0,x1,... header. */
PPURSUIT_API int ppursuit_matrix_create(size_t rows, size_t cols, const double* values, ppursuit_matrix** out);
PPURSUIT_API int ppursuit_matrix_read_csv(const char* path, char delimiter, int has_header, ppursuit_matrix** out);
PPURSUIT_API int ppursuit_matrix_write_csv(const ppursuit_matrix* m, const char* path);
PPURSUIT_API size_t ppursuit_matrix_rows(const ppursuit_matrix* m);
PPURSUIT_API size_t ppursuit_matrix_cols(const ppursuit_matrix* m);
PPURSUIT_API int ppursuit_matrix_copy(const ppursuit_matrix* m, double* out, size_t len);
PPURSUIT_API void ppursuit_matrix_free(ppursuit_matrix* m);

/* Pursuit settings. ppursuit_config_merge_json applies the keys of a JSON
 * object ({"divergence": "hellinger", "alpha": 0.05, ...}) on top. */
PPURSUIT_API int ppursuit_config_create(ppursuit_config** out);
PPURSUIT_API int ppursuit_config_merge_json(ppursuit_config* cfg, const char* json);
PPURSUIT_API int ppursuit_config_to_json(const ppursuit_config* cfg, char** out);
PPURSUIT_API void ppursuit_config_free(ppursuit_config* cfg);

PPURSUIT_API int ppursuit_pursue(const ppursuit_matrix* data, const ppursuit_config* cfg, ppursuit_result** out);
PPURSUIT_API int ppursuit_result_levels(const ppursuit_result* r);
PPURSUIT_API int ppursuit_result_accepted(const ppursuit_result* r);
PPURSUIT_API int ppursuit_result_direction(const ppursuit_result* r, int level, double* out, size_t len);
/* level 0 is the bare instrumental fit. */
PPURSUIT_API int ppursuit_result_estimate(const ppursuit_result* r, int level, double* estimate, double* statistic,
                                          int* accept_h0);
/* Density of the fitted model truncated to its first `level` levels. */
PPURSUIT_API int ppursuit_result_density(const ppursuit_result* r, int level, const double* x, size_t d, double* out);
PPURSUIT_API int ppursuit_result_to_json(const ppursuit_result* r, char** out);
PPURSUIT_API void ppursuit_result_free(ppursuit_result* r);

/* Runs a bundled scenario (or a scenario file) and writes its artifacts.
 * overrides_json may be NULL or an object with keys "pursuit", "n", "d".
 * On a numerical failure *out still receives the partial artifacts. */
PPURSUIT_API int ppursuit_simulate(const char* name_or_path, const char* overrides_json, const char* output_dir,
                                   ppursuit_artifacts** out);
/* request_json keys: "analysis" (pursuit|copula|regression|deconvolution),
 * "pursuit", "csv" ({delimiter, header, columns}), "regression", "grid". */
PPURSUIT_API int ppursuit_analyze_csv(const char* csv_path, const char* request_json, const char* output_dir,
                                      ppursuit_artifacts** out);
PPURSUIT_API const char* ppursuit_artifacts_result_file(const ppursuit_artifacts* a);
PPURSUIT_API const char* ppursuit_artifacts_log(const ppursuit_artifacts* a);
PPURSUIT_API size_t ppursuit_artifacts_grid_count(const ppursuit_artifacts* a);
PPURSUIT_API const char* ppursuit_artifacts_grid_file(const ppursuit_artifacts* a, size_t i);
PPURSUIT_API int ppursuit_artifacts_document(const ppursuit_artifacts* a, char** out);
PPURSUIT_API void ppursuit_artifacts_free(ppursuit_artifacts* a);

/* Density grid from a saved result file. grid_json may be NULL (a default
 * grid around the fitted mean); level < 0 uses every level. */
PPURSUIT_API int ppursuit_emit_grid(const char* result_path, const char* grid_json, int level, const char* output_path);
/* Problems found by the schema check, one per line; empty when valid. */
PPURSUIT_API int ppursuit_validate_result_file(const char* result_path, char** problems);

PPURSUIT_API int ppursuit_scenario_names(char** out);
PPURSUIT_API int ppursuit_scenario_json(const char* name, char** out);

#ifdef __cplusplus
}
#endif

#endif
