#ifndef CAUSALFLAG_H
#define CAUSALFLAG_H

/* C interface of libcausalflag. Objects are opaque handles owned by the caller
 * and released with the matching *_free function. Every call returns a status;
 * on failure cf_last_error() describes the problem (per thread). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CF_API __declspec(dllexport)
#else
#define CF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cf_status {
  CF_OK = 0,
  CF_INVALID_ARGUMENT = 1,
  CF_NOT_HERMITIAN,
  CF_NON_CONVERGENCE,
  CF_SINGULAR,
  CF_NOT_IN_GROUP,
  CF_ODD_RANK,
  CF_NOT_UNIMODULAR,
  CF_MODEL_MISMATCH,
  CF_NOT_IN_CHART,
  CF_NOT_TRANSVERSE,
  CF_ILL_CONDITIONED,
  CF_DEGENERATE_FRAME,
  CF_EMPTY_INPUT,
  CF_POINTS_NOT_IN_BOTH_CHARTS,
  CF_NOT_PAIRWISE_TRANSVERSE,
  CF_DEGENERATE_SIGNATURE,
  CF_UNKNOWN_PRESET,
  CF_BALL_TOO_LARGE,
  CF_NO_GAP,
  CF_TOO_FEW_POINTS,
  CF_NO_CERTIFICATE,
  CF_NOT_IN_LEVI,
  CF_LIMIT_SET_NOT_NEGATIVE,
  CF_NOT_IN_DOMAIN,
  CF_BOUNDARY_NOT_BRACKETED,
  CF_PARSE,
  CF_IO,
  CF_INTERNAL = 100
} cf_status;

typedef enum cf_verdict { CF_PASS = 0, CF_VIOLATION = 1 } cf_verdict;

typedef struct cf_model cf_model;
typedef struct cf_point cf_point;
typedef struct cf_report cf_report;

CF_API const char* cf_version(void);
CF_API const char* cf_status_name(cf_status s);
/* Message of the last failed call on this thread ("" if none). */
CF_API const char* cf_last_error(void);

/* Models by id: sp2, sp4, sp8, su22, sostar8, so32, so42, ... */
CF_API cf_status cf_model_new(const char* id, cf_model** out);
CF_API void cf_model_free(cf_model* m);
CF_API int cf_model_rank(const cf_model* m);
/* Matrix size acted on: 2r, or n + 2 for SO(n,2). */
CF_API int cf_model_dim(const cf_model* m);

/* Real frame (dim x cols, row-major); cols is r (Lagrangian) or 1 (isotropic line). */
CF_API cf_status cf_point_from_frame(const cf_model* m, const double* data, int rows, int cols, cf_point** out);
/* Real symmetric r x r chart coordinate (row-major), or a Minkowski n-vector (cols = 1). */
CF_API cf_status cf_point_from_chart(const cf_model* m, const double* data, int rows, int cols, cf_point** out);
/* which = +1 for p+, -1 for p-. */
CF_API cf_status cf_point_base(const cf_model* m, int which, cf_point** out);
CF_API void cf_point_free(cf_point* p);

CF_API cf_status cf_transversality_margin(const cf_point* a, const cf_point* b, double* out);
/* idx = |r - 2i| of a pairwise transverse triple; i_out may be NULL. */
CF_API cf_status cf_maslov_index(const cf_point* a, const cf_point* b, const cf_point* c, int* idx_out, int* i_out);

/* Experiments: config is a JSON object with a "command" key. */
CF_API size_t cf_command_count(void);
CF_API const char* cf_command_name(size_t i);
/* Accepted keys with defaults; valid until the next call on this thread. */
CF_API cf_status cf_command_help(const char* command, const char** out);
CF_API cf_status cf_run(const char* config_json, cf_report** out);
CF_API void cf_report_free(cf_report* r);
CF_API cf_verdict cf_report_verdict(const cf_report* r);
/* Rendered report (17 significant digits), owned by the report. */
CF_API const char* cf_report_json(const cf_report* r);
CF_API size_t cf_report_table_count(const cf_report* r);
CF_API const char* cf_report_table_name(const cf_report* r, size_t i);
CF_API const char* cf_report_table_csv(const cf_report* r, size_t i);

#ifdef __cplusplus
}
#endif

#endif
