/* buildflex: polyhedral building-flexibility models from coarse data,
 * plus a scenario-based aggregator scheduler. C API over the shared
 * library; every call returns a status code and the last failure message
 * is available per thread via bflex_last_error(). */

#ifndef BUILDFLEX_H
#define BUILDFLEX_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define BFLEX_API __declspec(dllexport)
#else
#define BFLEX_API __attribute__((visibility("default")))
#endif

typedef int32_t bflex_status;
enum {
    BFLEX_OK = 0,
    BFLEX_ERR_INVALID_ARGUMENT = 1,
    BFLEX_ERR_IO = 2,
    BFLEX_ERR_PARSE = 3,
    BFLEX_ERR_VALIDATION = 4,
    BFLEX_ERR_NUMERIC = 5,
    BFLEX_ERR_INTERNAL = 6
};

typedef struct bflex_dataset bflex_dataset;
typedef struct bflex_model bflex_model;

BFLEX_API const char* bflex_version(void);
BFLEX_API const char* bflex_status_name(bflex_status status);
/* Message of the most recent failure on this thread; empty string if none. */
BFLEX_API const char* bflex_last_error(void);

/* Command entry points mirroring the CLI subcommands. `out_dir` NULL or
 * empty uses the directories named in the config; `seed` 0 uses the
 * config's seed. */
BFLEX_API bflex_status bflex_generate_data(const char* config_path, const char* out_dir, uint64_t seed);
BFLEX_API bflex_status bflex_train(const char* config_path, const char* out_dir, uint64_t seed);
BFLEX_API bflex_status bflex_validate(const char* config_path, const char* out_dir);
BFLEX_API bflex_status bflex_schedule(const char* config_path, const char* out_dir, uint64_t seed);
/* Renders a text summary; free the string with bflex_string_free. */
BFLEX_API bflex_status bflex_report(const char* config_path, char** out_text);
BFLEX_API void bflex_string_free(char* text);

/* Handle-based access for embedding. */
BFLEX_API bflex_status bflex_dataset_load(const char* csv_path, int periods, bflex_dataset** out);
BFLEX_API void bflex_dataset_free(bflex_dataset* ds);
BFLEX_API int bflex_dataset_num_days(const bflex_dataset* ds);
BFLEX_API int bflex_dataset_periods(const bflex_dataset* ds);

BFLEX_API bflex_status bflex_model_load(const char* bundle_path, bflex_model** out);
BFLEX_API void bflex_model_free(bflex_model* model);
BFLEX_API int bflex_model_periods(const bflex_model* model);
BFLEX_API int bflex_model_num_clusters(const bflex_model* model);
BFLEX_API double bflex_model_alpha(const bflex_model* model);
BFLEX_API bflex_status bflex_model_summary_json(const bflex_model* model, char** out_json);

/* Forecast JSON for the two region calls:
 *   {"day_of_week":"tue","initial_indoor_c":22.5,
 *    "outdoor_c":[...periods...],"solar_wm2":[...],"alpha":0.05}
 * solar_wm2 defaults to zeros; alpha re-selects the stored beta sweep and
 * defaults to the bundle's training alpha. */

/* Membership test of a load profile (length = model periods) against the
 * region instantiated for the forecast day. */
BFLEX_API bflex_status bflex_model_region_contains(const bflex_model* model, const char* forecast_json,
                                                   const double* load, size_t load_len, double tolerance,
                                                   int* contained);

/* Linear constraint export of the same region as JSON
 *   {"rows":R,"cols":T,"g":[[...]...],"h":[...]}
 * with G p <= h; band-ordering rows appended when requested. */
BFLEX_API bflex_status bflex_model_region_constraints(const bflex_model* model, const char* forecast_json,
                                                      int include_band_ordering, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* BUILDFLEX_H */
