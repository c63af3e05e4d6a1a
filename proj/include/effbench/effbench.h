#ifndef EFFBENCH_H
#define EFFBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EB_API __declspec(dllimport)
#elif defined(__GNUC__)
#define EB_API __attribute__((visibility("default")))
#else
#define EB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every function returning int returns one of these. */
enum eb_status {
  EB_OK = 0,
  EB_ERR_INTERNAL = 1,    /* unexpected failure */
  EB_ERR_VALIDATION = 2,  /* bad input, schema, configuration or I/O */
  EB_ERR_CONVERGENCE = 3  /* estimator or solver did not converge */
};

enum eb_stage {
  EB_STAGE_DESCRIBE = 0,
  EB_STAGE_SFA = 1,
  EB_STAGE_DEA = 2,
  EB_STAGE_SECOND_STAGE = 3,
  EB_STAGE_PIPELINE = 4
};

typedef struct eb_config eb_config;
typedef struct eb_result eb_result;

/* Headline numbers of a run; NaN where the method did not run. */
typedef struct eb_summary {
  size_t n_dmus;
  size_t n_periods;
  double mean_sfa_te;
  double sfa_eta;
  double mean_dea_score;
  size_t n_dea_efficient;
  double score_correlation;
} eb_summary;

EB_API const char* eb_version(void);

/* Message of the last failure on the calling thread; "" when none. */
EB_API const char* eb_last_error(void);

EB_API int eb_config_load(const char* path, eb_config** out);
/* base_dir may be NULL; relative data paths then resolve against the working directory. */
EB_API int eb_config_parse(const char* json, const char* base_dir, eb_config** out);
EB_API void eb_config_free(eb_config* config);

EB_API int eb_config_set_seed(eb_config* config, uint64_t seed);
/* A negative size keeps the configured value. */
EB_API int eb_config_set_bootstrap(eb_config* config, int l1, int l2);
EB_API int eb_config_set_threads(eb_config* config, unsigned threads);
EB_API int eb_config_set_decimal_comma(eb_config* config, int enabled);
EB_API int eb_config_set_output_dir(eb_config* config, const char* dir);
/* Pointer valid until the config is modified or freed. */
EB_API const char* eb_config_output_dir(const eb_config* config);
/* Normalized JSON; pointer valid until the config is modified or freed. */
EB_API const char* eb_config_json(const eb_config* config);

EB_API int eb_run(const eb_config* config, enum eb_stage stage, eb_result** out);
EB_API void eb_result_free(eb_result* result);

EB_API size_t eb_result_artifact_count(const eb_result* result);
/* NULL when index is out of range. */
EB_API const char* eb_result_artifact_name(const eb_result* result, size_t index);
EB_API const char* eb_result_artifact_content(const eb_result* result, size_t index);
EB_API int eb_result_summary(const eb_result* result, eb_summary* out);
/* All artifacts or none. */
EB_API int eb_result_write(const eb_result* result, const char* dir);

/* Writes the synthetic airport sample (panel, covariates, price index, config) into dir. */
EB_API int eb_synth_aena(uint64_t seed, const char* dir);

#ifdef __cplusplus
}
#endif

#endif
