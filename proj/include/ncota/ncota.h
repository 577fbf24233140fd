/*
 * Copyright 2026 The ncota-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the simulator. Every call returns an ncota_status; on
 * failure ncota_last_error() describes the problem for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * ncota_string_free(). */

#ifndef NCOTA_NCOTA_H_
#define NCOTA_NCOTA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NCOTA_API __declspec(dllexport)
#else
#define NCOTA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ncota_status {
  NCOTA_OK = 0,
  NCOTA_ERR_INVALID_ARGUMENT = 1,
  NCOTA_ERR_INVALID_CONFIG = 2,
  NCOTA_ERR_HALF_DUPLEX = 3,
  NCOTA_ERR_NON_FINITE = 4,
  NCOTA_ERR_NOT_CONVERGED = 5,
  NCOTA_ERR_IO = 6,
  NCOTA_ERR_PARSE = 7,
  NCOTA_ERR_INTERNAL = 99
} ncota_status;

typedef struct ncota_deployment ncota_deployment;
typedef struct ncota_problem ncota_problem;
typedef struct ncota_result ncota_result;

NCOTA_API const char* ncota_version(void);
NCOTA_API const char* ncota_last_error(void);
NCOTA_API const char* ncota_status_name(ncota_status status);
NCOTA_API void ncota_string_free(char* s);

/* Deployments. Radio constants are the library defaults. */
NCOTA_API ncota_status ncota_deployment_generate(size_t n, double radius_m,
                                                 uint64_t seed,
                                                 ncota_deployment** out);
NCOTA_API ncota_status ncota_deployment_from_json(const char* json,
                                                  ncota_deployment** out);
NCOTA_API ncota_status ncota_deployment_load(const char* path,
                                             ncota_deployment** out);
NCOTA_API ncota_status ncota_deployment_save(const ncota_deployment* dep,
                                             const char* path);
NCOTA_API ncota_status ncota_deployment_to_json(const ncota_deployment* dep,
                                                char** out);
NCOTA_API ncota_status ncota_deployment_size(const ncota_deployment* dep,
                                             size_t* out);
NCOTA_API ncota_status ncota_deployment_lambda_star(
    const ncota_deployment* dep, double* out);
NCOTA_API void ncota_deployment_free(ncota_deployment* dep);

/* Logistic regression problems, one training sample per node. */
NCOTA_API ncota_status ncota_problem_synthesize(size_t n, size_t dim,
                                                uint64_t seed, size_t n_test,
                                                ncota_problem** out);
NCOTA_API ncota_status ncota_problem_load_idx(const char* images_path,
                                              const char* labels_path,
                                              size_t n, size_t dim,
                                              size_t n_test, uint64_t seed,
                                              ncota_problem** out);
NCOTA_API ncota_status ncota_problem_load(const char* path,
                                          ncota_problem** out);
NCOTA_API ncota_status ncota_problem_save(const ncota_problem* problem,
                                          const char* path);
NCOTA_API ncota_status ncota_problem_to_json(const ncota_problem* problem,
                                             char** out);
NCOTA_API void ncota_problem_free(ncota_problem* problem);

/* Mixing spectrum, theorem constants, conditions and bounds at each k. */
NCOTA_API ncota_status ncota_analyze(const ncota_deployment* dep,
                                     const ncota_problem* problem, double eta,
                                     double gamma, const uint64_t* ks,
                                     size_t n_ks, char** report_json);

/* Experiments driven by a flat JSON config. */
NCOTA_API ncota_status ncota_config_normalize(const char* config_json,
                                              char** out);
NCOTA_API ncota_status ncota_run(const char* config_json, ncota_result** out);
/* Like ncota_run, then the corollary schedule at every schedule_ks entry. */
NCOTA_API ncota_status ncota_run_scaling(const char* config_json,
                                         ncota_result** out);
NCOTA_API ncota_status ncota_result_metrics_csv(const ncota_result* result,
                                                char** out);
NCOTA_API ncota_status ncota_result_envelope_csv(const ncota_result* result,
                                                 char** out);
NCOTA_API ncota_status ncota_result_report_json(const ncota_result* result,
                                                char** out);
NCOTA_API ncota_status ncota_result_scaling_csv(const ncota_result* result,
                                                char** out);
NCOTA_API void ncota_result_free(ncota_result* result);

/* Fits error ~ scale * (K + delta)^slope. */
NCOTA_API ncota_status ncota_fit_scaling(const double* ks,
                                         const double* errors, size_t n,
                                         double* slope, double* delta,
                                         double* scale, int* degenerate);
/* Same, reading K and opt_error columns from CSV text; emits JSON. */
NCOTA_API ncota_status ncota_fit_scaling_csv(const char* csv_text,
                                             char** fit_json);

#ifdef __cplusplus
}
#endif

#endif /* NCOTA_NCOTA_H_ */
