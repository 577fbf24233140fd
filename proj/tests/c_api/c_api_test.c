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

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "ncota/ncota.h"

static int failures = 0;

#define EXPECT(cond)                                             \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                \
    }                                                            \
  } while (0)

static void TestDeployment(void) {
  ncota_deployment* dep = NULL;
  EXPECT(ncota_deployment_generate(20, 3000.0, 7, &dep) == NCOTA_OK);
  size_t n = 0;
  EXPECT(ncota_deployment_size(dep, &n) == NCOTA_OK && n == 20);
  double lambda_star = 0.0;
  EXPECT(ncota_deployment_lambda_star(dep, &lambda_star) == NCOTA_OK);
  EXPECT(lambda_star > 0.0);

  char* json = NULL;
  EXPECT(ncota_deployment_to_json(dep, &json) == NCOTA_OK);
  ncota_deployment* back = NULL;
  EXPECT(ncota_deployment_from_json(json, &back) == NCOTA_OK);
  char* again = NULL;
  EXPECT(ncota_deployment_to_json(back, &again) == NCOTA_OK);
  EXPECT(strcmp(json, again) == 0);
  ncota_string_free(json);
  ncota_string_free(again);
  ncota_deployment_free(back);
  ncota_deployment_free(dep);

  EXPECT(ncota_deployment_generate(1, 3000.0, 7, &dep) != NCOTA_OK);
  EXPECT(strlen(ncota_last_error()) > 0);
  EXPECT(ncota_deployment_from_json("{", &dep) == NCOTA_ERR_PARSE);
  EXPECT(ncota_deployment_load("/nonexistent/dep.json", &dep) == NCOTA_ERR_IO);
  EXPECT(ncota_deployment_size(NULL, &n) == NCOTA_ERR_INVALID_ARGUMENT);
}

static void TestAnalyze(void) {
  ncota_deployment* dep = NULL;
  ncota_problem* prob = NULL;
  EXPECT(ncota_deployment_generate(8, 1000.0, 2, &dep) == NCOTA_OK);
  EXPECT(ncota_problem_synthesize(8, 4, 2, 20, &prob) == NCOTA_OK);
  const uint64_t ks[2] = {100, 1000};
  char* report = NULL;
  EXPECT(ncota_analyze(dep, prob, 0.1, 1e9, ks, 2, &report) == NCOTA_OK);
  EXPECT(report != NULL && strstr(report, "\"rho2_below_one\"") != NULL);
  ncota_string_free(report);

  ncota_problem* wrong = NULL;
  EXPECT(ncota_problem_synthesize(9, 4, 2, 20, &wrong) == NCOTA_OK);
  EXPECT(ncota_analyze(dep, wrong, 0.1, 1e9, ks, 2, &report) != NCOTA_OK);
  ncota_problem_free(wrong);
  ncota_problem_free(prob);
  ncota_deployment_free(dep);
}

static void TestRun(void) {
  const char* config =
      "{\"n_nodes\": 6, \"dim\": 4, \"n_test\": 20, \"frames\": 20, "
      "\"trials\": 2, \"etas\": [0.1], \"gammas\": [1e8], \"threads\": 1}";
  ncota_result* result = NULL;
  EXPECT(ncota_run(config, &result) == NCOTA_OK);
  char* csv = NULL;
  EXPECT(ncota_result_metrics_csv(result, &csv) == NCOTA_OK);
  EXPECT(strncmp(csv, "algo,eta,gamma,trial,frame", 26) == 0);
  char* env = NULL;
  EXPECT(ncota_result_envelope_csv(result, &env) == NCOTA_OK);
  char* report = NULL;
  EXPECT(ncota_result_report_json(result, &report) == NCOTA_OK);
  EXPECT(strstr(report, "\"seed\"") != NULL);
  char* scaling = NULL;
  EXPECT(ncota_result_scaling_csv(result, &scaling) != NCOTA_OK);

  ncota_result* second = NULL;
  EXPECT(ncota_run(config, &second) == NCOTA_OK);
  char* csv2 = NULL;
  EXPECT(ncota_result_metrics_csv(second, &csv2) == NCOTA_OK);
  EXPECT(strcmp(csv, csv2) == 0);

  ncota_string_free(csv);
  ncota_string_free(csv2);
  ncota_string_free(env);
  ncota_string_free(report);
  ncota_result_free(result);
  ncota_result_free(second);

  char* normalized = NULL;
  EXPECT(ncota_config_normalize("{\"trials\": 3}", &normalized) == NCOTA_OK);
  EXPECT(strstr(normalized, "\"trials\":3") != NULL ||
         strstr(normalized, "\"trials\": 3") != NULL);
  ncota_string_free(normalized);
  EXPECT(ncota_run("{\"bogus\": 1}", &result) == NCOTA_ERR_PARSE);
  EXPECT(ncota_run("{\"trials\": 0}", &result) == NCOTA_ERR_INVALID_CONFIG);
}

static void TestFit(void) {
  double ks[5] = {1024, 2048, 4096, 8192, 16384};
  double ys[5];
  for (int i = 0; i < 5; ++i) ys[i] = pow(ks[i] + 100.0, -0.25);
  double slope = 0.0, delta = 0.0, scale = 0.0;
  int degenerate = 1;
  EXPECT(ncota_fit_scaling(ks, ys, 5, &slope, &delta, &scale, &degenerate) ==
         NCOTA_OK);
  EXPECT(fabs(slope + 0.25) <= 1e-6);
  EXPECT(degenerate == 0);
  EXPECT(ncota_fit_scaling(ks, ys, 3, &slope, &delta, &scale, &degenerate) ==
         NCOTA_ERR_INVALID_ARGUMENT);
  char* fit = NULL;
  EXPECT(ncota_fit_scaling_csv("K,opt_error\n1,1\n2,0.84\n4,0.71\n8,0.59\n",
                               &fit) == NCOTA_OK);
  EXPECT(strstr(fit, "\"slope\"") != NULL);
  ncota_string_free(fit);
}

int main(void) {
  EXPECT(strlen(ncota_version()) > 0);
  EXPECT(strcmp(ncota_status_name(NCOTA_ERR_HALF_DUPLEX), "") != 0);
  TestDeployment();
  TestAnalyze();
  TestRun();
  TestFit();
  if (failures == 0) printf("c api: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
