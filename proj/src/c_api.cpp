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

#include "ncota/ncota.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "ncota/analysis.hpp"
#include "ncota/channel.hpp"
#include "ncota/error.hpp"
#include "ncota/harness.hpp"
#include "ncota/problem.hpp"

struct ncota_deployment {
  ncota::Deployment value;
};

struct ncota_problem {
  ncota::ProblemSpec value;
};

struct ncota_result {
  ncota::Scenario scenario;
  ncota::ExperimentResult experiment;
  std::optional<std::vector<ncota::ScalingPoint>> scaling;
};

namespace {

thread_local std::string last_error;

ncota_status ToStatus(ncota::ErrorCode code) {
  switch (code) {
    case ncota::ErrorCode::kInvalidArgument: return NCOTA_ERR_INVALID_ARGUMENT;
    case ncota::ErrorCode::kInvalidConfig: return NCOTA_ERR_INVALID_CONFIG;
    case ncota::ErrorCode::kHalfDuplexViolation: return NCOTA_ERR_HALF_DUPLEX;
    case ncota::ErrorCode::kNonFinite: return NCOTA_ERR_NON_FINITE;
    case ncota::ErrorCode::kNotConverged: return NCOTA_ERR_NOT_CONVERGED;
    case ncota::ErrorCode::kIo: return NCOTA_ERR_IO;
    case ncota::ErrorCode::kParse: return NCOTA_ERR_PARSE;
  }
  return NCOTA_ERR_INTERNAL;
}

template <typename Fn>
ncota_status Guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return NCOTA_OK;
  } catch (const ncota::Error& e) {
    last_error = e.what();
    return ToStatus(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return NCOTA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return NCOTA_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return NCOTA_ERR_INTERNAL;
  }
}

void NotNull(const void* p, const char* what) {
  ncota::Require(p != nullptr, ncota::ErrorCode::kInvalidArgument,
                 std::string(what) + " must not be null");
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string ReadFile(const char* path) {
  std::ifstream in(path, std::ios::binary);
  ncota::Require(in.good(), ncota::ErrorCode::kIo,
                 std::string("cannot open ") + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const char* path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  ncota::Require(out.good(), ncota::ErrorCode::kIo,
                 std::string("cannot write ") + path);
  out << text << '\n';
  ncota::Require(out.good(), ncota::ErrorCode::kIo,
                 std::string("failed writing ") + path);
}

ncota_status RunImpl(const char* config_json, bool scaling,
                     ncota_result** out) {
  return Guard([&] {
    NotNull(config_json, "config");
    NotNull(out, "out");
    const ncota::ExperimentConfig config = ncota::ConfigFromJson(config_json);
    auto* r = new ncota_result{ncota::BuildScenario(config), {}, std::nullopt};
    try {
      r->experiment = ncota::RunExperiment(config, r->scenario);
      if (scaling && !config.schedule_ks.empty()) {
        r->scaling = ncota::RunScalingStudy(config, r->scenario);
      }
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
  });
}

}  // namespace

extern "C" {

const char* ncota_version(void) { return "0.1.0"; }

const char* ncota_last_error(void) { return last_error.c_str(); }

const char* ncota_status_name(ncota_status status) {
  switch (status) {
    case NCOTA_OK: return "ok";
    case NCOTA_ERR_INTERNAL: return "internal error";
    default:
      return ncota::ErrorCodeName(static_cast<ncota::ErrorCode>(status));
  }
}

void ncota_string_free(char* s) { std::free(s); }

ncota_status ncota_deployment_generate(size_t n, double radius_m,
                                       uint64_t seed, ncota_deployment** out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = new ncota_deployment{ncota::BuildDeployment(n, radius_m, seed, {})};
  });
}

ncota_status ncota_deployment_from_json(const char* json,
                                        ncota_deployment** out) {
  return Guard([&] {
    NotNull(json, "json");
    NotNull(out, "out");
    *out = new ncota_deployment{ncota::DeploymentFromJson(json)};
  });
}

ncota_status ncota_deployment_load(const char* path, ncota_deployment** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new ncota_deployment{ncota::DeploymentFromJson(ReadFile(path))};
  });
}

ncota_status ncota_deployment_save(const ncota_deployment* dep,
                                   const char* path) {
  return Guard([&] {
    NotNull(dep, "deployment");
    NotNull(path, "path");
    WriteFile(path, ncota::DeploymentToJson(dep->value));
  });
}

ncota_status ncota_deployment_to_json(const ncota_deployment* dep,
                                      char** out) {
  return Guard([&] {
    NotNull(dep, "deployment");
    NotNull(out, "out");
    *out = Dup(ncota::DeploymentToJson(dep->value));
  });
}

ncota_status ncota_deployment_size(const ncota_deployment* dep, size_t* out) {
  return Guard([&] {
    NotNull(dep, "deployment");
    NotNull(out, "out");
    *out = dep->value.size();
  });
}

ncota_status ncota_deployment_lambda_star(const ncota_deployment* dep,
                                          double* out) {
  return Guard([&] {
    NotNull(dep, "deployment");
    NotNull(out, "out");
    *out = dep->value.lambda_star();
  });
}

void ncota_deployment_free(ncota_deployment* dep) { delete dep; }

ncota_status ncota_problem_synthesize(size_t n, size_t dim, uint64_t seed,
                                      size_t n_test, ncota_problem** out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = new ncota_problem{ncota::SynthesizeDataset(n, dim, seed, n_test)};
  });
}

ncota_status ncota_problem_load_idx(const char* images_path,
                                    const char* labels_path, size_t n,
                                    size_t dim, size_t n_test, uint64_t seed,
                                    ncota_problem** out) {
  return Guard([&] {
    NotNull(images_path, "images path");
    NotNull(labels_path, "labels path");
    NotNull(out, "out");
    *out = new ncota_problem{
        ncota::IngestIdx(images_path, labels_path, n, dim, n_test, seed)};
  });
}

ncota_status ncota_problem_load(const char* path, ncota_problem** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new ncota_problem{ncota::ProblemFromJson(ReadFile(path))};
  });
}

ncota_status ncota_problem_save(const ncota_problem* problem,
                                const char* path) {
  return Guard([&] {
    NotNull(problem, "problem");
    NotNull(path, "path");
    WriteFile(path, ncota::ProblemToJson(problem->value));
  });
}

ncota_status ncota_problem_to_json(const ncota_problem* problem, char** out) {
  return Guard([&] {
    NotNull(problem, "problem");
    NotNull(out, "out");
    *out = Dup(ncota::ProblemToJson(problem->value));
  });
}

void ncota_problem_free(ncota_problem* problem) { delete problem; }

ncota_status ncota_analyze(const ncota_deployment* dep,
                           const ncota_problem* problem, double eta,
                           double gamma, const uint64_t* ks, size_t n_ks,
                           char** report_json) {
  return Guard([&] {
    NotNull(dep, "deployment");
    NotNull(problem, "problem");
    NotNull(report_json, "out");
    ncota::Require(n_ks == 0 || ks != nullptr,
                   ncota::ErrorCode::kInvalidArgument, "ks must not be null");
    ncota::Require(problem->value.num_nodes() == dep->value.size(),
                   ncota::ErrorCode::kInvalidArgument,
                   "problem and deployment disagree on the node count");
    const ncota::Stepsizes steps{gamma, eta};
    steps.Validate();
    const ncota::LogisticProblem objective(problem->value);
    const double radius = objective.radius();
    const ncota::Optimum optimum = ncota::SolveCentralized(objective, radius);
    const ncota::MixingSpectrum spectrum =
        ncota::ComputeMixingSpectrum(dep->value);
    const ncota::TheoremConstants consts = ncota::ComputeTheoremConstants(
        spectrum, dep->value, objective, optimum, radius);
    const std::vector<std::uint64_t> k_list(ks, ks + n_ks);
    *report_json = Dup(ncota::AnalysisReportJson(consts, steps, k_list));
  });
}

ncota_status ncota_config_normalize(const char* config_json, char** out) {
  return Guard([&] {
    NotNull(config_json, "config");
    NotNull(out, "out");
    *out = Dup(ncota::ConfigToJson(ncota::ConfigFromJson(config_json)));
  });
}

ncota_status ncota_run(const char* config_json, ncota_result** out) {
  return RunImpl(config_json, false, out);
}

ncota_status ncota_run_scaling(const char* config_json, ncota_result** out) {
  return RunImpl(config_json, true, out);
}

ncota_status ncota_result_metrics_csv(const ncota_result* result, char** out) {
  return Guard([&] {
    NotNull(result, "result");
    NotNull(out, "out");
    *out = Dup(result->experiment.MetricsCsv());
  });
}

ncota_status ncota_result_envelope_csv(const ncota_result* result,
                                       char** out) {
  return Guard([&] {
    NotNull(result, "result");
    NotNull(out, "out");
    const auto envelope =
        ncota::BestEnvelope(ncota::OptErrorCurves(result->experiment));
    *out = Dup(ncota::EnvelopeCsv(result->experiment, envelope));
  });
}

ncota_status ncota_result_report_json(const ncota_result* result, char** out) {
  return Guard([&] {
    NotNull(result, "result");
    NotNull(out, "out");
    *out = Dup(ncota::ExperimentReportJson(result->experiment,
                                           result->scenario));
  });
}

ncota_status ncota_result_scaling_csv(const ncota_result* result, char** out) {
  return Guard([&] {
    NotNull(result, "result");
    NotNull(out, "out");
    ncota::Require(result->scaling.has_value(),
                   ncota::ErrorCode::kInvalidArgument,
                   "result holds no scaling study");
    *out = Dup(ncota::ScalingCsv(*result->scaling));
  });
}

void ncota_result_free(ncota_result* result) { delete result; }

ncota_status ncota_fit_scaling(const double* ks, const double* errors,
                               size_t n, double* slope, double* delta,
                               double* scale, int* degenerate) {
  return Guard([&] {
    NotNull(ks, "ks");
    NotNull(errors, "errors");
    const ncota::ScalingFit fit = ncota::FitScaling(
        std::vector<double>(ks, ks + n), std::vector<double>(errors, errors + n));
    if (slope) *slope = fit.slope;
    if (delta) *delta = fit.delta;
    if (scale) *scale = fit.scale;
    if (degenerate) *degenerate = fit.degenerate ? 1 : 0;
  });
}

ncota_status ncota_fit_scaling_csv(const char* csv_text, char** fit_json) {
  return Guard([&] {
    NotNull(csv_text, "csv");
    NotNull(fit_json, "out");
    const auto [ks, errors] = ncota::ReadScalingCsv(csv_text);
    const ncota::ScalingFit fit = ncota::FitScaling(ks, errors);
    const nlohmann::json j = {{"slope", fit.slope},
                              {"delta", fit.delta},
                              {"scale", fit.scale},
                              {"residual", fit.residual},
                              {"degenerate", fit.degenerate},
                              {"points", ks.size()}};
    *fit_json = Dup(j.dump(2));
  });
}

}  // extern "C"
