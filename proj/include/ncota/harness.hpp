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

#ifndef NCOTA_HARNESS_HPP_
#define NCOTA_HARNESS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncota/analysis.hpp"
#include "ncota/baselines.hpp"
#include "ncota/channel.hpp"
#include "ncota/codec.hpp"
#include "ncota/problem.hpp"

namespace ncota {

enum class Algorithm { kNcota, kOd, kOa, kDgdRef };

const char* AlgorithmName(Algorithm algo);
Algorithm ParseAlgorithm(const std::string& name);

// Flat experiment description; serialized as a flat JSON object with the
// same field names.
struct ExperimentConfig {
  // "synthetic", "idx" or "json" (a saved problem).
  std::string problem = "synthetic";
  std::string idx_images;
  std::string idx_labels;
  std::string problem_path;
  // Optional saved deployment; otherwise one is drawn from `seed`.
  std::string deployment_path;

  std::size_t n_nodes = 200;
  std::size_t dim = 50;
  std::size_t n_test = 200;
  double synthetic_noise = 0.5;
  double r_min = 1.0;
  double region_radius_m = 3000.0;
  RadioConstants radio;

  Algorithm algo = Algorithm::kNcota;
  ChannelBackend backend = ChannelBackend::kFaded;
  std::vector<double> etas = {0.1};
  std::vector<double> gammas = {1e9};

  // Corollary schedule instead of the grid when schedule_k > 0.
  std::uint64_t schedule_k = 0;
  double schedule_epsilon = 0.0;
  double schedule_a = 1.0;
  double schedule_b = 1.0;
  // Scaling study: one schedule per K (used by `sweep`).
  std::vector<std::uint64_t> schedule_ks;

  std::size_t trials = 10;
  std::uint64_t frames = 1000;
  std::uint64_t seed = 1;
  std::string out = "out";
  double metric_growth = 1.3;

  // OD-DGD link parameters; the rate defaults to ChooseRate().
  std::optional<double> od_rate;
  double od_target_prob = 0.9;
  double od_radius_m = 500.0;
  int quantizer_levels = 9;

  double solver_tol = 1e-10;
  // Worker cap; 0 defers to NCOTA_SIM_THREADS (0 there = hardware).
  std::size_t threads = 0;

  void Validate() const;
};

ExperimentConfig ConfigFromJson(const std::string& text);
std::string ConfigToJson(const ExperimentConfig& config);

// Everything an experiment needs that does not change across trials.
struct Scenario {
  Deployment deployment;
  LogisticProblem problem;
  Optimum optimum;
  MixingSpectrum spectrum;
};

Scenario BuildScenario(const ExperimentConfig& config);

// Seconds of channel time per frame.
double FrameDuration(Algorithm algo, const Scenario& scenario,
                     const ExperimentConfig& config);
// Rate actually used by OD-DGD under `config`.
double OdRate(const Scenario& scenario, const ExperimentConfig& config);

// 0, 1, 2, ... growing geometrically by `growth`, always ending at `frames`.
std::vector<std::uint64_t> GeometricFrameGrid(std::uint64_t frames,
                                              double growth);

struct TrialResult {
  // Per sample frame: (1/N) sum_i ||w_i - w*||^2 and (1/N) sum_i TEST_i.
  std::vector<double> mean_square_error;
  std::vector<double> test_error;
  std::optional<std::uint64_t> diverged_at;
};

struct GridPointResult {
  Stepsizes steps;
  std::uint64_t frames = 0;
  std::vector<std::uint64_t> sample_frames;
  std::vector<TrialResult> trials;
  // Over non-divergent trials: sqrt of mean MSE, mean test error.
  std::vector<double> opt_error;
  std::vector<double> test_error;
  std::size_t diverged_trials = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  Algorithm algo = Algorithm::kNcota;
  double frame_duration = 0.0;
  double od_rate = 0.0;
  std::vector<GridPointResult> points;

  // Columns: algo,eta,gamma,trial,frame,sim_time_s,opt_error,test_error.
  // Per-trial rows carry the trial index; trial "mean" rows hold the
  // trial-averaged metrics.
  std::string MetricsCsv() const;
};

// Stepsize pairs explored by `config`: the schedule, or the eta x gamma grid
// (eta only for algorithms without a consensus stepsize).
std::vector<Stepsizes> StepsizeGrid(const ExperimentConfig& config);

ExperimentResult RunExperiment(const ExperimentConfig& config);
ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const Scenario& scenario);

std::string ExperimentReportJson(const ExperimentResult& result,
                                 const Scenario& scenario);

struct Curve {
  Stepsizes steps;
  std::vector<std::uint64_t> frames;
  std::vector<double> times;
  std::vector<double> values;
};

struct EnvelopePoint {
  std::uint64_t frame = 0;
  double time = 0.0;
  double value = 0.0;
  Stepsizes steps;
  std::size_t index = 0;  // argmin curve
};

// Pointwise minimum over curves sampled on a common frame grid. NaN samples
// never win; a sample where every curve is NaN is dropped.
std::vector<EnvelopePoint> BestEnvelope(const std::vector<Curve>& curves);

std::vector<Curve> OptErrorCurves(const ExperimentResult& result);
std::string EnvelopeCsv(const ExperimentResult& result,
                        const std::vector<EnvelopePoint>& envelope);

struct ScalingPoint {
  std::uint64_t K = 0;
  Stepsizes steps;
  double opt_error = 0.0;
  double test_error = 0.0;
  std::size_t diverged_trials = 0;
};

// Runs the corollary schedule for each K in `config.schedule_ks` and
// records the final optimality error.
std::vector<ScalingPoint> RunScalingStudy(const ExperimentConfig& config,
                                          const Scenario& scenario);
std::string ScalingCsv(const std::vector<ScalingPoint>& points);

struct ScalingFit {
  double slope = 0.0;
  double delta = 0.0;
  double scale = 0.0;
  double residual = 0.0;  // RMS in log space
  bool degenerate = false;
};

// Least squares of log(error) on log(K + delta), delta >= 0 fitted.
ScalingFit FitScaling(const std::vector<double>& ks,
                      const std::vector<double>& errors);

// Reads `K` and `opt_error` columns from a CSV with a header row.
std::pair<std::vector<double>, std::vector<double>> ReadScalingCsv(
    const std::string& text);

std::size_t ResolveThreadCount(std::size_t requested);

}  // namespace ncota

#endif  // NCOTA_HARNESS_HPP_
