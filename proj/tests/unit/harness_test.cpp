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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncota/error.hpp"
#include "ncota/harness.hpp"

namespace ncota {
namespace {

ExperimentConfig Tiny(Algorithm algo) {
  ExperimentConfig c;
  c.n_nodes = 6;
  c.dim = 4;
  c.n_test = 20;
  c.frames = 200;
  c.trials = 2;
  c.algo = algo;
  c.etas = {0.5};
  c.gammas = {1e8};
  c.seed = 3;
  c.threads = 1;
  return c;
}

std::string WriteTemp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

TEST_CASE("reference DGD on identical local data converges to the optimum") {
  // Every node holds the same sample, so grad f_i(w*) = 0 for all i.
  const Scenario base = BuildScenario(Tiny(Algorithm::kDgdRef));
  ProblemSpec spec = base.problem.spec();
  for (Eigen::Index i = 1; i < spec.train.features.cols(); ++i) {
    spec.train.features.col(i) = spec.train.features.col(0);
    spec.train.labels[static_cast<std::size_t>(i)] = spec.train.labels[0];
  }
  ExperimentConfig c = Tiny(Algorithm::kDgdRef);
  c.problem = "json";
  c.problem_path = WriteTemp("ncota_identical_problem.json", ProblemToJson(spec));
  c.etas = {0.5 * 2.0 / (0.01 + 0.26)};
  c.frames = 3000;
  c.trials = 1;
  c.solver_tol = 1e-12;
  const ExperimentResult r = RunExperiment(c);
  const auto& err = r.points[0].opt_error;
  for (std::size_t k = 1; k < err.size(); ++k) {
    if (err[k - 1] > 1e-9) CHECK(err[k] < err[k - 1]);
  }
  CHECK(err.back() <= 1e-8);
}

TEST_CASE("frozen NCOTA keeps the initial error") {
  ExperimentConfig c = Tiny(Algorithm::kNcota);
  c.etas = {0.0};
  c.gammas = {0.0};
  const ExperimentResult r = RunExperiment(c);
  const auto& err = r.points[0].opt_error;
  for (double e : err) CHECK(e == err.front());
  CHECK(err.front() == doctest::Approx(BuildScenario(c).optimum.w_star.norm()));
}

TEST_CASE("runs are deterministic and thread-count independent") {
  for (Algorithm algo : {Algorithm::kNcota, Algorithm::kOd, Algorithm::kOa}) {
    ExperimentConfig c = Tiny(algo);
    c.frames = 30;
    c.trials = 3;
    c.etas = {0.1, 0.3};
    const std::string first = RunExperiment(c).MetricsCsv();
    CHECK(first == RunExperiment(c).MetricsCsv());
    c.threads = 3;
    CHECK(first == RunExperiment(c).MetricsCsv());
    c.seed = 4;
    CHECK(first != RunExperiment(c).MetricsCsv());
  }
}

TEST_CASE("metrics CSV layout") {
  ExperimentConfig c = Tiny(Algorithm::kNcota);
  c.frames = 10;
  c.metric_growth = 2.0;
  const ExperimentResult r = RunExperiment(c);
  const std::string csv = r.MetricsCsv();
  CHECK(csv.rfind("algo,eta,gamma,trial,frame,sim_time_s,opt_error,test_error\n", 0) == 0);
  const auto& frames = r.points[0].sample_frames;
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 1 + frames.size() * (c.trials + 1));
  CHECK(csv.find("ncota,0.5,100000000,mean,10,") != std::string::npos);
  CHECK(r.frame_duration == doctest::Approx(10e-6));
}

TEST_CASE("stepsize grid") {
  ExperimentConfig c = Tiny(Algorithm::kNcota);
  c.etas = {0.1, 0.2};
  c.gammas = {1.0, 2.0, 3.0};
  CHECK(StepsizeGrid(c).size() == 6);
  c.algo = Algorithm::kOd;
  CHECK(StepsizeGrid(c).size() == 2);
  c.algo = Algorithm::kNcota;
  c.schedule_k = 16;
  const auto grid = StepsizeGrid(c);
  REQUIRE(grid.size() == 1);
  CHECK(grid[0].eta == doctest::Approx(1.0 / 16.0));
  CHECK(grid[0].gamma == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("geometric frame grid") {
  const auto grid = GeometricFrameGrid(1000, 1.3);
  CHECK(grid.front() == 0);
  CHECK(grid[1] == 1);
  CHECK(grid.back() == 1000);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  CHECK(grid.size() < 40);
  CHECK(GeometricFrameGrid(0, 1.3) == std::vector<std::uint64_t>{0});
}

TEST_CASE("best envelope") {
  Curve a{{1.0, 0.1}, {0, 1, 2, 3}, {0, 1, 2, 3}, {4.0, 3.0, 2.0, 1.0}};
  Curve b{{2.0, 0.2}, {0, 1, 2, 3}, {0, 1, 2, 3}, {1.0, 2.0, 3.0, 4.0}};
  const auto single = BestEnvelope({a});
  REQUIRE(single.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) CHECK(single[k].value == a.values[k]);

  const auto both = BestEnvelope({a, b});
  REQUIRE(both.size() == 4);
  CHECK(both[0].index == 1);
  CHECK(both[1].index == 1);
  CHECK(both[2].index == 0);
  CHECK(both[3].index == 0);
  CHECK(both[2].steps.gamma == 1.0);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(both[k].value <= a.values[k]);
    CHECK(both[k].value <= b.values[k]);
  }

  Curve nan = a;
  nan.values = {NAN, NAN, 0.5, NAN};
  const auto mixed = BestEnvelope({nan, b});
  CHECK(mixed[0].index == 1);
  CHECK(mixed[2].value == 0.5);
  const auto dropped = BestEnvelope({nan});
  REQUIRE(dropped.size() == 1);
  CHECK(dropped[0].frame == 2);
}

TEST_CASE("envelope of a real sweep") {
  ExperimentConfig c = Tiny(Algorithm::kOa);
  c.etas = {0.05, 0.5, 2.0};
  c.frames = 50;
  const ExperimentResult r = RunExperiment(c);
  const auto curves = OptErrorCurves(r);
  REQUIRE(curves.size() == 3);
  const auto env = BestEnvelope(curves);
  for (std::size_t k = 0; k < env.size(); ++k) {
    for (const Curve& curve : curves) CHECK(env[k].value <= curve.values[k]);
  }
  const std::string csv = EnvelopeCsv(r, env);
  CHECK(csv.rfind("algo,frame,sim_time_s,opt_error,test_error,eta,gamma\n", 0) == 0);
}

TEST_CASE("scaling fit") {
  std::vector<double> ks;
  std::vector<double> ys;
  for (double k : {1024.0, 2048.0, 4096.0, 8192.0, 16384.0}) {
    ks.push_back(k);
    ys.push_back(std::pow(k + 100.0, -0.25));
  }
  const ScalingFit fit = FitScaling(ks, ys);
  CHECK(fit.slope == doctest::Approx(-0.25).epsilon(1e-6));
  CHECK(std::abs(fit.slope + 0.25) <= 1e-6);
  CHECK(fit.delta == doctest::Approx(100.0).epsilon(1e-3));
  CHECK(fit.scale == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_FALSE(fit.degenerate);

  const ScalingFit flat = FitScaling(ks, std::vector<double>(5, 0.3));
  CHECK(flat.degenerate);
  CHECK(flat.slope == 0.0);
  CHECK_THROWS_AS(FitScaling({1, 2, 3}, {1, 1, 1}), Error);
  CHECK_THROWS_AS(FitScaling({1, 2, 3, 3}, {1, 0.9, 0.8, 0.7}), Error);
  CHECK_THROWS_AS(FitScaling({1, 2, 3, 4}, {1, 0.9, -0.8, 0.7}), Error);

  const auto [k2, y2] =
      ReadScalingCsv("K,eta,gamma,opt_error,test_error,diverged_trials\n10,1,1,0.5,0.1,0\n20,1,1,0.25,0.1,0\n");
  CHECK(k2 == std::vector<double>{10, 20});
  CHECK(y2 == std::vector<double>{0.5, 0.25});
  CHECK_THROWS_AS(ReadScalingCsv("a,b\n1,2\n"), Error);
}

TEST_CASE("scaling study") {
  ExperimentConfig c = Tiny(Algorithm::kNcota);
  c.schedule_ks = {8, 16, 32, 64};
  c.schedule_a = 1.0;
  c.schedule_b = 1.0 / BuildScenario(c).spectrum.lambda_star;
  c.trials = 1;
  const Scenario s = BuildScenario(c);
  const auto points = RunScalingStudy(c, s);
  REQUIRE(points.size() == 4);
  CHECK(points[1].K == 16);
  CHECK(points[1].steps.eta == doctest::Approx(1.0 / 16.0));
  const std::string csv = ScalingCsv(points);
  CHECK(csv.rfind("K,eta,gamma,opt_error,test_error,diverged_trials\n", 0) == 0);
  CHECK(ReadScalingCsv(csv).first.size() == 4);
}

TEST_CASE("config JSON") {
  ExperimentConfig c = Tiny(Algorithm::kOd);
  c.od_rate = 2.0;
  c.schedule_ks = {10, 20};
  const ExperimentConfig back = ConfigFromJson(ConfigToJson(c));
  CHECK(ConfigToJson(back) == ConfigToJson(c));
  CHECK(back.algo == Algorithm::kOd);
  CHECK(back.od_rate.value() == 2.0);
  const auto j = nlohmann::json::parse(ConfigToJson(Tiny(Algorithm::kNcota)));
  CHECK(j.is_object());
  CHECK(j["od_rate"].is_null());
  for (const auto& [key, value] : j.items()) CHECK_FALSE(value.is_object());

  CHECK_THROWS_AS(ConfigFromJson("{\"n_nodse\": 4}"), Error);
  CHECK_THROWS_AS(ConfigFromJson("{\"trials\": 0}"), Error);
  CHECK_THROWS_AS(ConfigFromJson("{\"algo\": \"gossip\"}"), Error);
  CHECK_THROWS_AS(ConfigFromJson("{\"etas\": []}"), Error);
  CHECK_THROWS_AS(ConfigFromJson("{\"algo\": \"oa\", \"dim\": 5}"), Error);
  CHECK_THROWS_AS(ConfigFromJson("{not json"), Error);
  CHECK_THROWS_AS(ConfigFromJson("{\"trials\": -1}"), Error);
  CHECK_THROWS_AS(ConfigFromJson("{\"schedule_ks\": [16, -2, 64, 128]}"), Error);
  CHECK_THROWS_AS(ConfigFromJson("{\"frames\": 2.5}"), Error);
}

TEST_CASE("experiment report") {
  ExperimentConfig c = Tiny(Algorithm::kOd);
  c.frames = 20;
  const Scenario s = BuildScenario(c);
  const ExperimentResult r = RunExperiment(c, s);
  const auto j = nlohmann::json::parse(ExperimentReportJson(r, s));
  CHECK(j["seed"].get<int>() == 3);
  CHECK(j["algo"].get<std::string>() == "od");
  CHECK(j.contains("od_rate"));
  CHECK(j["points"].size() == 1);
  CHECK(j["points"][0]["sim_elapsed_s"].get<double>() ==
        doctest::Approx(20 * r.frame_duration));
  CHECK(r.frame_duration == doctest::Approx(FrameDuration(Algorithm::kOd, s, c)));
}

TEST_CASE("frame durations at the reference constants") {
  ExperimentConfig c;
  c.n_nodes = 200;
  c.dim = 50;
  c.frames = 1;
  const Scenario s = BuildScenario(c);
  CHECK(FrameDuration(Algorithm::kNcota, s, c) == doctest::Approx(102e-6));
  CHECK(FrameDuration(Algorithm::kOa, s, c) == doctest::Approx(5.4e-3));
  c.od_rate = 2.0;
  CHECK(FrameDuration(Algorithm::kOd, s, c) == doctest::Approx(22.4e-3));
}

TEST_CASE("thread count resolution") {
  CHECK(ResolveThreadCount(3) == 3);
  ::setenv("NCOTA_SIM_THREADS", "5", 1);
  CHECK(ResolveThreadCount(0) == 5);
  CHECK(ResolveThreadCount(2) == 2);
  ::setenv("NCOTA_SIM_THREADS", "0", 1);
  CHECK(ResolveThreadCount(0) >= 1);
  ::setenv("NCOTA_SIM_THREADS", "many", 1);
  CHECK_THROWS_AS(ResolveThreadCount(0), Error);
  ::unsetenv("NCOTA_SIM_THREADS");
  CHECK(ResolveThreadCount(0) >= 1);
}

TEST_CASE("algorithm and backend names") {
  for (Algorithm a : {Algorithm::kNcota, Algorithm::kOd, Algorithm::kOa, Algorithm::kDgdRef}) {
    CHECK(ParseAlgorithm(AlgorithmName(a)) == a);
  }
  CHECK(std::string(AlgorithmName(Algorithm::kDgdRef)) == "dgd-ref");
  CHECK_THROWS_AS(ParseAlgorithm("sgd"), Error);
  CHECK(ParseBackend("idealized") == ChannelBackend::kIdealized);
}

}  // namespace
}  // namespace ncota
