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

#include "ncota/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "ncota/error.hpp"
#include "ncota/node.hpp"
#include "ncota/rng.hpp"

namespace ncota {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs fn(0..count-1) on up to `threads` workers. Rethrows the first
// exception after all workers stop.
template <typename Fn>
void ParallelFor(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

// Per-algorithm state shared by every trial.
struct AlgorithmContext {
  Algorithm algo;
  ChannelBackend backend;
  Codebook codebook;
  std::optional<DigitalLinkConfig> link;
  Matrix omega;
};

AlgorithmContext MakeContext(const ExperimentConfig& config,
                             const Scenario& scenario) {
  AlgorithmContext ctx{config.algo, config.backend,
                       Codebook(scenario.problem.dim(), scenario.problem.radius()),
                       std::nullopt, Matrix()};
  if (config.algo == Algorithm::kOd) {
    QuantizerConfig q;
    q.levels = config.quantizer_levels;
    ctx.link = DigitalLinkConfig::ForDeployment(scenario.deployment,
                                                OdRate(scenario, config), q);
  }
  if (config.algo == Algorithm::kDgdRef) ctx.omega = scenario.spectrum.omega;
  return ctx;
}

std::vector<NodeState> Advance(const AlgorithmContext& ctx,
                               const Scenario& scenario,
                               const std::vector<NodeState>& states,
                               const Stepsizes& steps,
                               const StreamFactory& streams,
                               std::uint64_t frame) {
  const double radius = scenario.problem.radius();
  switch (ctx.algo) {
    case Algorithm::kNcota:
      return RunFrame(states, scenario.deployment, scenario.problem,
                      ctx.codebook, steps, ctx.backend, streams, frame);
    case Algorithm::kOd:
      return OdDgdFrame(states, scenario.deployment, *ctx.link, steps.eta,
                        scenario.problem, radius, ctx.backend, streams, frame);
    case Algorithm::kOa:
      return OaDgdFrame(states, scenario.deployment, steps.eta,
                        scenario.problem, radius, ctx.backend, streams, frame);
    case Algorithm::kDgdRef:
      return DgdStepReference(states, ctx.omega, steps.eta, scenario.problem,
                              radius);
  }
  Fail(ErrorCode::kInvalidConfig, "unknown algorithm");
}

void Record(const Scenario& scenario, const std::vector<NodeState>& states,
            TrialResult& out) {
  const Vector& w_star = scenario.optimum.w_star;
  double mse = 0.0;
  double test = 0.0;
  for (const NodeState& s : states) {
    mse += (s.w - w_star).squaredNorm();
    test += scenario.problem.TestError(s.w);
  }
  const auto n = static_cast<double>(states.size());
  out.mean_square_error.push_back(mse / n);
  out.test_error.push_back(test / n);
}

TrialResult RunTrial(const AlgorithmContext& ctx, const Scenario& scenario,
                     const Stepsizes& steps, std::uint64_t frames,
                     const std::vector<std::uint64_t>& samples,
                     const StreamFactory& streams) {
  TrialResult out;
  std::vector<NodeState> states =
      InitialStates(scenario.deployment, scenario.problem.dim());
  std::size_t next_sample = 0;
  if (samples[next_sample] == 0) {
    Record(scenario, states, out);
    ++next_sample;
  }
  for (std::uint64_t k = 0; k < frames; ++k) {
    try {
      states = Advance(ctx, scenario, states, steps, streams, k);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFinite) throw;
      out.diverged_at = k;
      break;
    }
    if (next_sample < samples.size() && samples[next_sample] == k + 1) {
      Record(scenario, states, out);
      ++next_sample;
    }
  }
  out.mean_square_error.resize(samples.size(), kNaN);
  out.test_error.resize(samples.size(), kNaN);
  return out;
}

void Aggregate(GridPointResult& point) {
  const std::size_t samples = point.sample_frames.size();
  point.opt_error.assign(samples, kNaN);
  point.test_error.assign(samples, kNaN);
  point.diverged_trials = 0;
  for (const TrialResult& t : point.trials) {
    if (t.diverged_at) ++point.diverged_trials;
  }
  const std::size_t valid = point.trials.size() - point.diverged_trials;
  if (valid == 0) return;
  for (std::size_t s = 0; s < samples; ++s) {
    double mse = 0.0;
    double test = 0.0;
    for (const TrialResult& t : point.trials) {
      if (t.diverged_at) continue;
      mse += t.mean_square_error[s];
      test += t.test_error[s];
    }
    point.opt_error[s] = std::sqrt(mse / static_cast<double>(valid));
    point.test_error[s] = test / static_cast<double>(valid);
  }
}

// nlohmann wraps negative numbers into unsigned targets; refuse them.
void RequireUnsigned(const nlohmann::json& v, const char* key) {
  if (!v.is_number_unsigned()) {
    Fail(ErrorCode::kInvalidConfig,
         std::string(key) + " must be a non-negative integer");
  }
}

template <typename T>
T Get(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  const nlohmann::json& v = j.at(key);
  if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
    RequireUnsigned(v, key);
  } else if constexpr (!std::is_same_v<T, std::string> &&
                       requires { typename T::value_type; }) {
    if constexpr (std::is_integral_v<typename T::value_type> &&
                  std::is_unsigned_v<typename T::value_type>) {
      if (v.is_array()) {
        for (const auto& e : v) RequireUnsigned(e, key);
      }
    }
  }
  return v.get<T>();
}

}  // namespace

const char* AlgorithmName(Algorithm algo) {
  switch (algo) {
    case Algorithm::kNcota: return "ncota";
    case Algorithm::kOd: return "od";
    case Algorithm::kOa: return "oa";
    case Algorithm::kDgdRef: return "dgd-ref";
  }
  return "unknown";
}

Algorithm ParseAlgorithm(const std::string& name) {
  if (name == "ncota") return Algorithm::kNcota;
  if (name == "od") return Algorithm::kOd;
  if (name == "oa") return Algorithm::kOa;
  if (name == "dgd-ref") return Algorithm::kDgdRef;
  Fail(ErrorCode::kInvalidConfig,
       "unknown algorithm '" + name + "' (expected ncota, od, oa or dgd-ref)");
}

void ExperimentConfig::Validate() const {
  auto check = [](bool ok, const std::string& what) {
    Require(ok, ErrorCode::kInvalidConfig, what);
  };
  check(problem == "synthetic" || problem == "idx" || problem == "json",
        "problem must be synthetic, idx or json");
  check(problem != "idx" || (!idx_images.empty() && !idx_labels.empty()),
        "idx problems need idx_images and idx_labels");
  check(problem != "json" || !problem_path.empty(),
        "json problems need problem_path");
  check(n_nodes >= 2, "n_nodes must be >= 2");
  check(dim >= 1, "dim must be >= 1");
  check(region_radius_m > 0.0, "region_radius_m must be positive");
  check(trials >= 1, "trials must be >= 1");
  check(metric_growth > 1.0, "metric_growth must exceed 1");
  check(solver_tol > 0.0, "solver_tol must be positive");
  check(quantizer_levels >= 2, "quantizer_levels must be >= 2");
  check(od_target_prob > 0.0 && od_target_prob <= 1.0,
        "od_target_prob must lie in (0, 1]");
  check(!od_rate || *od_rate > 0.0, "od_rate must be positive");
  check(algo != Algorithm::kOa || dim % 2 == 0,
        "oa needs an even dimension");
  if (schedule_k == 0) {
    check(!etas.empty(), "etas must not be empty");
    check(algo != Algorithm::kNcota || !gammas.empty(),
          "gammas must not be empty");
    for (double e : etas) check(std::isfinite(e) && e >= 0.0, "etas must be >= 0");
    for (double g : gammas) {
      check(std::isfinite(g) && g >= 0.0, "gammas must be >= 0");
    }
  } else {
    check(schedule_a > 0.0 && schedule_b > 0.0,
          "schedule_a and schedule_b must be positive");
    check(schedule_epsilon >= 0.0 && schedule_epsilon < 1.0,
          "schedule_epsilon must lie in [0, 1)");
  }
  for (std::uint64_t k : schedule_ks) check(k >= 1, "schedule_ks must be >= 1");
}

ExperimentConfig ConfigFromJson(const std::string& text) {
  static const std::set<std::string> kKnown = {
      "problem", "idx_images", "idx_labels", "problem_path", "deployment_path",
      "n_nodes", "dim", "n_test", "synthetic_noise", "r_min",
      "region_radius_m", "p_tx_dbm", "n0_dbm_hz", "w_tot_hz", "f_c_hz", "algo",
      "backend", "etas", "gammas", "schedule_k", "schedule_epsilon",
      "schedule_a", "schedule_b", "schedule_ks", "trials", "frames", "seed",
      "out", "metric_growth", "od_rate", "od_target_prob", "od_radius_m",
      "quantizer_levels", "solver_tol", "threads"};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("config is not valid JSON: ") + e.what());
  }
  Require(j.is_object(), ErrorCode::kParse, "config must be a JSON object");
  for (const auto& item : j.items()) {
    Require(kKnown.count(item.key()) == 1, ErrorCode::kParse,
            "unknown config key '" + item.key() + "'");
  }
  ExperimentConfig c;
  try {
    c.problem = Get(j, "problem", c.problem);
    c.idx_images = Get(j, "idx_images", c.idx_images);
    c.idx_labels = Get(j, "idx_labels", c.idx_labels);
    c.problem_path = Get(j, "problem_path", c.problem_path);
    c.deployment_path = Get(j, "deployment_path", c.deployment_path);
    c.n_nodes = Get(j, "n_nodes", c.n_nodes);
    c.dim = Get(j, "dim", c.dim);
    c.n_test = Get(j, "n_test", c.n_test);
    c.synthetic_noise = Get(j, "synthetic_noise", c.synthetic_noise);
    c.r_min = Get(j, "r_min", c.r_min);
    c.region_radius_m = Get(j, "region_radius_m", c.region_radius_m);
    c.radio.p_tx_dbm = Get(j, "p_tx_dbm", c.radio.p_tx_dbm);
    c.radio.n0_dbm_hz = Get(j, "n0_dbm_hz", c.radio.n0_dbm_hz);
    c.radio.w_tot_hz = Get(j, "w_tot_hz", c.radio.w_tot_hz);
    c.radio.f_c_hz = Get(j, "f_c_hz", c.radio.f_c_hz);
    if (j.contains("algo")) c.algo = ParseAlgorithm(j.at("algo").get<std::string>());
    if (j.contains("backend")) {
      c.backend = ParseBackend(j.at("backend").get<std::string>());
    }
    c.etas = Get(j, "etas", c.etas);
    c.gammas = Get(j, "gammas", c.gammas);
    c.schedule_k = Get(j, "schedule_k", c.schedule_k);
    c.schedule_epsilon = Get(j, "schedule_epsilon", c.schedule_epsilon);
    c.schedule_a = Get(j, "schedule_a", c.schedule_a);
    c.schedule_b = Get(j, "schedule_b", c.schedule_b);
    c.schedule_ks = Get(j, "schedule_ks", c.schedule_ks);
    c.trials = Get(j, "trials", c.trials);
    c.frames = Get(j, "frames", c.frames);
    c.seed = Get(j, "seed", c.seed);
    c.out = Get(j, "out", c.out);
    c.metric_growth = Get(j, "metric_growth", c.metric_growth);
    if (j.contains("od_rate") && !j.at("od_rate").is_null()) {
      c.od_rate = j.at("od_rate").get<double>();
    }
    c.od_target_prob = Get(j, "od_target_prob", c.od_target_prob);
    c.od_radius_m = Get(j, "od_radius_m", c.od_radius_m);
    c.quantizer_levels = Get(j, "quantizer_levels", c.quantizer_levels);
    c.solver_tol = Get(j, "solver_tol", c.solver_tol);
    c.threads = Get(j, "threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  c.Validate();
  return c;
}

std::string ConfigToJson(const ExperimentConfig& c) {
  nlohmann::json j = {
      {"problem", c.problem},
      {"idx_images", c.idx_images},
      {"idx_labels", c.idx_labels},
      {"problem_path", c.problem_path},
      {"deployment_path", c.deployment_path},
      {"n_nodes", c.n_nodes},
      {"dim", c.dim},
      {"n_test", c.n_test},
      {"synthetic_noise", c.synthetic_noise},
      {"r_min", c.r_min},
      {"region_radius_m", c.region_radius_m},
      {"p_tx_dbm", c.radio.p_tx_dbm},
      {"n0_dbm_hz", c.radio.n0_dbm_hz},
      {"w_tot_hz", c.radio.w_tot_hz},
      {"f_c_hz", c.radio.f_c_hz},
      {"algo", AlgorithmName(c.algo)},
      {"backend", BackendName(c.backend)},
      {"etas", c.etas},
      {"gammas", c.gammas},
      {"schedule_k", c.schedule_k},
      {"schedule_epsilon", c.schedule_epsilon},
      {"schedule_a", c.schedule_a},
      {"schedule_b", c.schedule_b},
      {"schedule_ks", c.schedule_ks},
      {"trials", c.trials},
      {"frames", c.frames},
      {"seed", c.seed},
      {"out", c.out},
      {"metric_growth", c.metric_growth},
      {"od_target_prob", c.od_target_prob},
      {"od_radius_m", c.od_radius_m},
      {"quantizer_levels", c.quantizer_levels},
      {"solver_tol", c.solver_tol},
      {"threads", c.threads}};
  j["od_rate"] = c.od_rate ? nlohmann::json(*c.od_rate) : nlohmann::json(nullptr);
  return j.dump(2);
}

Scenario BuildScenario(const ExperimentConfig& config) {
  config.Validate();
  Deployment deployment =
      config.deployment_path.empty()
          ? BuildDeployment(config.n_nodes, config.region_radius_m, config.seed,
                            config.radio)
          : DeploymentFromJson(ReadFile(config.deployment_path));
  ProblemSpec spec;
  if (config.problem == "synthetic") {
    spec = SynthesizeDataset(deployment.size(), config.dim, config.seed,
                             config.n_test, config.synthetic_noise, config.r_min);
  } else if (config.problem == "idx") {
    spec = IngestIdx(config.idx_images, config.idx_labels, deployment.size(),
                     config.dim, config.n_test, config.seed, config.r_min);
  } else {
    spec = ProblemFromJson(ReadFile(config.problem_path));
  }
  Require(spec.num_nodes() == deployment.size(), ErrorCode::kInvalidConfig,
          "problem has " + std::to_string(spec.num_nodes()) +
              " nodes but the deployment has " +
              std::to_string(deployment.size()));
  LogisticProblem problem(std::move(spec));
  Optimum optimum =
      SolveCentralized(problem, problem.radius(), config.solver_tol);
  MixingSpectrum spectrum = ComputeMixingSpectrum(deployment);
  return Scenario{std::move(deployment), std::move(problem), std::move(optimum),
                  std::move(spectrum)};
}

double OdRate(const Scenario& scenario, const ExperimentConfig& config) {
  if (config.od_rate) return *config.od_rate;
  return ChooseRate(scenario.deployment, config.od_target_prob,
                    config.od_radius_m);
}

double FrameDuration(Algorithm algo, const Scenario& scenario,
                     const ExperimentConfig& config) {
  const double bandwidth = scenario.deployment.constants().w_tot_hz;
  const std::size_t dim = scenario.problem.dim();
  const std::size_t n = scenario.deployment.size();
  switch (algo) {
    case Algorithm::kNcota:
    case Algorithm::kDgdRef:
      return NcotaFrameDuration(dim, bandwidth);
    case Algorithm::kOd: {
      QuantizerConfig q;
      q.levels = config.quantizer_levels;
      return OdFrameDuration(n, q.PayloadBits(dim), OdRate(scenario, config),
                             bandwidth);
    }
    case Algorithm::kOa:
      return OaFrameDuration(n, dim, bandwidth);
  }
  Fail(ErrorCode::kInvalidConfig, "unknown algorithm");
}

std::vector<std::uint64_t> GeometricFrameGrid(std::uint64_t frames,
                                              double growth) {
  Require(growth > 1.0, ErrorCode::kInvalidArgument, "growth must exceed 1");
  std::vector<std::uint64_t> out = {0};
  std::uint64_t k = 1;
  while (k < frames) {
    out.push_back(k);
    k = std::max(k + 1,
                 static_cast<std::uint64_t>(std::floor(static_cast<double>(k) * growth)));
  }
  if (frames > 0) out.push_back(frames);
  return out;
}

std::vector<Stepsizes> StepsizeGrid(const ExperimentConfig& config) {
  if (config.schedule_k > 0) {
    return {CorollarySchedule(config.schedule_k, config.schedule_epsilon,
                              config.schedule_a, config.schedule_b)
                .steps()};
  }
  std::vector<Stepsizes> grid;
  if (config.algo == Algorithm::kNcota) {
    for (double eta : config.etas) {
      for (double gamma : config.gammas) grid.push_back({gamma, eta});
    }
  } else {
    for (double eta : config.etas) grid.push_back({0.0, eta});
  }
  return grid;
}

std::size_t ResolveThreadCount(std::size_t requested) {
  std::size_t threads = requested;
  if (threads == 0) {
    if (const char* env = std::getenv("NCOTA_SIM_THREADS")) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(env, &end, 10);
      Require(end != env && *end == '\0', ErrorCode::kInvalidConfig,
              "NCOTA_SIM_THREADS must be a non-negative integer");
      threads = static_cast<std::size_t>(v);
    }
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return threads;
}

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  return RunExperiment(config, BuildScenario(config));
}

ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const Scenario& scenario) {
  config.Validate();
  Require(config.algo != Algorithm::kOa || scenario.problem.dim() % 2 == 0,
          ErrorCode::kInvalidConfig, "oa needs an even dimension");
  const AlgorithmContext ctx = MakeContext(config, scenario);
  const std::vector<Stepsizes> grid = StepsizeGrid(config);
  for (const Stepsizes& s : grid) s.Validate();
  const std::uint64_t frames =
      config.schedule_k > 0 ? config.schedule_k : config.frames;
  const std::vector<std::uint64_t> samples =
      GeometricFrameGrid(frames, config.metric_growth);

  ExperimentResult result;
  result.config = config;
  result.algo = config.algo;
  result.frame_duration = FrameDuration(config.algo, scenario, config);
  if (config.algo == Algorithm::kOd) result.od_rate = OdRate(scenario, config);
  result.points.resize(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    result.points[p].steps = grid[p];
    result.points[p].frames = frames;
    result.points[p].sample_frames = samples;
    result.points[p].trials.resize(config.trials);
  }

  const std::size_t tasks = grid.size() * config.trials;
  ParallelFor(tasks, ResolveThreadCount(config.threads), [&](std::size_t task) {
    const std::size_t p = task / config.trials;
    const std::size_t t = task % config.trials;
    result.points[p].trials[t] =
        RunTrial(ctx, scenario, grid[p], frames, samples,
                 StreamFactory::ForTrial(config.seed, p, t));
  });
  for (GridPointResult& point : result.points) Aggregate(point);
  return result;
}

std::string ExperimentResult::MetricsCsv() const {
  std::string out = "algo,eta,gamma,trial,frame,sim_time_s,opt_error,test_error\n";
  const std::string name = AlgorithmName(algo);
  auto row = [&](const GridPointResult& p, const std::string& trial,
                 std::size_t s, double opt, double test) {
    const std::uint64_t frame = p.sample_frames[s];
    out += name + ',' + Num(p.steps.eta) + ',' + Num(p.steps.gamma) + ',' +
           trial + ',' + std::to_string(frame) + ',' +
           Num(static_cast<double>(frame) * frame_duration) + ',' + Num(opt) +
           ',' + Num(test) + '\n';
  };
  for (const GridPointResult& p : points) {
    for (std::size_t t = 0; t < p.trials.size(); ++t) {
      const TrialResult& tr = p.trials[t];
      for (std::size_t s = 0; s < p.sample_frames.size(); ++s) {
        if (std::isnan(tr.mean_square_error[s])) break;
        row(p, std::to_string(t), s, std::sqrt(tr.mean_square_error[s]),
            tr.test_error[s]);
      }
    }
    for (std::size_t s = 0; s < p.sample_frames.size(); ++s) {
      row(p, "mean", s, p.opt_error[s], p.test_error[s]);
    }
  }
  return out;
}

std::string ExperimentReportJson(const ExperimentResult& result,
                                 const Scenario& scenario) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(ConfigToJson(result.config));
  j["seed"] = result.config.seed;
  j["algo"] = AlgorithmName(result.algo);
  j["backend"] = BackendName(result.config.backend);
  j["frame_duration_s"] = result.frame_duration;
  if (result.algo == Algorithm::kOd) {
    QuantizerConfig q;
    q.levels = result.config.quantizer_levels;
    j["od_rate"] = result.od_rate;
    j["payload_bits"] = q.PayloadBits(scenario.problem.dim());
  }
  j["n"] = scenario.deployment.size();
  j["d"] = scenario.problem.dim();
  j["radius"] = scenario.problem.radius();
  j["lambda_star"] = scenario.deployment.lambda_star();
  j["noise_to_energy"] = scenario.deployment.noise_to_energy();
  j["rho2"] = scenario.spectrum.rho2();
  j["rhoN"] = scenario.spectrum.rhoN();
  j["w_star_norm"] = scenario.optimum.w_star.norm();
  j["zeta"] = scenario.optimum.zeta;
  j["nabla_max"] = scenario.optimum.nabla_max;
  nlohmann::json points = nlohmann::json::array();
  for (const GridPointResult& p : result.points) {
    nlohmann::json diverged = nlohmann::json::array();
    for (std::size_t t = 0; t < p.trials.size(); ++t) {
      if (p.trials[t].diverged_at) {
        diverged.push_back({{"trial", t}, {"frame", *p.trials[t].diverged_at}});
      }
    }
    const double final_opt = p.opt_error.empty() ? kNaN : p.opt_error.back();
    const double final_test = p.test_error.empty() ? kNaN : p.test_error.back();
    points.push_back(
        {{"eta", p.steps.eta},
         {"gamma", p.steps.gamma},
         {"frames", p.frames},
         {"sim_elapsed_s", static_cast<double>(p.frames) * result.frame_duration},
         {"final_opt_error", std::isnan(final_opt) ? nlohmann::json(nullptr)
                                                   : nlohmann::json(final_opt)},
         {"final_test_error", std::isnan(final_test) ? nlohmann::json(nullptr)
                                                     : nlohmann::json(final_test)},
         {"diverged_trials", p.diverged_trials},
         {"diverged", diverged}});
  }
  j["points"] = points;
  return j.dump(2);
}

std::vector<EnvelopePoint> BestEnvelope(const std::vector<Curve>& curves) {
  Require(!curves.empty(), ErrorCode::kInvalidArgument,
          "envelope needs at least one curve");
  const std::size_t samples = curves.front().frames.size();
  for (const Curve& c : curves) {
    Require(c.frames == curves.front().frames && c.values.size() == samples &&
                c.times.size() == samples,
            ErrorCode::kInvalidArgument,
            "envelope curves must share one sample grid");
  }
  std::vector<EnvelopePoint> out;
  for (std::size_t s = 0; s < samples; ++s) {
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < curves.size(); ++c) {
      const double v = curves[c].values[s];
      if (std::isnan(v)) continue;
      if (!best || v < curves[*best].values[s]) best = c;
    }
    if (!best) continue;
    out.push_back({curves[*best].frames[s], curves[*best].times[s],
                   curves[*best].values[s], curves[*best].steps, *best});
  }
  return out;
}

std::vector<Curve> OptErrorCurves(const ExperimentResult& result) {
  std::vector<Curve> curves;
  for (const GridPointResult& p : result.points) {
    Curve c{p.steps, p.sample_frames, {}, p.opt_error};
    for (std::uint64_t f : p.sample_frames) {
      c.times.push_back(static_cast<double>(f) * result.frame_duration);
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

std::string EnvelopeCsv(const ExperimentResult& result,
                        const std::vector<EnvelopePoint>& envelope) {
  std::string out = "algo,frame,sim_time_s,opt_error,test_error,eta,gamma\n";
  for (const EnvelopePoint& e : envelope) {
    const GridPointResult& p = result.points[e.index];
    const auto it =
        std::find(p.sample_frames.begin(), p.sample_frames.end(), e.frame);
    const double test = p.test_error[static_cast<std::size_t>(
        it - p.sample_frames.begin())];
    out += std::string(AlgorithmName(result.algo)) + ',' +
           std::to_string(e.frame) + ',' + Num(e.time) + ',' + Num(e.value) +
           ',' + Num(test) + ',' + Num(e.steps.eta) + ',' +
           Num(e.steps.gamma) + '\n';
  }
  return out;
}

std::vector<ScalingPoint> RunScalingStudy(const ExperimentConfig& config,
                                          const Scenario& scenario) {
  Require(!config.schedule_ks.empty(), ErrorCode::kInvalidConfig,
          "scaling study needs schedule_ks");
  std::vector<ScalingPoint> out;
  for (std::uint64_t K : config.schedule_ks) {
    ExperimentConfig run = config;
    run.schedule_k = K;
    // Only the final frame matters here.
    run.metric_growth = static_cast<double>(K) + 1.0;
    const ExperimentResult r = RunExperiment(run, scenario);
    const GridPointResult& p = r.points.front();
    out.push_back({K, p.steps, p.opt_error.back(), p.test_error.back(),
                   p.diverged_trials});
  }
  return out;
}

std::string ScalingCsv(const std::vector<ScalingPoint>& points) {
  std::string out = "K,eta,gamma,opt_error,test_error,diverged_trials\n";
  for (const ScalingPoint& p : points) {
    out += std::to_string(p.K) + ',' + Num(p.steps.eta) + ',' +
           Num(p.steps.gamma) + ',' + Num(p.opt_error) + ',' +
           Num(p.test_error) + ',' + std::to_string(p.diverged_trials) + '\n';
  }
  return out;
}

ScalingFit FitScaling(const std::vector<double>& ks,
                      const std::vector<double>& errors) {
  Require(ks.size() == errors.size(), ErrorCode::kInvalidArgument,
          "K and error lists differ in length");
  const std::set<double> distinct(ks.begin(), ks.end());
  Require(distinct.size() >= 4, ErrorCode::kInvalidArgument,
          "scaling fit needs at least four distinct K values");
  std::vector<double> y;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    Require(ks[i] > 0.0 && errors[i] > 0.0 && std::isfinite(errors[i]),
            ErrorCode::kInvalidArgument,
            "scaling fit needs positive K and finite positive errors");
    y.push_back(std::log(errors[i]));
  }
  const auto n = static_cast<double>(y.size());
  double y_mean = 0.0;
  for (double v : y) y_mean += v / n;
  double y_var = 0.0;
  for (double v : y) y_var += (v - y_mean) * (v - y_mean);

  ScalingFit fit;
  if (y_var <= 1e-24 * std::max(1.0, y_mean * y_mean)) {
    fit.degenerate = true;
    fit.scale = std::exp(y_mean);
    return fit;
  }

  struct Line {
    double slope, intercept, sse;
  };
  auto line = [&](double delta) {
    std::vector<double> x;
    double x_mean = 0.0;
    for (double k : ks) {
      x.push_back(std::log(k + delta));
      x_mean += x.back() / n;
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - x_mean) * (y[i] - y_mean);
      sxx += (x[i] - x_mean) * (x[i] - x_mean);
    }
    const double slope = sxy / sxx;
    const double intercept = y_mean - slope * x_mean;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - intercept - slope * x[i];
      sse += r * r;
    }
    return Line{slope, intercept, sse};
  };

  const double k_min = *distinct.begin();
  const double k_max = *distinct.rbegin();
  std::vector<double> candidates = {0.0};
  const int steps = 600;
  const double lo = std::log(1e-6 * k_min);
  const double hi = std::log(10.0 * k_max);
  for (int s = 0; s <= steps; ++s) {
    candidates.push_back(std::exp(lo + (hi - lo) * s / steps));
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    if (line(candidates[c]).sse < line(candidates[best]).sse) best = c;
  }
  double a = candidates[best == 0 ? 0 : best - 1];
  double b = candidates[std::min(best + 1, candidates.size() - 1)];
  // Golden-section refinement inside the bracketing cells.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = b - phi * (b - a);
  double c2 = a + phi * (b - a);
  double f1 = line(c1).sse;
  double f2 = line(c2).sse;
  for (int it = 0; it < 300 && b - a > 1e-14 * std::max(1.0, b); ++it) {
    if (f1 < f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - phi * (b - a);
      f1 = line(c1).sse;
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + phi * (b - a);
      f2 = line(c2).sse;
    }
  }
  double delta = 0.5 * (a + b);
  if (line(candidates[best]).sse < line(delta).sse) delta = candidates[best];
  const Line l = line(delta);
  fit.slope = l.slope;
  fit.delta = delta;
  fit.scale = std::exp(l.intercept);
  fit.residual = std::sqrt(l.sse / n);
  return fit;
}

std::pair<std::vector<double>, std::vector<double>> ReadScalingCsv(
    const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse,
          "scaling CSV is empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  const std::vector<std::string> header = split(line);
  const auto k_col = std::find(header.begin(), header.end(), "K");
  auto err_col = std::find(header.begin(), header.end(), "opt_error");
  Require(k_col != header.end() && err_col != header.end(), ErrorCode::kParse,
          "scaling CSV needs K and opt_error columns");
  const auto ki = static_cast<std::size_t>(k_col - header.begin());
  const auto ei = static_cast<std::size_t>(err_col - header.begin());
  std::vector<double> ks;
  std::vector<double> errors;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    Require(cells.size() > std::max(ki, ei), ErrorCode::kParse,
            "scaling CSV row has too few columns");
    try {
      ks.push_back(std::stod(cells[ki]));
      errors.push_back(std::stod(cells[ei]));
    } catch (const std::exception&) {
      Fail(ErrorCode::kParse, "scaling CSV has a non-numeric cell: " + line);
    }
  }
  return {ks, errors};
}

}  // namespace ncota
