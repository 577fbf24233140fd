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

// ncota_sim: command-line front end over the ncota C library.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ncota/ncota.h"

namespace {

class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void Check(ncota_status status, const std::string& what) {
  if (status != NCOTA_OK) {
    throw Failure(what + ": " + ncota_status_name(status) + ": " +
                  ncota_last_error());
  }
}

std::string TakeString(char* s) {
  std::string out(s);
  ncota_string_free(s);
  return out;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure("cannot write " + path.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

void Emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << '\n';
  } else {
    WriteFile(path, text);
  }
}

// Flags shared by `run` and `sweep`; each overrides the matching config key.
struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<std::string> algo;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> frames;
  std::optional<std::string> backend;
  std::optional<std::size_t> threads;
};

void AddRunFlags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "flat JSON experiment config");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--algo", f.algo, "ncota, od, oa or dgd-ref");
  cmd->add_option("--trials", f.trials, "Monte-Carlo trials");
  cmd->add_option("--frames", f.frames, "frames per trajectory");
  cmd->add_option("--backend", f.backend, "faded or idealized");
  cmd->add_option("--threads", f.threads, "worker cap (0 = NCOTA_SIM_THREADS)");
}

std::string ResolveConfig(const RunFlags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config.empty()) {
    try {
      j = nlohmann::json::parse(ReadFile(f.config));
    } catch (const nlohmann::json::exception& e) {
      throw Failure("config " + f.config + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw Failure("config " + f.config + " is not an object");
  }
  if (f.seed) j["seed"] = *f.seed;
  if (f.algo) j["algo"] = *f.algo;
  if (f.trials) j["trials"] = *f.trials;
  if (f.frames) j["frames"] = *f.frames;
  if (f.backend) j["backend"] = *f.backend;
  if (f.threads) j["threads"] = *f.threads;
  j["out"] = f.out;
  return j.dump();
}

struct ResultHandle {
  ncota_result* r = nullptr;
  ~ResultHandle() { ncota_result_free(r); }
};

void PrintSummary(const std::string& report_json) {
  const nlohmann::json report = nlohmann::json::parse(report_json);
  std::printf("algo=%s frame_duration_s=%.6g\n",
              report.at("algo").get<std::string>().c_str(),
              report.at("frame_duration_s").get<double>());
  for (const auto& p : report.at("points")) {
    const auto& opt = p.at("final_opt_error");
    std::printf("eta=%.6g gamma=%.6g frames=%llu sim_elapsed_s=%.6g "
                "final_opt_error=%s diverged_trials=%zu\n",
                p.at("eta").get<double>(), p.at("gamma").get<double>(),
                static_cast<unsigned long long>(p.at("frames").get<std::uint64_t>()),
                p.at("sim_elapsed_s").get<double>(),
                opt.is_null() ? "nan" : std::to_string(opt.get<double>()).c_str(),
                p.at("diverged_trials").get<std::size_t>());
  }
}

int CmdDeploy(std::size_t n, double radius_m, std::uint64_t seed,
              const std::string& out) {
  ncota_deployment* dep = nullptr;
  Check(ncota_deployment_generate(n, radius_m, seed, &dep), "deploy");
  char* json = nullptr;
  const ncota_status s = ncota_deployment_to_json(dep, &json);
  ncota_deployment_free(dep);
  Check(s, "deploy");
  Emit(out, TakeString(json));
  return 0;
}

int CmdProblem(std::size_t n, std::size_t dim, std::uint64_t seed,
               std::size_t n_test, const std::string& images,
               const std::string& labels, const std::string& out) {
  ncota_problem* p = nullptr;
  if (images.empty() != labels.empty()) {
    throw Failure("--idx-images and --idx-labels go together");
  }
  if (images.empty()) {
    Check(ncota_problem_synthesize(n, dim, seed, n_test, &p), "problem");
  } else {
    Check(ncota_problem_load_idx(images.c_str(), labels.c_str(), n, dim,
                                 n_test, seed, &p),
          "problem");
  }
  char* json = nullptr;
  const ncota_status s = ncota_problem_to_json(p, &json);
  ncota_problem_free(p);
  Check(s, "problem");
  Emit(out, TakeString(json));
  return 0;
}

int CmdRun(const RunFlags& f, bool sweep) {
  const std::string config = ResolveConfig(f);
  ResultHandle h;
  Check(sweep ? ncota_run_scaling(config.c_str(), &h.r)
              : ncota_run(config.c_str(), &h.r),
        sweep ? "sweep" : "run");
  const std::filesystem::path dir(f.out);
  std::filesystem::create_directories(dir);
  char* s = nullptr;
  Check(ncota_result_metrics_csv(h.r, &s), "metrics");
  WriteFile(dir / "metrics.csv", TakeString(s));
  Check(ncota_result_report_json(h.r, &s), "report");
  const std::string report = TakeString(s);
  WriteFile(dir / "report.json", report);
  if (sweep) {
    Check(ncota_result_envelope_csv(h.r, &s), "envelope");
    WriteFile(dir / "envelope.csv", TakeString(s));
    if (ncota_result_scaling_csv(h.r, &s) == NCOTA_OK) {
      const std::string scaling = TakeString(s);
      WriteFile(dir / "scaling.csv", scaling);
      char* fit = nullptr;
      if (ncota_fit_scaling_csv(scaling.c_str(), &fit) == NCOTA_OK) {
        const std::string fit_json = TakeString(fit);
        WriteFile(dir / "fit.json", fit_json);
        std::cout << fit_json << '\n';
      } else {
        std::cerr << "scaling fit skipped: " << ncota_last_error() << '\n';
      }
    }
  }
  PrintSummary(report);
  return 0;
}

int CmdAnalyze(const std::string& dep_path, const std::string& prob_path,
               double eta, double gamma, const std::vector<std::uint64_t>& ks,
               const std::string& out) {
  ncota_deployment* dep = nullptr;
  Check(ncota_deployment_load(dep_path.c_str(), &dep), "deployment");
  ncota_problem* prob = nullptr;
  ncota_status s = ncota_problem_load(prob_path.c_str(), &prob);
  if (s != NCOTA_OK) ncota_deployment_free(dep);
  Check(s, "problem");
  char* json = nullptr;
  s = ncota_analyze(dep, prob, eta, gamma, ks.data(), ks.size(), &json);
  ncota_deployment_free(dep);
  ncota_problem_free(prob);
  Check(s, "analyze");
  Emit(out, TakeString(json));
  return 0;
}

int CmdFit(const std::string& input, const std::string& out) {
  const std::string csv = ReadFile(input);
  char* json = nullptr;
  Check(ncota_fit_scaling_csv(csv.c_str(), &json), "fit");
  Emit(out, TakeString(json));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized learning over simulated wireless channels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ncota_version());

  std::size_t dep_n = 0;
  double dep_radius = 3000.0;
  std::uint64_t dep_seed = 1;
  std::string dep_out;
  CLI::App* deploy = app.add_subcommand("deploy", "generate a deployment JSON");
  deploy->add_option("--n", dep_n, "node count")->required();
  deploy->add_option("--radius-m", dep_radius, "region radius in metres")
      ->capture_default_str();
  deploy->add_option("--seed", dep_seed, "seed")->capture_default_str();
  deploy->add_option("--out", dep_out, "output file (default stdout)");

  std::size_t prob_n = 0;
  std::size_t prob_dim = 50;
  std::uint64_t prob_seed = 1;
  std::size_t prob_test = 200;
  std::string prob_images;
  std::string prob_labels;
  std::string prob_out;
  CLI::App* problem = app.add_subcommand("problem", "generate a problem JSON");
  problem->add_option("--n", prob_n, "node count")->required();
  problem->add_option("--dim", prob_dim, "feature dimension")->capture_default_str();
  problem->add_option("--seed", prob_seed, "seed")->capture_default_str();
  problem->add_option("--n-test", prob_test, "test samples")->capture_default_str();
  problem->add_option("--idx-images", prob_images, "IDX image file");
  problem->add_option("--idx-labels", prob_labels, "IDX label file");
  problem->add_option("--out", prob_out, "output file (default stdout)");

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run one experiment");
  AddRunFlags(run, run_flags);

  RunFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "stepsize grid with best envelope and optional scaling study");
  AddRunFlags(sweep, sweep_flags);

  std::string an_dep;
  std::string an_prob;
  double an_eta = 0.1;
  double an_gamma = 1e9;
  std::vector<std::uint64_t> an_ks = {100, 1000};
  std::string an_out;
  CLI::App* analyze = app.add_subcommand("analyze", "spectrum, constants and bounds");
  analyze->add_option("--deployment", an_dep, "deployment JSON")->required();
  analyze->add_option("--problem", an_prob, "problem JSON")->required();
  analyze->add_option("--eta", an_eta, "gradient stepsize")->capture_default_str();
  analyze->add_option("--gamma", an_gamma, "consensus stepsize")->capture_default_str();
  analyze->add_option("--k", an_ks, "frames at which to evaluate the bounds");
  analyze->add_option("--out", an_out, "output file (default stdout)");

  std::string fit_in;
  std::string fit_out;
  CLI::App* fit = app.add_subcommand("fit", "fit error ~ (K + delta)^slope");
  fit->add_option("--input", fit_in, "CSV with K and opt_error columns")->required();
  fit->add_option("--out", fit_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* culprit = &app;
    for (const CLI::App* sub : app.get_subcommands()) culprit = sub;
    std::cerr << culprit->help();
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*deploy) return CmdDeploy(dep_n, dep_radius, dep_seed, dep_out);
    if (*problem) {
      return CmdProblem(prob_n, prob_dim, prob_seed, prob_test, prob_images,
                        prob_labels, prob_out);
    }
    if (*run) return CmdRun(run_flags, false);
    if (*sweep) return CmdRun(sweep_flags, true);
    if (*analyze) {
      return CmdAnalyze(an_dep, an_prob, an_eta, an_gamma, an_ks, an_out);
    }
    if (*fit) return CmdFit(fit_in, fit_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
