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

#include "ncota/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "ncota/baselines.hpp"
#include "ncota/codec.hpp"
#include "ncota/error.hpp"

namespace ncota {

namespace {

// Penalty weight gamma Lambda* / eta of the consensus term.
double PenaltyWeight(const Stepsizes& steps, double lambda_star) {
  Require(steps.eta > 0.0, ErrorCode::kInvalidArgument,
          "the Lyapunov function needs a positive learning stepsize");
  return steps.gamma * lambda_star / steps.eta;
}

Vector LaplacianApply(const Matrix& omega, const Vector& stacked,
                      std::size_t dim) {
  const auto n = omega.rows();
  const auto d = static_cast<Eigen::Index>(dim);
  const Eigen::Map<const Matrix> w(stacked.data(), d, n);  // column i = w_i
  Matrix mixed = w - w * omega.transpose();
  return Eigen::Map<const Vector>(mixed.data(), mixed.size());
}

Vector LyapunovGradient(const Vector& stacked, double penalty,
                        const MixingSpectrum& spectrum,
                        const Objective& objective) {
  const auto d = static_cast<Eigen::Index>(objective.dim());
  Vector grad = penalty * LaplacianApply(spectrum.omega, stacked, objective.dim());
  for (NodeId i = 0; i < objective.num_nodes(); ++i) {
    const auto off = static_cast<Eigen::Index>(i) * d;
    grad.segment(off, d) += objective.LocalGradient(stacked.segment(off, d), i);
  }
  return grad;
}

double LyapunovWithPenalty(const Vector& stacked, double penalty,
                           const MixingSpectrum& spectrum,
                           const Objective& objective) {
  const auto d = static_cast<Eigen::Index>(objective.dim());
  double value = 0.0;
  for (NodeId i = 0; i < objective.num_nodes(); ++i) {
    value += objective.LocalLoss(
        stacked.segment(static_cast<Eigen::Index>(i) * d, d), i);
  }
  return value + 0.5 * penalty *
                     stacked.dot(LaplacianApply(spectrum.omega, stacked,
                                                objective.dim()));
}

Vector ProjectStacked(const Vector& stacked, std::size_t dim, double radius) {
  const auto d = static_cast<Eigen::Index>(dim);
  Vector out(stacked.size());
  for (Eigen::Index off = 0; off < stacked.size(); off += d) {
    out.segment(off, d) = ProjectToBall(stacked.segment(off, d), radius);
  }
  return out;
}

bool InsideBalls(const Vector& stacked, std::size_t dim, double radius) {
  const auto d = static_cast<Eigen::Index>(dim);
  for (Eigen::Index off = 0; off < stacked.size(); off += d) {
    if (stacked.segment(off, d).norm() > radius) return false;
  }
  return true;
}

}  // namespace

MixingSpectrum ComputeMixingSpectrum(const Deployment& deployment) {
  const auto n = static_cast<Eigen::Index>(deployment.size());
  const double lambda_star = deployment.lambda_star();
  Require(lambda_star > 0.0, ErrorCode::kInvalidConfig,
          "deployment has no cross-slot links");
  Matrix off = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && deployment.Hears(static_cast<NodeId>(i),
                                     static_cast<NodeId>(j))) {
        off(i, j) = deployment.pathloss()(i, j) / lambda_star;
      }
    }
  }
  MixingSpectrum spectrum;
  spectrum.omega = CompleteMixingMatrix(off);
  spectrum.lambda_star = lambda_star;
  ValidateMixingMatrix(spectrum.omega, 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(spectrum.omega,
                                               Eigen::EigenvaluesOnly);
  Require(solver.info() == Eigen::Success, ErrorCode::kNotConverged,
          "eigendecomposition of the mixing matrix failed");
  spectrum.eigenvalues = solver.eigenvalues().reverse();
  return spectrum;
}

double SigmaBound(std::size_t n_nodes, double radius, std::size_t dim,
                  double lambda_star, double noise_to_energy) {
  const double inner =
      radius * static_cast<double>(dim) * (lambda_star + noise_to_energy);
  return 8.0 * static_cast<double>(n_nodes) * inner * inner;
}

TheoremConstants ComputeTheoremConstants(const MixingSpectrum& spectrum,
                                         const Deployment& deployment,
                                         const Objective& objective,
                                         const Optimum& optimum,
                                         double radius) {
  Require(deployment.size() == objective.num_nodes(),
          ErrorCode::kInvalidArgument,
          "deployment and problem disagree on the node count");
  TheoremConstants c;
  c.mu = objective.strong_convexity();
  c.L = objective.smoothness();
  c.zeta = optimum.zeta;
  c.nabla_max = optimum.nabla_max;
  c.lambda_star = spectrum.lambda_star;
  c.noise_to_energy = deployment.noise_to_energy();
  c.rho2 = spectrum.rho2();
  c.rhoN = spectrum.rhoN();
  c.Z = (1.0 - c.rho2) * c.lambda_star / (2.0 * std::sqrt(1.0 + c.L / c.mu));
  c.n_nodes = objective.num_nodes();
  c.dim = objective.dim();
  c.radius = radius;
  c.Sigma = SigmaBound(c.n_nodes, radius, c.dim, c.lambda_star,
                       c.noise_to_energy);
  return c;
}

ConditionCheck CheckConditions(const TheoremConstants& consts,
                               const Stepsizes& steps) {
  ConditionCheck out;
  out.c1 = steps.eta * (consts.mu + consts.L) +
               steps.gamma * consts.lambda_star * (1.0 - consts.rhoN) <=
           2.0;
  if (steps.gamma > 0.0 && consts.nabla_max > 0.0) {
    out.c2 = steps.eta / steps.gamma <=
             consts.zeta * consts.Z /
                 (std::sqrt(static_cast<double>(consts.n_nodes)) *
                  consts.nabla_max);
  } else {
    // nabla_max = 0: every local optimum coincides; C2 holds trivially.
    out.c2 = steps.gamma > 0.0 || steps.eta == 0.0;
  }
  return out;
}

TheoremBounds ComputeTheoremBounds(const TheoremConstants& consts,
                                   const Stepsizes& steps, std::uint64_t k) {
  TheoremBounds out;
  const double noise_term =
      steps.eta > 0.0
          ? std::sqrt(2.0) * static_cast<double>(consts.dim) /
                std::sqrt(consts.mu) *
                (consts.lambda_star + consts.noise_to_energy) * steps.gamma /
                std::sqrt(steps.eta)
          : (steps.gamma > 0.0 ? INFINITY : 0.0);
  out.disagreement =
      2.0 * consts.radius *
      (noise_term +
       std::exp(-consts.mu * steps.eta * static_cast<double>(k)));
  if (steps.gamma > 0.0) {
    out.bias = consts.nabla_max / consts.Z * (steps.eta / steps.gamma);
  } else {
    out.bias = steps.eta > 0.0 && consts.nabla_max > 0.0 ? INFINITY : 0.0;
  }
  return out;
}

Vector StackIterates(const std::vector<Vector>& iterates) {
  Require(!iterates.empty(), ErrorCode::kInvalidArgument, "nothing to stack");
  const auto d = iterates.front().size();
  Vector out(d * static_cast<Eigen::Index>(iterates.size()));
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    Require(iterates[i].size() == d, ErrorCode::kInvalidArgument,
            "iterates differ in dimension");
    out.segment(static_cast<Eigen::Index>(i) * d, d) = iterates[i];
  }
  return out;
}

std::vector<Vector> UnstackIterates(const Vector& stacked, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  Require(d > 0 && stacked.size() % d == 0, ErrorCode::kInvalidArgument,
          "stacked length is not a multiple of the dimension");
  std::vector<Vector> out;
  for (Eigen::Index off = 0; off < stacked.size(); off += d) {
    out.emplace_back(stacked.segment(off, d));
  }
  return out;
}

double LyapunovValue(const Vector& stacked, const Stepsizes& steps,
                     const MixingSpectrum& spectrum,
                     const Objective& objective) {
  Require(stacked.size() == static_cast<Eigen::Index>(objective.num_nodes() *
                                                      objective.dim()),
          ErrorCode::kInvalidArgument, "stacked iterate has the wrong length");
  return LyapunovWithPenalty(stacked, PenaltyWeight(steps, spectrum.lambda_star),
                             spectrum, objective);
}

LyapunovMinimizer MinimizeLyapunov(const Objective& objective,
                                   const MixingSpectrum& spectrum,
                                   const Stepsizes& steps, double radius,
                                   double tol) {
  Require(tol > 0.0, ErrorCode::kInvalidArgument, "tolerance must be positive");
  const double penalty = PenaltyWeight(steps, spectrum.lambda_star);
  const std::size_t n = objective.num_nodes();
  const std::size_t dim = objective.dim();
  const auto d = static_cast<Eigen::Index>(dim);
  const auto nd = static_cast<Eigen::Index>(n * dim);
  Require(spectrum.omega.rows() == static_cast<Eigen::Index>(n),
          ErrorCode::kInvalidArgument,
          "mixing matrix and objective disagree on the node count");

  // Constant part of the Hessian: penalty (I - Omega (x) I_d).
  Matrix laplacian = Matrix::Zero(nd, nd);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = (i == j ? 1.0 : 0.0) -
                       spectrum.omega(static_cast<Eigen::Index>(i),
                                      static_cast<Eigen::Index>(j));
      if (w == 0.0) continue;
      laplacian.block(static_cast<Eigen::Index>(i) * d,
                      static_cast<Eigen::Index>(j) * d, d, d)
          .diagonal()
          .setConstant(penalty * w);
    }
  }

  // Gradient tolerance relative to the curvature scale of G: with a large
  // penalty the absolute round-off floor of the gradient grows with it.
  const double lipschitz = objective.smoothness() +
                           penalty * (1.0 - spectrum.rhoN());
  const double gtol = tol * std::max(1.0, lipschitz);

  LyapunovMinimizer out;
  Vector x = Vector::Zero(nd);
  Vector grad = LyapunovGradient(x, penalty, spectrum, objective);
  double value = LyapunovWithPenalty(x, penalty, spectrum, objective);
  for (std::size_t it = 0; it < 200 && grad.norm() > gtol; ++it) {
    Matrix hessian = laplacian;
    for (std::size_t i = 0; i < n; ++i) {
      const auto off = static_cast<Eigen::Index>(i) * d;
      hessian.block(off, off, d, d) +=
          objective.LocalHessian(x.segment(off, d), i);
    }
    const Vector step = hessian.ldlt().solve(-grad);
    const double slope = grad.dot(step);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Vector trial = x + t * step;
      const double trial_value =
          LyapunovWithPenalty(trial, penalty, spectrum, objective);
      const Vector trial_grad =
          LyapunovGradient(trial, penalty, spectrum, objective);
      // Near the optimum G stalls in round-off; the gradient still shrinks.
      if (trial_value <= value + 1e-4 * t * slope ||
          trial_grad.norm() < 0.5 * grad.norm()) {
        x = trial;
        value = trial_value;
        grad = trial_grad;
        accepted = true;
        break;
      }
    }
    out.iterations = it + 1;
    if (!accepted) break;
  }
  if (grad.norm() <= gtol && InsideBalls(x, dim, radius)) {
    out.stacked = x;
    out.residual = grad.norm();
    return out;
  }

  // Constrained case: FISTA with function-value restart.
  const double step = 1.0 / lipschitz;
  x = ProjectStacked(x, dim, radius);
  Vector y = x;
  double momentum = 1.0;
  value = LyapunovWithPenalty(x, penalty, spectrum, objective);
  for (std::size_t it = 0; it < 2000000; ++it) {
    const Vector next = ProjectStacked(
        y - step * LyapunovGradient(y, penalty, spectrum, objective), dim,
        radius);
    const double next_value =
        LyapunovWithPenalty(next, penalty, spectrum, objective);
    const double residual = (next - y).norm() / step;
    // Restart momentum; a plain step from x is accepted even when round-off
    // makes G tick up.
    if (next_value > value && momentum > 1.0) {
      y = x;
      momentum = 1.0;
      continue;
    }
    const double next_momentum =
        0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = next + ((momentum - 1.0) / next_momentum) * (next - x);
    x = next;
    value = next_value;
    momentum = next_momentum;
    out.iterations += 1;
    if (residual <= gtol) {
      const Vector g = LyapunovGradient(x, penalty, spectrum, objective);
      out.residual =
          (ProjectStacked(x - step * g, dim, radius) - x).norm() / step;
      if (out.residual <= gtol) {
        out.stacked = x;
        return out;
      }
    }
  }
  Fail(ErrorCode::kNotConverged, "Lyapunov minimization did not converge");
}

StepSchedule CorollarySchedule(std::uint64_t K, double epsilon, double a,
                               double b) {
  Require(K >= 1, ErrorCode::kInvalidArgument, "schedule needs K >= 1");
  Require(epsilon >= 0.0 && epsilon < 1.0, ErrorCode::kInvalidArgument,
          "schedule exponent epsilon must lie in [0, 1)");
  Require(a > 0.0 && b > 0.0, ErrorCode::kInvalidArgument,
          "schedule scale factors must be positive");
  StepSchedule s;
  s.K = K;
  s.epsilon = epsilon;
  s.a = a;
  s.b = b;
  const double k = static_cast<double>(K);
  s.eta = a * std::pow(k, -(1.0 - epsilon));
  s.gamma = b * std::pow(k, -0.75 * (1.0 - epsilon));
  return s;
}

std::string AnalysisReportJson(const TheoremConstants& consts,
                               const Stepsizes& steps,
                               const std::vector<std::uint64_t>& ks) {
  const ConditionCheck cond = CheckConditions(consts, steps);
  nlohmann::json j;
  j["rho2"] = consts.rho2;
  j["rhoN"] = consts.rhoN;
  j["rho2_below_one"] = consts.rho2 < 1.0 - kSpectralGapTolerance;
  j["lambda_star"] = consts.lambda_star;
  j["noise_to_energy"] = consts.noise_to_energy;
  j["Z"] = consts.Z;
  j["Sigma"] = consts.Sigma;
  j["zeta"] = consts.zeta;
  j["nabla_max"] = consts.nabla_max;
  j["mu"] = consts.mu;
  j["L"] = consts.L;
  j["radius"] = consts.radius;
  j["n"] = consts.n_nodes;
  j["d"] = consts.dim;
  j["eta"] = steps.eta;
  j["gamma"] = steps.gamma;
  j["C1"] = cond.c1;
  j["C2"] = cond.c2;
  j["guaranteed"] = cond.both();
  nlohmann::json bounds = nlohmann::json::array();
  for (std::uint64_t k : ks) {
    const TheoremBounds b = ComputeTheoremBounds(consts, steps, k);
    bounds.push_back({{"k", k},
                      {"disagreement_bound", b.disagreement},
                      {"bias_bound", b.bias},
                      {"combined", b.combined()}});
  }
  j["bounds"] = bounds;
  return j.dump(2);
}

}  // namespace ncota
