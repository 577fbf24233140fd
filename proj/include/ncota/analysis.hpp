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

#ifndef NCOTA_ANALYSIS_HPP_
#define NCOTA_ANALYSIS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ncota/channel.hpp"
#include "ncota/node.hpp"
#include "ncota/problem.hpp"
#include "ncota/types.hpp"

namespace ncota {

// Mixing matrix induced by the average pathloss:
//   omega_ij = (Lambda_ij / Lambda*) 1[j in N_i],  omega_ii = 1 - sum_{j!=i}.
// Gaps below the eigensolver's accuracy on a 1e-12 doubly stochastic matrix
// are reported as no gap.
inline constexpr double kSpectralGapTolerance = 1e-12;

struct MixingSpectrum {
  Matrix omega;
  Vector eigenvalues;  // descending
  double lambda_star = 0.0;

  double rho2() const { return eigenvalues.size() > 1 ? eigenvalues[1] : 0.0; }
  double rhoN() const { return eigenvalues[eigenvalues.size() - 1]; }
  bool spectral_gap() const { return rho2() < 1.0 - kSpectralGapTolerance; }
};

MixingSpectrum ComputeMixingSpectrum(const Deployment& deployment);

struct TheoremConstants {
  double mu = 0.0;
  double L = 0.0;
  double zeta = 0.0;
  double nabla_max = 0.0;
  double lambda_star = 0.0;
  double noise_to_energy = 0.0;
  double rho2 = 0.0;
  double rhoN = 0.0;
  double Z = 0.0;      // (1 - rho2) Lambda* / (2 sqrt(1 + L / mu))
  double Sigma = 0.0;  // 8 N [R d (Lambda* + sigma^2 / E)]^2
  std::size_t n_nodes = 0;
  std::size_t dim = 0;
  double radius = 0.0;
};

TheoremConstants ComputeTheoremConstants(const MixingSpectrum& spectrum,
                                         const Deployment& deployment,
                                         const Objective& objective,
                                         const Optimum& optimum, double radius);

struct ConditionCheck {
  bool c1 = false;  // eta (mu + L) + gamma Lambda* (1 - rhoN) <= 2
  bool c2 = false;  // eta / gamma <= zeta Z / (sqrt(N) nabla_max)
  bool both() const { return c1 && c2; }
};

ConditionCheck CheckConditions(const TheoremConstants& consts,
                               const Stepsizes& steps);

struct TheoremBounds {
  double disagreement = 0.0;  // bound on (1/sqrt N)||W_k - W^(G)||_E
  double bias = 0.0;          // bound on (1/sqrt N)||W^(G) - 1 (x) w*||
  double combined() const { return disagreement + bias; }
};

TheoremBounds ComputeTheoremBounds(const TheoremConstants& consts,
                                   const Stepsizes& steps, std::uint64_t k);

double SigmaBound(std::size_t n_nodes, double radius, std::size_t dim,
                  double lambda_star, double noise_to_energy);

// Stacked iterates W = [w_1; ...; w_N].
Vector StackIterates(const std::vector<Vector>& iterates);
std::vector<Vector> UnstackIterates(const Vector& stacked, std::size_t dim);

// G(W) = sum_i f_i(w_i) + (gamma Lambda* / 2 eta) W^T (I - Omega (x) I_d) W.
double LyapunovValue(const Vector& stacked, const Stepsizes& steps,
                     const MixingSpectrum& spectrum, const Objective& objective);

struct LyapunovMinimizer {
  Vector stacked;
  double residual = 0.0;
  std::size_t iterations = 0;
};

// argmin of G over W^N. Damped Newton on the unconstrained problem first;
// accelerated projected gradient when the unconstrained minimizer leaves W^N.
// `tol` bounds the (projected) gradient norm in units of max(1, L_G), where
// L_G = L + penalty (1 - rhoN) is the curvature bound of G.
LyapunovMinimizer MinimizeLyapunov(const Objective& objective,
                                   const MixingSpectrum& spectrum,
                                   const Stepsizes& steps, double radius,
                                   double tol = 1e-10);

struct StepSchedule {
  std::uint64_t K = 1;
  double epsilon = 0.0;
  double a = 1.0;
  double b = 1.0;
  double eta = 1.0;    // a K^-(1 - eps)
  double gamma = 1.0;  // b K^-(3/4)(1 - eps)

  Stepsizes steps() const { return {gamma, eta}; }
};

// epsilon may be 0 (the limiting schedule) or any value in (0, 1).
StepSchedule CorollarySchedule(std::uint64_t K, double epsilon, double a,
                               double b);

// JSON report: spectrum, constants, conditions and the bounds at each k.
std::string AnalysisReportJson(const TheoremConstants& consts,
                               const Stepsizes& steps,
                               const std::vector<std::uint64_t>& ks);

}  // namespace ncota

#endif  // NCOTA_ANALYSIS_HPP_
