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

#ifndef NCOTA_BASELINES_HPP_
#define NCOTA_BASELINES_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "ncota/channel.hpp"
#include "ncota/node.hpp"
#include "ncota/problem.hpp"
#include "ncota/rng.hpp"
#include "ncota/types.hpp"

namespace ncota {

// Rejects Omega unless it is square, symmetric, non-negative and has unit
// row sums (to `tol`).
void ValidateMixingMatrix(const Matrix& omega, double tol = 1e-12);

// Off-diagonal weights Lambda_ij / max_n sum_{j != n} Lambda_nj with the
// diagonal completed to unit row sums. Fails if a diagonal goes negative.
Matrix CompleteMixingMatrix(const Matrix& off_diagonal);

// w_i <- Pi[w_i + sum_j omega_ij (w_j - w_i) - eta grad f_i(w_i)].
std::vector<NodeState> DgdStepReference(const std::vector<NodeState>& states,
                                        const Matrix& omega, double eta,
                                        const Objective& objective,
                                        double radius);

struct QuantizerConfig {
  int levels = 9;  // uniform on [-1, 1]
  int header_bits = 64;

  // header_bits + d log2(levels).
  double PayloadBits(std::size_t dim) const;
};

// Scales w by ||w||_inf and rounds every component to one of its two
// neighbouring levels with the probabilities that make the output unbiased.
Vector DitheredQuantize(const Vector& w, const QuantizerConfig& config,
                        RandomStream& rng);

// exp(-(sigma^2 / (E Lambda)) (2^rate - 1)).
double SuccessProbability(double noise_to_energy, double pathloss,
                          double rate);

// Largest rate whose success probability at `radius_m` is at least
// `target_prob`.
double ChooseRate(const Deployment& deployment, double target_prob = 0.9,
                  double radius_m = 500.0);

struct DigitalLinkConfig {
  double rate = 0.0;     // bits/s/Hz
  Matrix success_prob;   // P^succ, zero diagonal
  QuantizerConfig quantizer;

  static DigitalLinkConfig ForDeployment(const Deployment& deployment,
                                         double rate,
                                         QuantizerConfig quantizer = {});

  // omega_ij = P_ij / max_n sum_{j != n} P_nj, diagonal completed.
  Matrix MixingMatrix() const;
};

// Outage indicators 1[rate < log2(1 + |h_ij|^2 E / sigma^2)] for every
// directed link j -> i, with fresh fading per frame. Zero diagonal.
Matrix DrawLinkOutcomes(const Deployment& deployment,
                        const DigitalLinkConfig& link,
                        const StreamFactory& streams, std::uint64_t frame);

// One OD-DGD frame. Faded backend: dithered quantization and Bernoulli
// outage per directed link. Idealized backend: both replaced by their
// conditional means (exact w, indicator = P^succ).
std::vector<NodeState> OdDgdFrame(const std::vector<NodeState>& states,
                                  const Deployment& deployment,
                                  const DigitalLinkConfig& link, double eta,
                                  const Objective& objective, double radius,
                                  ChannelBackend backend,
                                  const StreamFactory& streams,
                                  std::uint64_t frame);

// (d/2 + 2) complex samples: packed unit direction, norm sample, pilot.
struct AnalogFrame {
  ComplexVector samples;
};

double AnalogAmplitude(double energy, std::size_t dim);

AnalogFrame OaEncode(const Vector& w, double energy, double radius);

// Pilot-based reconstruction. Returns nullopt when the channel estimate is
// too weak (|h| < 1e-15) to invert.
std::optional<Vector> OaDecode(const ComplexVector& received, double energy,
                               double radius, std::size_t dim);

// omega_ij = Lambda_ij / max_n sum_{j != n} Lambda_nj, diagonal completed.
Matrix AnalogMixingMatrix(const Deployment& deployment);

// One OA-DGD frame over TDMA analog links. Idealized backend reconstructs
// every neighbour exactly.
std::vector<NodeState> OaDgdFrame(const std::vector<NodeState>& states,
                                  const Deployment& deployment, double eta,
                                  const Objective& objective, double radius,
                                  ChannelBackend backend,
                                  const StreamFactory& streams,
                                  std::uint64_t frame);

// N ceil(L / rate) channel uses.
double OdFrameDuration(std::size_t n_nodes, double payload_bits, double rate,
                       double bandwidth_hz);
// N (d/2 + 2) channel uses.
double OaFrameDuration(std::size_t n_nodes, std::size_t dim,
                       double bandwidth_hz);

}  // namespace ncota

#endif  // NCOTA_BASELINES_HPP_
