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

#include "ncota/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "ncota/codec.hpp"
#include "ncota/error.hpp"

namespace ncota {

namespace {

void CheckStates(const std::vector<NodeState>& states, std::size_t n,
                 const Objective& objective) {
  Require(states.size() == n && objective.num_nodes() == n,
          ErrorCode::kInvalidArgument,
          "states, weights and objective disagree on the node count");
  for (std::size_t i = 0; i < n; ++i) {
    Require(states[i].id == i, ErrorCode::kInvalidArgument,
            "node states must be ordered by id");
  }
}

// Pi[c_i - eta grad f_i(w_i)] with the shared non-finite guard.
NodeState Finish(const NodeState& state, const Vector& consensus, double eta,
                 const Objective& objective, double radius) {
  const Vector grad = objective.LocalGradient(state.w, state.id);
  if (!(grad.allFinite() && consensus.allFinite())) {
    Fail(ErrorCode::kNonFinite,
         "non-finite update at node " + std::to_string(state.id));
  }
  NodeState next = state;
  next.w = ProjectToBall(consensus - eta * grad, radius);
  return next;
}

}  // namespace

void ValidateMixingMatrix(const Matrix& omega, double tol) {
  Require(omega.rows() == omega.cols() && omega.rows() > 0,
          ErrorCode::kInvalidArgument, "mixing matrix must be square");
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < omega.cols(); ++j) {
      Require(omega(i, j) >= -tol, ErrorCode::kInvalidArgument,
              "mixing matrix has a negative entry");
      Require(std::abs(omega(i, j) - omega(j, i)) <= tol,
              ErrorCode::kInvalidArgument, "mixing matrix is not symmetric");
      row += omega(i, j);
    }
    if (!(std::abs(row - 1.0) <= tol)) {
      Fail(ErrorCode::kInvalidArgument,
           "mixing matrix row " + std::to_string(i) + " sums to " + std::to_string(row));
    }
  }
}

Matrix CompleteMixingMatrix(const Matrix& off_diagonal) {
  Matrix omega = off_diagonal;
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    omega(i, i) = 0.0;
    double diag = 1.0 - omega.row(i).sum();
    if (!(diag >= -1e-12)) {
      Fail(ErrorCode::kInvalidArgument,
           "diagonal mixing weight of node " + std::to_string(i) + " is negative");
    }
    omega(i, i) = std::max(diag, 0.0);
  }
  return omega;
}

std::vector<NodeState> DgdStepReference(const std::vector<NodeState>& states,
                                        const Matrix& omega, double eta,
                                        const Objective& objective,
                                        double radius) {
  ValidateMixingMatrix(omega);
  const std::size_t n = states.size();
  CheckStates(states, static_cast<std::size_t>(omega.rows()), objective);
  std::vector<NodeState> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector consensus = states[i].w;
    for (std::size_t j = 0; j < n; ++j) {
      const double weight = omega(static_cast<Eigen::Index>(i),
                                  static_cast<Eigen::Index>(j));
      if (j == i || weight == 0.0) continue;
      consensus += weight * (states[j].w - states[i].w);
    }
    next[i] = Finish(states[i], consensus, eta, objective, radius);
  }
  return next;
}

double QuantizerConfig::PayloadBits(std::size_t dim) const {
  return static_cast<double>(header_bits) +
         static_cast<double>(dim) * std::log2(static_cast<double>(levels));
}

Vector DitheredQuantize(const Vector& w, const QuantizerConfig& config,
                        RandomStream& rng) {
  Require(config.levels >= 2, ErrorCode::kInvalidConfig,
          "quantizer needs at least two levels");
  const double scale = w.lpNorm<Eigen::Infinity>();
  if (scale == 0.0) return Vector::Zero(w.size());
  const int intervals = config.levels - 1;
  const double delta = 2.0 / static_cast<double>(intervals);
  Vector out(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const double u = w[k] / scale;
    const int below = std::clamp(
        static_cast<int>(std::floor((u + 1.0) / delta)), 0, intervals - 1);
    const double lo = -1.0 + delta * static_cast<double>(below);
    const double up_prob = (u - lo) / delta;
    if (up_prob <= 0.0) {
      out[k] = w[k];
      continue;
    }
    const double level = rng.Uniform() < up_prob ? lo + delta : lo;
    out[k] = level * scale;
  }
  return out;
}

double SuccessProbability(double noise_to_energy, double pathloss,
                          double rate) {
  Require(pathloss > 0.0, ErrorCode::kInvalidArgument,
          "pathloss must be positive");
  return std::exp(-(noise_to_energy / pathloss) * (std::exp2(rate) - 1.0));
}

double ChooseRate(const Deployment& deployment, double target_prob,
                  double radius_m) {
  Require(target_prob > 0.0 && target_prob <= 1.0, ErrorCode::kInvalidArgument,
          "target success probability must lie in (0, 1]");
  const double gain =
      FriisPathloss(radius_m, deployment.constants().f_c_hz);
  // exp(-(s/g)(2^R - 1)) >= p  <=>  2^R <= 1 - ln(p) g / s.
  return std::log2(1.0 - std::log(target_prob) * gain /
                             deployment.noise_to_energy());
}

DigitalLinkConfig DigitalLinkConfig::ForDeployment(const Deployment& deployment,
                                                   double rate,
                                                   QuantizerConfig quantizer) {
  Require(rate >= 0.0 && std::isfinite(rate), ErrorCode::kInvalidConfig,
          "coding rate must be finite and non-negative");
  const auto n = static_cast<Eigen::Index>(deployment.size());
  DigitalLinkConfig cfg;
  cfg.rate = rate;
  cfg.quantizer = quantizer;
  cfg.success_prob = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      cfg.success_prob(i, j) = SuccessProbability(
          deployment.noise_to_energy(), deployment.pathloss()(i, j), rate);
    }
  }
  return cfg;
}

Matrix DigitalLinkConfig::MixingMatrix() const {
  const double norm = success_prob.rowwise().sum().maxCoeff();
  Require(norm > 0.0, ErrorCode::kInvalidConfig,
          "every digital link is in outage");
  return CompleteMixingMatrix(success_prob / norm);
}

Matrix DrawLinkOutcomes(const Deployment& deployment,
                        const DigitalLinkConfig& link,
                        const StreamFactory& streams, std::uint64_t frame) {
  const auto n = static_cast<Eigen::Index>(deployment.size());
  const double snr_scale = 1.0 / deployment.noise_to_energy();
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    RandomStream fading =
        streams.Stream(frame, static_cast<NodeId>(i), StreamKind::kFading);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const std::complex<double> h =
          fading.ComplexNormal(deployment.pathloss()(i, j));
      out(i, j) =
          link.rate < std::log2(1.0 + std::norm(h) * snr_scale) ? 1.0 : 0.0;
    }
  }
  return out;
}

std::vector<NodeState> OdDgdFrame(const std::vector<NodeState>& states,
                                  const Deployment& deployment,
                                  const DigitalLinkConfig& link, double eta,
                                  const Objective& objective, double radius,
                                  ChannelBackend backend,
                                  const StreamFactory& streams,
                                  std::uint64_t frame) {
  const std::size_t n = deployment.size();
  CheckStates(states, n, objective);
  const double norm = link.success_prob.rowwise().sum().maxCoeff();
  Require(norm > 0.0, ErrorCode::kInvalidConfig,
          "every digital link is in outage");
  const bool faded = backend == ChannelBackend::kFaded;

  std::vector<Vector> quantized(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (faded) {
      RandomStream rng = streams.Stream(frame, j, StreamKind::kQuantizer);
      quantized[j] = DitheredQuantize(states[j].w, link.quantizer, rng);
    } else {
      quantized[j] = states[j].w;
    }
  }

  const Matrix indicators =
      faded ? DrawLinkOutcomes(deployment, link, streams, frame)
            : link.success_prob;
  std::vector<NodeState> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector accum = Vector::Zero(states[i].w.size());
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double indicator = indicators(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j));
      if (indicator != 0.0) accum += indicator * (quantized[j] - states[i].w);
    }
    const Vector consensus = states[i].w + accum / norm;
    next[i] = Finish(states[i], consensus, eta, objective, radius);
  }
  return next;
}

double AnalogAmplitude(double energy, std::size_t dim) {
  return std::sqrt(energy * (static_cast<double>(dim) / 2.0 + 2.0) / 3.0);
}

AnalogFrame OaEncode(const Vector& w, double energy, double radius) {
  const auto d = w.size();
  Require(d >= 2 && d % 2 == 0, ErrorCode::kInvalidConfig,
          "analog mapping needs an even dimension");
  Require(energy > 0.0 && radius > 0.0, ErrorCode::kInvalidArgument,
          "energy and radius must be positive");
  const Eigen::Index half = d / 2;
  const double amp = AnalogAmplitude(energy, static_cast<std::size_t>(d));
  const double norm = w.norm();
  AnalogFrame frame{ComplexVector::Zero(half + 2)};
  if (norm > 0.0) {
    for (Eigen::Index k = 0; k < half; ++k) {
      frame.samples[k] = amp * std::complex<double>(w[k], w[k + half]) / norm;
    }
  }
  frame.samples[half] = amp * (norm / radius);
  frame.samples[half + 1] = amp;
  return frame;
}

std::optional<Vector> OaDecode(const ComplexVector& received, double energy,
                               double radius, std::size_t dim) {
  Require(dim >= 2 && dim % 2 == 0, ErrorCode::kInvalidConfig,
          "analog mapping needs an even dimension");
  const auto half = static_cast<Eigen::Index>(dim / 2);
  Require(received.size() == half + 2, ErrorCode::kInvalidArgument,
          "analog frame has the wrong length");
  const double amp = AnalogAmplitude(energy, dim);
  // Unit pilot: ML channel estimate under AWGN.
  const std::complex<double> h = received[half + 1] / amp;
  if (std::abs(h) < 1e-15) return std::nullopt;

  const double scaled_norm =
      std::clamp((received[half] / (h * amp)).real(), 0.0, 1.0);
  Vector direction(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < half; ++k) {
    const std::complex<double> v = received[k] / (h * amp);
    direction[k] = v.real();
    direction[k + half] = v.imag();
  }
  const double dir_norm = direction.norm();
  if (dir_norm == 0.0) return Vector::Zero(static_cast<Eigen::Index>(dim));
  return Vector((scaled_norm * radius / dir_norm) * direction);
}

Matrix AnalogMixingMatrix(const Deployment& deployment) {
  const double norm = deployment.pathloss().rowwise().sum().maxCoeff();
  return CompleteMixingMatrix(deployment.pathloss() / norm);
}

std::vector<NodeState> OaDgdFrame(const std::vector<NodeState>& states,
                                  const Deployment& deployment, double eta,
                                  const Objective& objective, double radius,
                                  ChannelBackend backend,
                                  const StreamFactory& streams,
                                  std::uint64_t frame) {
  const std::size_t n = deployment.size();
  CheckStates(states, n, objective);
  const Matrix omega = AnalogMixingMatrix(deployment);
  const double energy = deployment.energy();
  const double sigma2 = deployment.noise_power();
  const std::size_t dim = objective.dim();
  const bool faded = backend == ChannelBackend::kFaded;

  std::vector<AnalogFrame> frames;
  if (faded) {
    frames.reserve(n);
    for (const NodeState& s : states) frames.push_back(OaEncode(s.w, energy, radius));
  }

  std::vector<NodeState> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream fading = streams.Stream(frame, i, StreamKind::kFading);
    RandomStream noise = streams.Stream(frame, i, StreamKind::kNoise);
    Vector consensus = states[i].w;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double weight = omega(static_cast<Eigen::Index>(i),
                                  static_cast<Eigen::Index>(j));
      if (!faded) {
        consensus += weight * (states[j].w - states[i].w);
        continue;
      }
      const std::complex<double> h = fading.ComplexNormal(
          deployment.pathloss()(static_cast<Eigen::Index>(i),
                                static_cast<Eigen::Index>(j)));
      ComplexVector y = h * frames[j].samples;
      for (Eigen::Index k = 0; k < y.size(); ++k) y[k] += noise.ComplexNormal(sigma2);
      const std::optional<Vector> estimate = OaDecode(y, energy, radius, dim);
      if (!estimate) continue;  // failed link: term skipped this frame
      consensus += weight * (*estimate - states[i].w);
    }
    next[i] = Finish(states[i], consensus, eta, objective, radius);
  }
  return next;
}

double OdFrameDuration(std::size_t n_nodes, double payload_bits, double rate,
                       double bandwidth_hz) {
  Require(rate > 0.0 && bandwidth_hz > 0.0, ErrorCode::kInvalidArgument,
          "rate and bandwidth must be positive");
  return static_cast<double>(n_nodes) * std::ceil(payload_bits / rate) /
         bandwidth_hz;
}

double OaFrameDuration(std::size_t n_nodes, std::size_t dim,
                       double bandwidth_hz) {
  Require(bandwidth_hz > 0.0, ErrorCode::kInvalidArgument,
          "bandwidth must be positive");
  return static_cast<double>(n_nodes) * (static_cast<double>(dim) / 2.0 + 2.0) /
         bandwidth_hz;
}

}  // namespace ncota
