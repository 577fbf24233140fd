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

#include "ncota/node.hpp"

#include <cmath>
#include <string>

#include "ncota/error.hpp"

namespace ncota {

void Stepsizes::Validate() const {
  Require(std::isfinite(gamma) && gamma >= 0.0, ErrorCode::kInvalidConfig,
          "consensus stepsize must be finite and non-negative");
  Require(std::isfinite(eta) && eta >= 0.0, ErrorCode::kInvalidConfig,
          "learning stepsize must be finite and non-negative");
}

ConsensusSignal ComputeConsensusSignal(const RxCorrelations& rx,
                                       const Vector& w_i,
                                       const Codebook& codebook, double sigma2,
                                       double energy) {
  const auto d = static_cast<Eigen::Index>(codebook.dim());
  const auto m_count = static_cast<Eigen::Index>(codebook.size());
  Require(rx.energies.size() == m_count, ErrorCode::kInvalidArgument,
          "correlation vector length does not match the codebook");
  Require(w_i.size() == d, ErrorCode::kInvalidArgument,
          "iterate dimension does not match the codebook");
  const double floor = sigma2 / (static_cast<double>(m_count) * energy);
  const Vector c = rx.energies.array() - floor;
  // sum_m c_m (z_m - w) = Z c - (1^T c) w, and Z c = 2Rd c_{1:d} - R (1^T c) 1.
  const double radius = codebook.radius();
  const double scale = 2.0 * radius * static_cast<double>(d);
  const double total = c.sum();
  ConsensusSignal out{Vector(d)};
  for (Eigen::Index k = 0; k < d; ++k) {
    out.d[k] = scale * c[k] - radius * total - total * w_i[k];
  }
  return out;
}

NodeState NcotaStep(const NodeState& state, const ConsensusSignal& signal,
                    const Vector& grad, const Stepsizes& steps, double radius) {
  if (!(signal.d.allFinite())) {
    Fail(ErrorCode::kNonFinite,
         "consensus signal of node " + std::to_string(state.id) + " is not finite");
  }
  if (!(grad.allFinite())) {
    Fail(ErrorCode::kNonFinite,
         "gradient of node " + std::to_string(state.id) + " is not finite");
  }
  NodeState next = state;
  next.w = ProjectToBall(state.w + steps.gamma * signal.d - steps.eta * grad,
                         radius);
  if (!(next.w.allFinite())) {
    Fail(ErrorCode::kNonFinite,
         "update of node " + std::to_string(state.id) + " is not finite");
  }
  return next;
}

std::vector<NodeState> InitialStates(const Deployment& deployment,
                                     std::size_t dim) {
  std::vector<NodeState> states(deployment.size());
  for (NodeId i = 0; i < deployment.size(); ++i) {
    states[i] = {i, deployment.slot(i),
                 Vector::Zero(static_cast<Eigen::Index>(dim))};
  }
  return states;
}

std::vector<NodeState> RunFrame(const std::vector<NodeState>& states,
                                const Deployment& deployment,
                                const Objective& objective,
                                const Codebook& codebook,
                                const Stepsizes& steps, ChannelBackend backend,
                                const StreamFactory& streams,
                                std::uint64_t frame) {
  Require(states.size() == deployment.size() &&
              states.size() == objective.num_nodes(),
          ErrorCode::kInvalidArgument,
          "states, deployment and objective disagree on the node count");
  for (NodeId i = 0; i < states.size(); ++i) {
    Require(states[i].id == i && states[i].slot == deployment.slot(i),
            ErrorCode::kInvalidArgument,
            "states must be ordered by node id and carry the deployment slots");
  }
  steps.Validate();
  const double energy = deployment.energy();

  // Each slot's transmitters, keyed by node.
  TxMap slot_tx[2];
  for (const NodeState& s : states) {
    slot_tx[static_cast<int>(s.slot)].emplace(
        s.id, BuildTxSignal(EncodeWeights(s.w, codebook), energy));
  }

  std::vector<NodeState> next(states.size());
  for (const NodeState& s : states) {
    const Vector grad = objective.LocalGradient(s.w, s.id);
    const TxMap& heard = slot_tx[1 - static_cast<int>(s.slot)];
    const RxCorrelations rx =
        TransmitAndCorrelate(heard, s.id, deployment, backend, streams, frame);
    const ConsensusSignal signal = ComputeConsensusSignal(
        rx, s.w, codebook, deployment.noise_power(), energy);
    next[s.id] = NcotaStep(s, signal, grad, steps, codebook.radius());
  }
  return next;
}

double NcotaFrameDuration(std::size_t dim, double bandwidth_hz) {
  Require(bandwidth_hz > 0.0, ErrorCode::kInvalidArgument,
          "bandwidth must be positive");
  return 2.0 * static_cast<double>(dim + 1) / bandwidth_hz;
}

}  // namespace ncota
