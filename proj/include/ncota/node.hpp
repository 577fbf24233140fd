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

#ifndef NCOTA_NODE_HPP_
#define NCOTA_NODE_HPP_

#include <cstdint>
#include <vector>

#include "ncota/channel.hpp"
#include "ncota/codec.hpp"
#include "ncota/problem.hpp"
#include "ncota/rng.hpp"
#include "ncota/types.hpp"

namespace ncota {

struct NodeState {
  NodeId id = 0;
  Slot slot = Slot::kFirst;
  Vector w;
};

// Consensus and learning stepsizes. Zero is accepted and freezes the
// corresponding term.
struct Stepsizes {
  double gamma = 0.0;
  double eta = 0.0;

  void Validate() const;
};

struct ConsensusSignal {
  Vector d;
};

// d = sum_m (|r_m|^2 - sigma^2 / (M E)) (z_m - w_i).
ConsensusSignal ComputeConsensusSignal(const RxCorrelations& rx,
                                       const Vector& w_i,
                                       const Codebook& codebook, double sigma2,
                                       double energy);

// w <- Pi[w + gamma d - eta grad]. Throws ErrorCode::kNonFinite when the
// inputs or the result are not finite.
NodeState NcotaStep(const NodeState& state, const ConsensusSignal& signal,
                    const Vector& grad, const Stepsizes& steps, double radius);

std::vector<NodeState> InitialStates(const Deployment& deployment,
                                     std::size_t dim);

// One frame of the algorithm for every node: encode, transmit on the own
// slot, receive on the other, correlate, form the consensus signal and take
// the projected step. Gradients are evaluated at the frame's starting
// iterates.
std::vector<NodeState> RunFrame(const std::vector<NodeState>& states,
                                const Deployment& deployment,
                                const Objective& objective,
                                const Codebook& codebook,
                                const Stepsizes& steps, ChannelBackend backend,
                                const StreamFactory& streams,
                                std::uint64_t frame);

// Two slots of M = d + 1 samples each.
double NcotaFrameDuration(std::size_t dim, double bandwidth_hz);

}  // namespace ncota

#endif  // NCOTA_NODE_HPP_
