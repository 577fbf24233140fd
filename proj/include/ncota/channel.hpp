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

#ifndef NCOTA_CHANNEL_HPP_
#define NCOTA_CHANNEL_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ncota/codec.hpp"
#include "ncota/rng.hpp"
#include "ncota/types.hpp"

namespace ncota {

inline constexpr double kSpeedOfLight = 2.998e8;

// Radio parameters. Only the ratio sigma^2 / E enters the algorithms; with
// E = P_tx / W_tot per complex sample and sigma^2 = N0 per sample the ratio
// is 10^((N0 + 10 log10 W_tot - P_tx) / 10).
struct RadioConstants {
  double p_tx_dbm = 5.0;
  double n0_dbm_hz = -169.0;
  double w_tot_hz = 1e6;
  double f_c_hz = 3e9;

  double EnergyPerSample() const;  // joules
  double NoisePower() const;       // joules per sample
};

struct Position {
  double x = 0.0;
  double y = 0.0;
};

// Average power gain (c / (4 pi f_c dist))^2 of a free-space link.
double FriisPathloss(double distance_m, double carrier_hz);

// Immutable network description: geometry, pathloss, half-duplex slots.
class Deployment {
 public:
  // Pathloss from Friis on the pairwise distances.
  static Deployment FromPositions(std::vector<Position> positions,
                                  std::vector<Slot> slots,
                                  const RadioConstants& constants,
                                  double radius_m = 0.0,
                                  std::uint64_t seed = 0);

  // Explicit link gains; used for hand-built topologies.
  static Deployment FromPathloss(Matrix pathloss, std::vector<Slot> slots,
                                 const RadioConstants& constants);

  std::size_t size() const noexcept { return slots_.size(); }
  const std::vector<Position>& positions() const noexcept { return positions_; }
  const Matrix& pathloss() const noexcept { return pathloss_; }
  const std::vector<Slot>& slots() const noexcept { return slots_; }
  Slot slot(NodeId i) const { return slots_.at(i); }
  const RadioConstants& constants() const noexcept { return constants_; }
  double radius_m() const noexcept { return radius_m_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool has_geometry() const noexcept { return !positions_.empty(); }

  // max_i sum_{j in N_i} Lambda_ij.
  double lambda_star() const noexcept { return lambda_star_; }
  double energy() const noexcept { return energy_; }
  double noise_power() const noexcept { return noise_power_; }
  double noise_to_energy() const noexcept { return noise_power_ / energy_; }

  // N_i: the nodes transmitting while i listens.
  std::vector<NodeId> ReceiveSet(NodeId i) const;
  bool Hears(NodeId receiver, NodeId transmitter) const;

 private:
  Deployment() = default;
  void Finalize();

  std::vector<Position> positions_;
  Matrix pathloss_;
  std::vector<Slot> slots_;
  RadioConstants constants_;
  double radius_m_ = 0.0;
  std::uint64_t seed_ = 0;
  double lambda_star_ = 0.0;
  double energy_ = 0.0;
  double noise_power_ = 0.0;
};

// Random balanced split (floor(N/2) nodes in the first slot), fixed for the
// whole run. Both slots are non-empty for N >= 2.
std::vector<Slot> AssignSlots(std::size_t n, RandomStream& rng);

// N nodes uniform on a disc of the given radius, Friis pathloss, random
// slots. Coincident positions are redrawn up to 100 times.
Deployment BuildDeployment(std::size_t n, double radius_m, std::uint64_t seed,
                           const RadioConstants& constants = {});

std::string DeploymentToJson(const Deployment& deployment);
Deployment DeploymentFromJson(const std::string& text);

enum class ChannelBackend {
  kFaded,      // Rayleigh fading + AWGN, sampled
  kIdealized,  // every random quantity replaced by its conditional mean
};

const char* BackendName(ChannelBackend backend);
ChannelBackend ParseBackend(const std::string& name);

// Matched-filter outputs of one receiver in one frame.
struct RxCorrelations {
  NodeId receiver = 0;
  // r_m; empty under the idealized backend.
  ComplexVector samples;
  // |r_m|^2 (faded) or E[|r_m|^2 | state] (idealized).
  Vector energies;
};

using TxMap = std::map<NodeId, TxFrame>;

// Superposes the frames of `transmitters` at `receiver` and correlates with
// the M preambles. Every transmitter must be in the receiver's opposite slot.
RxCorrelations TransmitAndCorrelate(const TxMap& transmitters, NodeId receiver,
                                    const Deployment& deployment,
                                    ChannelBackend backend,
                                    const StreamFactory& streams,
                                    std::uint64_t frame);

}  // namespace ncota

#endif  // NCOTA_CHANNEL_HPP_
