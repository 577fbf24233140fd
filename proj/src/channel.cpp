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

#include "ncota/channel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "ncota/error.hpp"

namespace ncota {

namespace {

double DbmToWatts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }


void CheckSlots(const std::vector<Slot>& slots) {
  Require(slots.size() >= 2, ErrorCode::kInvalidConfig,
          "a deployment needs at least two nodes");
  const auto first =
      std::count(slots.begin(), slots.end(), Slot::kFirst);
  Require(first > 0 && first < static_cast<std::ptrdiff_t>(slots.size()),
          ErrorCode::kInvalidConfig,
          "both half-duplex slots must contain at least one node");
}

}  // namespace

double RadioConstants::EnergyPerSample() const {
  return DbmToWatts(p_tx_dbm) / w_tot_hz;
}

double RadioConstants::NoisePower() const { return DbmToWatts(n0_dbm_hz); }

double FriisPathloss(double distance_m, double carrier_hz) {
  Require(std::isfinite(distance_m) && distance_m > 0.0,
          ErrorCode::kInvalidArgument,
          "pathloss needs a positive distance (co-located nodes unsupported)");
  Require(carrier_hz > 0.0, ErrorCode::kInvalidArgument,
          "carrier frequency must be positive");
  const double amplitude =
      kSpeedOfLight / (4.0 * std::numbers::pi * carrier_hz * distance_m);
  return amplitude * amplitude;
}

Deployment Deployment::FromPositions(std::vector<Position> positions,
                                     std::vector<Slot> slots,
                                     const RadioConstants& constants,
                                     double radius_m, std::uint64_t seed) {
  Require(positions.size() == slots.size(), ErrorCode::kInvalidConfig,
          "positions and slots differ in length");
  CheckSlots(slots);
  const auto n = static_cast<Eigen::Index>(positions.size());
  Matrix pathloss = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dx = positions[i].x - positions[j].x;
      const double dy = positions[i].y - positions[j].y;
      const double gain = FriisPathloss(std::hypot(dx, dy), constants.f_c_hz);
      pathloss(i, j) = gain;
      pathloss(j, i) = gain;
    }
  }
  Deployment dep;
  dep.positions_ = std::move(positions);
  dep.pathloss_ = std::move(pathloss);
  dep.slots_ = std::move(slots);
  dep.constants_ = constants;
  dep.radius_m_ = radius_m;
  dep.seed_ = seed;
  dep.Finalize();
  return dep;
}

Deployment Deployment::FromPathloss(Matrix pathloss, std::vector<Slot> slots,
                                    const RadioConstants& constants) {
  CheckSlots(slots);
  const auto n = static_cast<Eigen::Index>(slots.size());
  Require(pathloss.rows() == n && pathloss.cols() == n,
          ErrorCode::kInvalidConfig, "pathloss matrix has the wrong shape");
  for (Eigen::Index i = 0; i < n; ++i) {
    Require(pathloss(i, i) == 0.0, ErrorCode::kInvalidConfig,
            "pathloss diagonal must be zero");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      Require(std::isfinite(pathloss(i, j)) && pathloss(i, j) > 0.0,
              ErrorCode::kInvalidConfig, "pathloss entries must be positive");
      Require(pathloss(i, j) == pathloss(j, i), ErrorCode::kInvalidConfig,
              "pathloss matrix must be symmetric");
    }
  }
  Deployment dep;
  dep.pathloss_ = std::move(pathloss);
  dep.slots_ = std::move(slots);
  dep.constants_ = constants;
  dep.Finalize();
  return dep;
}

void Deployment::Finalize() {
  Require(constants_.w_tot_hz > 0.0 && constants_.f_c_hz > 0.0,
          ErrorCode::kInvalidConfig, "bandwidth and carrier must be positive");
  energy_ = constants_.EnergyPerSample();
  noise_power_ = constants_.NoisePower();
  lambda_star_ = 0.0;
  for (NodeId i = 0; i < size(); ++i) {
    double total = 0.0;
    for (NodeId j = 0; j < size(); ++j) {
      if (slots_[j] != slots_[i]) total += pathloss_(i, j);
    }
    lambda_star_ = std::max(lambda_star_, total);
  }
}

std::vector<NodeId> Deployment::ReceiveSet(NodeId i) const {
  std::vector<NodeId> out;
  const Slot listen = slot(i);
  for (NodeId j = 0; j < size(); ++j) {
    if (slots_[j] != listen) out.push_back(j);
  }
  return out;
}

bool Deployment::Hears(NodeId receiver, NodeId transmitter) const {
  return slot(receiver) != slot(transmitter);
}

std::vector<Slot> AssignSlots(std::size_t n, RandomStream& rng) {
  Require(n >= 2, ErrorCode::kInvalidConfig, "slot assignment needs N >= 2");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates with the stream's own uniform draws, so the permutation is
  // identical across standard libraries.
  for (std::size_t k = n - 1; k > 0; --k) {
    const auto pick = static_cast<std::size_t>(
        rng.Uniform() * static_cast<double>(k + 1));
    std::swap(order[k], order[std::min(pick, k)]);
  }
  std::vector<Slot> slots(n, Slot::kSecond);
  for (std::size_t k = 0; k < n / 2; ++k) slots[order[k]] = Slot::kFirst;
  return slots;
}

Deployment BuildDeployment(std::size_t n, double radius_m, std::uint64_t seed,
                           const RadioConstants& constants) {
  Require(n >= 2, ErrorCode::kInvalidConfig, "a deployment needs N >= 2");
  Require(std::isfinite(radius_m) && radius_m > 0.0, ErrorCode::kInvalidConfig,
          "deployment radius must be positive");
  const StreamFactory streams(HashKey({seed}));
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    RandomStream rng = streams.Stream(attempt, 0, StreamKind::kPositions);
    std::vector<Position> positions(n);
    for (auto& p : positions) {
      const double r = radius_m * std::sqrt(rng.Uniform());
      const double theta = 2.0 * std::numbers::pi * rng.Uniform();
      p = {r * std::cos(theta), r * std::sin(theta)};
    }
    bool distinct = true;
    for (std::size_t i = 0; i < n && distinct; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (positions[i].x == positions[j].x &&
            positions[i].y == positions[j].y) {
          distinct = false;
          break;
        }
      }
    }
    if (!distinct) continue;
    RandomStream slot_rng = streams.Stream(0, 0, StreamKind::kSlots);
    return Deployment::FromPositions(std::move(positions),
                                     AssignSlots(n, slot_rng), constants,
                                     radius_m, seed);
  }
  Fail(ErrorCode::kInvalidConfig,
       "could not draw distinct node positions in 100 attempts");
}

std::string DeploymentToJson(const Deployment& deployment) {
  nlohmann::json j;
  j["n"] = deployment.size();
  j["radius_m"] = deployment.radius_m();
  j["seed"] = deployment.seed();
  const auto& c = deployment.constants();
  j["constants"] = {{"p_tx_dbm", c.p_tx_dbm},
                    {"n0_dbm_hz", c.n0_dbm_hz},
                    {"w_tot_hz", c.w_tot_hz},
                    {"f_c_hz", c.f_c_hz}};
  nlohmann::json slots = nlohmann::json::array();
  for (Slot s : deployment.slots()) slots.push_back(static_cast<int>(s));
  j["slots"] = slots;
  if (deployment.has_geometry()) {
    nlohmann::json pos = nlohmann::json::array();
    for (const auto& p : deployment.positions()) pos.push_back({p.x, p.y});
    j["positions"] = pos;
  } else {
    nlohmann::json rows = nlohmann::json::array();
    const Matrix& pl = deployment.pathloss();
    for (Eigen::Index i = 0; i < pl.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < pl.cols(); ++k) row.push_back(pl(i, k));
      rows.push_back(row);
    }
    j["pathloss"] = rows;
  }
  j["lambda_star"] = deployment.lambda_star();
  j["noise_to_energy"] = deployment.noise_to_energy();
  return j.dump(2);
}

Deployment DeploymentFromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("deployment JSON: ") + e.what());
  }
  try {
    RadioConstants c;
    if (j.contains("constants")) {
      const auto& jc = j.at("constants");
      c.p_tx_dbm = jc.value("p_tx_dbm", c.p_tx_dbm);
      c.n0_dbm_hz = jc.value("n0_dbm_hz", c.n0_dbm_hz);
      c.w_tot_hz = jc.value("w_tot_hz", c.w_tot_hz);
      c.f_c_hz = jc.value("f_c_hz", c.f_c_hz);
    }
    std::vector<Slot> slots;
    for (int s : j.at("slots").get<std::vector<int>>()) {
      Require(s == 0 || s == 1, ErrorCode::kParse, "slot values must be 0 or 1");
      slots.push_back(static_cast<Slot>(s));
    }
    if (j.contains("positions")) {
      std::vector<Position> positions;
      for (const auto& p : j.at("positions")) {
        Require(p.is_array() && p.size() == 2, ErrorCode::kParse,
                "positions must be [x, y] pairs");
        positions.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      return Deployment::FromPositions(std::move(positions), std::move(slots),
                                       c, j.value("radius_m", 0.0),
                                       j.value("seed", std::uint64_t{0}));
    }
    const auto rows = j.at("pathloss").get<std::vector<std::vector<double>>>();
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix pl(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Require(static_cast<Eigen::Index>(rows[i].size()) == n, ErrorCode::kParse,
              "pathloss matrix must be square");
      for (Eigen::Index k = 0; k < n; ++k) pl(i, k) = rows[i][k];
    }
    return Deployment::FromPathloss(std::move(pl), std::move(slots), c);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("deployment JSON: ") + e.what());
  }
}

const char* BackendName(ChannelBackend backend) {
  return backend == ChannelBackend::kFaded ? "faded" : "idealized";
}

ChannelBackend ParseBackend(const std::string& name) {
  if (name == "faded") return ChannelBackend::kFaded;
  if (name == "idealized") return ChannelBackend::kIdealized;
  Fail(ErrorCode::kInvalidConfig, "unknown channel backend '" + name + "'");
}

RxCorrelations TransmitAndCorrelate(const TxMap& transmitters, NodeId receiver,
                                    const Deployment& deployment,
                                    ChannelBackend backend,
                                    const StreamFactory& streams,
                                    std::uint64_t frame) {
  Require(receiver < deployment.size(), ErrorCode::kInvalidArgument,
          "receiver index out of range");
  Require(!transmitters.empty(), ErrorCode::kInvalidArgument,
          "no transmitters in the receive slot");
  const Eigen::Index m_count = transmitters.begin()->second.samples.size();
  for (const auto& [node, tx] : transmitters) {
    Require(node < deployment.size(), ErrorCode::kInvalidArgument,
            "transmitter index out of range");
    if (!(deployment.Hears(receiver, node))) {
      Fail(ErrorCode::kHalfDuplexViolation,
           "node " + std::to_string(node) + " transmits in the slot where node " + std::to_string(receiver) + " is also transmitting");
    }
    Require(tx.samples.size() == m_count, ErrorCode::kInvalidArgument,
            "transmit frames differ in length");
  }

  const double energy = deployment.energy();
  const double sigma2 = deployment.noise_power();
  const double m = static_cast<double>(m_count);
  RxCorrelations rx;
  rx.receiver = receiver;
  rx.energies = Vector::Zero(m_count);

  if (backend == ChannelBackend::kIdealized) {
    // E|r_m|^2 = sum_j Lambda_ij p_jm + sigma^2 / (M E), p_jm = x_jm^2 / (E M).
    for (const auto& [node, tx] : transmitters) {
      const double gain = deployment.pathloss()(receiver, node);
      for (Eigen::Index k = 0; k < m_count; ++k) {
        rx.energies[k] += gain * (tx.samples[k] * tx.samples[k] / (energy * m));
      }
    }
    rx.energies.array() += sigma2 / (m * energy);
    return rx;
  }

  RandomStream fading = streams.Stream(frame, receiver, StreamKind::kFading);
  RandomStream noise = streams.Stream(frame, receiver, StreamKind::kNoise);
  ComplexVector y = ComplexVector::Zero(m_count);
  for (const auto& [node, tx] : transmitters) {
    const std::complex<double> h =
        fading.ComplexNormal(deployment.pathloss()(receiver, node));
    for (Eigen::Index k = 0; k < m_count; ++k) y[k] += h * tx.samples[k];
  }
  for (Eigen::Index k = 0; k < m_count; ++k) y[k] += noise.ComplexNormal(sigma2);
  // r_m = u_m^H y / (sqrt(E) ||u_m||^2) with u_m = sqrt(M) e_m.
  rx.samples = y / std::sqrt(energy * m);
  rx.energies = rx.samples.cwiseAbs2();
  return rx;
}

}  // namespace ncota
