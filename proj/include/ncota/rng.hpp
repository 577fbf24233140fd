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

#ifndef NCOTA_RNG_HPP_
#define NCOTA_RNG_HPP_

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <utility>

namespace ncota {

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t HashKey(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = Mix64(h ^ Mix64(p + 0x9e3779b97f4a7c15ULL));
  return h;
}

// Independent random sources inside one frame. Each (frame, node, kind)
// tuple owns its own stream so results never depend on evaluation order.
enum class StreamKind : std::uint64_t {
  kFading = 1,
  kNoise = 2,
  kQuantizer = 3,
  kPositions = 4,
  kSlots = 5,
  kDataset = 6,
};

// Counter-based generator: the n-th output is Mix64(key + n * golden), so a
// stream is fully determined by its key. Satisfies
// UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return Mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on [0, 1).
  double Uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1].
  double UniformPositive() noexcept {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  // Pair of independent standard normals (Box-Muller).
  std::pair<double, double> NormalPair() noexcept {
    const double radius = std::sqrt(-2.0 * std::log(UniformPositive()));
    const double angle = 2.0 * std::numbers::pi * Uniform();
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  double Normal() noexcept { return NormalPair().first; }

  // CN(0, variance): sqrt(variance / 2) * (g1 + i g2).
  std::complex<double> ComplexNormal(double variance) noexcept {
    const auto [g1, g2] = NormalPair();
    const double scale = std::sqrt(variance / 2.0);
    return {scale * g1, scale * g2};
  }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Derives per-(frame, node, kind) streams from one base key.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t base_key) noexcept : base_(base_key) {}

  // Base key for trial `trial` of grid point `grid_index` under `seed`.
  static StreamFactory ForTrial(std::uint64_t seed, std::uint64_t grid_index,
                                std::uint64_t trial) noexcept {
    return StreamFactory(HashKey({seed, grid_index, trial}));
  }

  RandomStream Stream(std::uint64_t frame, std::uint64_t node,
                      StreamKind kind) const noexcept {
    return RandomStream(
        HashKey({base_, frame, node, static_cast<std::uint64_t>(kind)}));
  }

  std::uint64_t base() const noexcept { return base_; }

 private:
  std::uint64_t base_;
};

}  // namespace ncota

#endif  // NCOTA_RNG_HPP_
