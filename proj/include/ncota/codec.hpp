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

#ifndef NCOTA_CODEC_HPP_
#define NCOTA_CODEC_HPP_

#include <cstddef>

#include "ncota/types.hpp"

namespace ncota {

// Tolerance below which negative simplex weights are treated as round-off
// and clamped to zero.
inline constexpr double kSimplexTolerance = 1e-12;

// Codebook of M = d + 1 codewords spanning the ball of radius R:
//   z_m = 2Rd e_m - R 1  (m <= d),   z_{d+1} = -R 1.
// The orthogonal preambles u_m = sqrt(M) e_m are implicit.
class Codebook {
 public:
  Codebook(std::size_t dim, double radius);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ + 1; }
  double radius() const noexcept { return radius_; }
  double preamble_scale() const noexcept;

  // d x M matrix whose m-th column is z_m.
  const Matrix& codewords() const noexcept { return codewords_; }
  Vector codeword(std::size_t m) const { return codewords_.col(m); }

  // u_m^H u_n, computed from the implicit definition.
  double PreambleInnerProduct(std::size_t m, std::size_t n) const;

 private:
  std::size_t dim_;
  double radius_;
  Matrix codewords_;
};

Codebook BuildCodebook(std::size_t dim, double radius);

// A point of the M-dimensional probability simplex.
struct ConvexWeights {
  Vector p;
};

// Transmit samples x_m = sqrt(E) sqrt(M) sqrt(p_m). Real by construction.
struct TxFrame {
  Vector samples;
  double energy_per_sample = 0.0;
};

ConvexWeights EncodeWeights(const Vector& w, const Codebook& codebook);
Vector DecodeWeights(const ConvexWeights& weights, const Codebook& codebook);
TxFrame BuildTxSignal(const ConvexWeights& weights, double energy);

// Euclidean projection onto the ball of radius R centred at the origin.
Vector ProjectToBall(const Vector& a, double radius);

}  // namespace ncota

#endif  // NCOTA_CODEC_HPP_
