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

#include "ncota/codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ncota/error.hpp"

namespace ncota {

namespace {

void CheckSimplex(const Vector& p) {
  Require(p.size() >= 2, ErrorCode::kInvalidArgument,
          "simplex vector needs at least two entries");
  double sum = 0.0;
  for (Eigen::Index m = 0; m < p.size(); ++m) {
    if (!(std::isfinite(p[m]) && p[m] >= -kSimplexTolerance)) {
      Fail(ErrorCode::kInvalidArgument,
           "simplex weight " + std::to_string(m) + " is negative: " + std::to_string(p[m]));
    }
    sum += p[m];
  }
  if (!(std::abs(sum - 1.0) <= 1e-9)) {
    Fail(ErrorCode::kInvalidArgument,
         "simplex weights sum to " + std::to_string(sum));
  }
}

}  // namespace

Codebook::Codebook(std::size_t dim, double radius)
    : dim_(dim), radius_(radius) {
  Require(dim >= 1, ErrorCode::kInvalidConfig, "codebook dimension must be >= 1");
  Require(std::isfinite(radius) && radius > 0.0, ErrorCode::kInvalidConfig,
          "codebook radius must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  codewords_ = Matrix::Constant(d, d + 1, -radius);
  const double vertex = 2.0 * radius * static_cast<double>(dim) - radius;
  for (Eigen::Index m = 0; m < d; ++m) codewords_(m, m) = vertex;
}

double Codebook::preamble_scale() const noexcept {
  return std::sqrt(static_cast<double>(size()));
}

double Codebook::PreambleInnerProduct(std::size_t m, std::size_t n) const {
  Require(m < size() && n < size(), ErrorCode::kInvalidArgument,
          "preamble index out of range");
  // u_m = sqrt(M) e_m, so u_m^H u_n = M delta_mn.
  return m == n ? static_cast<double>(size()) : 0.0;
}

Codebook BuildCodebook(std::size_t dim, double radius) {
  return Codebook(dim, radius);
}

ConvexWeights EncodeWeights(const Vector& w, const Codebook& codebook) {
  const auto d = static_cast<Eigen::Index>(codebook.dim());
  const double radius = codebook.radius();
  Require(w.size() == d, ErrorCode::kInvalidArgument,
          "vector dimension does not match codebook");
  Require(w.allFinite(), ErrorCode::kNonFinite, "cannot encode non-finite vector");
  const double norm = w.norm();
  if (!(norm <= radius * (1.0 + 1e-9))) {
    Fail(ErrorCode::kInvalidArgument,
         "vector norm " + std::to_string(norm) + " exceeds codebook radius " + std::to_string(radius));
  }

  const double scale = 2.0 * radius * static_cast<double>(d);
  ConvexWeights out{Vector(d + 1)};
  double head = 0.0;
  for (Eigen::Index m = 0; m < d; ++m) {
    double p = (w[m] + radius) / scale;
    if (p < 0.0 && p >= -kSimplexTolerance) p = 0.0;
    out.p[m] = p;
    head += p;
  }
  double tail = 1.0 - head;
  if (tail < 0.0 && tail >= -kSimplexTolerance) tail = 0.0;
  out.p[d] = tail;
  CheckSimplex(out.p);
  return out;
}

Vector DecodeWeights(const ConvexWeights& weights, const Codebook& codebook) {
  const auto d = static_cast<Eigen::Index>(codebook.dim());
  Require(weights.p.size() == d + 1, ErrorCode::kInvalidArgument,
          "weight vector length does not match codebook");
  CheckSimplex(weights.p);
  // Z p = 2Rd p_{1:d} - R (1^T p) 1.
  const double radius = codebook.radius();
  const double scale = 2.0 * radius * static_cast<double>(d);
  const double total = weights.p.sum();
  Vector w(d);
  for (Eigen::Index m = 0; m < d; ++m) w[m] = scale * weights.p[m] - radius * total;
  return w;
}

TxFrame BuildTxSignal(const ConvexWeights& weights, double energy) {
  Require(std::isfinite(energy) && energy > 0.0, ErrorCode::kInvalidArgument,
          "energy per sample must be positive");
  CheckSimplex(weights.p);
  const double amplitude =
      std::sqrt(energy) * std::sqrt(static_cast<double>(weights.p.size()));
  TxFrame frame{Vector(weights.p.size()), energy};
  for (Eigen::Index m = 0; m < weights.p.size(); ++m) {
    frame.samples[m] = amplitude * std::sqrt(std::max(weights.p[m], 0.0));
  }
  return frame;
}

Vector ProjectToBall(const Vector& a, double radius) {
  const double norm = a.norm();
  if (norm <= radius) return a;
  return (radius / norm) * a;
}

}  // namespace ncota
