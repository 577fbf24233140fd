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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ncota/codec.hpp"
#include "ncota/error.hpp"
#include "ncota/rng.hpp"

namespace ncota {
namespace {

Vector Vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

Vector RandomVector(RandomStream& rng, std::size_t dim, double scale) {
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = scale * rng.Normal();
  return v;
}

TEST_CASE("codewords for d=2, R=1") {
  const Codebook cb(2, 1.0);
  CHECK(cb.size() == 3);
  CHECK((cb.codeword(0) - Vec({3, -1})).norm() == 0.0);
  CHECK((cb.codeword(1) - Vec({-1, 3})).norm() == 0.0);
  CHECK((cb.codeword(2) - Vec({-1, -1})).norm() == 0.0);
}

TEST_CASE("codewords for d=1, R=2") {
  const Codebook cb = BuildCodebook(1, 2.0);
  CHECK(cb.codeword(0)[0] == 2.0);
  CHECK(cb.codeword(1)[0] == -2.0);
}

TEST_CASE("pairwise codeword distances for d=50, R=5") {
  const Codebook cb(50, 5.0);
  CHECK(cb.size() == 51);
  const double top = std::sqrt(8.0) * 5.0 * 50.0;
  double worst = 0.0;
  for (std::size_t m = 0; m < cb.size(); ++m) {
    for (std::size_t n = m + 1; n < cb.size(); ++n) {
      const double dist = (cb.codeword(m) - cb.codeword(n)).norm();
      const double expected = n == cb.size() - 1 ? top / std::sqrt(2.0) : top;
      CHECK(dist == doctest::Approx(expected).epsilon(1e-14));
      worst = std::max(worst, dist);
    }
  }
  CHECK(worst == doctest::Approx(top).epsilon(1e-14));
}

TEST_CASE("codeword formula holds componentwise") {
  const Codebook cb(7, 2.5);
  for (std::size_t m = 0; m < cb.size(); ++m) {
    for (Eigen::Index k = 0; k < 7; ++k) {
      const double expected =
          (static_cast<std::size_t>(k) == m ? 2.0 * 2.5 * 7.0 : 0.0) - 2.5;
      CHECK(cb.codewords()(k, static_cast<Eigen::Index>(m)) == expected);
    }
  }
}

TEST_CASE("preamble inner products are M times Kronecker delta") {
  const Codebook cb(4, 1.0);
  CHECK(cb.preamble_scale() == doctest::Approx(std::sqrt(5.0)));
  for (std::size_t m = 0; m < 5; ++m) {
    for (std::size_t n = 0; n < 5; ++n) {
      CHECK(cb.PreambleInnerProduct(m, n) == (m == n ? 5.0 : 0.0));
    }
  }
  CHECK_THROWS_AS(cb.PreambleInnerProduct(5, 0), Error);
}

TEST_CASE("invalid codebooks are rejected") {
  CHECK_THROWS_AS(Codebook(0, 1.0), Error);
  CHECK_THROWS_AS(Codebook(3, 0.0), Error);
  CHECK_THROWS_AS(Codebook(3, -1.0), Error);
  try {
    Codebook(0, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidConfig);
  }
}

TEST_CASE("encode examples") {
  const Codebook cb(2, 1.0);
  const Vector centre = EncodeWeights(Vec({0, 0}), cb).p;
  CHECK((centre - Vec({0.25, 0.25, 0.5})).norm() < 1e-15);
  const Vector vertex = EncodeWeights(Vec({1, 0}), cb).p;
  CHECK((vertex - Vec({0.5, 0.25, 0.25})).norm() < 1e-15);
  CHECK((cb.codewords() * vertex - Vec({1, 0})).norm() < 1e-15);

  const Codebook line(1, 2.0);
  const Vector edge = EncodeWeights(Vec({-2}), line).p;
  CHECK(edge[0] == 0.0);
  CHECK(edge[1] == 1.0);
}

TEST_CASE("encode rejects vectors outside the ball") {
  const Codebook cb(2, 1.0);
  CHECK_THROWS_AS(EncodeWeights(Vec({1.0, 0.1}), cb), Error);
  CHECK_NOTHROW(EncodeWeights(Vec({1.0 + 1e-12, 0.0}), cb));
  CHECK_THROWS_AS(EncodeWeights(Vec({1.0, 0.0, 0.0}), cb), Error);
  CHECK_THROWS_AS(EncodeWeights(Vec({NAN, 0.0}), cb), Error);
}

TEST_CASE("decode examples") {
  const Codebook cb(2, 1.0);
  CHECK(DecodeWeights({Vec({0.25, 0.25, 0.5})}, cb).norm() < 1e-15);
  for (std::size_t m = 0; m < cb.size(); ++m) {
    Vector e = Vector::Zero(3);
    e[static_cast<Eigen::Index>(m)] = 1.0;
    CHECK((DecodeWeights({e}, cb) - cb.codeword(m)).norm() < 1e-15);
  }
  CHECK_THROWS_AS(DecodeWeights({Vec({0.5, 0.6, -0.1})}, cb), Error);
  CHECK_THROWS_AS(DecodeWeights({Vec({0.5, 0.5})}, cb), Error);
}

TEST_CASE("round trip and simplex over random vectors, including the boundary") {
  RandomStream rng(HashKey({101}));
  for (std::size_t dim : {1u, 2u, 3u, 50u}) {
    for (double radius : {1.0, 3.0, 5.0}) {
      const Codebook cb(dim, radius);
      for (int t = 0; t < 500; ++t) {
        Vector w = RandomVector(rng, dim, 1.0);
        w *= (t % 5 == 0 ? radius : radius * rng.Uniform()) / w.norm();
        const ConvexWeights p = EncodeWeights(w, cb);
        CHECK(std::abs(p.p.sum() - 1.0) <= 1e-12);
        CHECK(p.p.minCoeff() >= 0.0);
        CHECK((DecodeWeights(p, cb) - w).cwiseAbs().maxCoeff() <= 1e-10 * radius);
      }
    }
  }
}

TEST_CASE("transmit signal examples and energy") {
  const TxFrame one_hot = BuildTxSignal({Vec({1, 0, 0})}, 1.0);
  CHECK((one_hot.samples - Vec({std::sqrt(3.0), 0, 0})).norm() < 1e-15);
  const TxFrame mixed = BuildTxSignal({Vec({0.25, 0.25, 0.5})}, 4.0);
  CHECK((mixed.samples - Vec({std::sqrt(3.0), std::sqrt(3.0), std::sqrt(6.0)})).norm() <
        1e-14);
  CHECK(mixed.samples.squaredNorm() / 3.0 == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(mixed.energy_per_sample == 4.0);

  RandomStream rng(HashKey({102}));
  const Codebook cb(9, 2.0);
  for (int t = 0; t < 200; ++t) {
    Vector w = RandomVector(rng, 9, 1.0);
    w *= 2.0 * rng.Uniform() / w.norm();
    const TxFrame f = BuildTxSignal(EncodeWeights(w, cb), 3e-9);
    CHECK(f.samples.squaredNorm() / 10.0 == doctest::Approx(3e-9).epsilon(1e-13));
    CHECK(f.samples.minCoeff() >= 0.0);
  }
  CHECK_THROWS_AS(BuildTxSignal({Vec({0.5, 0.5})}, 0.0), Error);
  CHECK_THROWS_AS(BuildTxSignal({Vec({1.1, -0.1})}, 1.0), Error);
}

TEST_CASE("projection examples and properties") {
  CHECK((ProjectToBall(Vec({0.3, 0.4}), 1.0) - Vec({0.3, 0.4})).norm() == 0.0);
  CHECK((ProjectToBall(Vec({3, 4}), 1.0) - Vec({0.6, 0.8})).norm() < 1e-15);
  RandomStream rng(HashKey({103}));
  for (int t = 0; t < 500; ++t) {
    const Vector a = RandomVector(rng, 6, 2.0);
    const Vector b = RandomVector(rng, 6, 2.0);
    const Vector pa = ProjectToBall(a, 1.5);
    const Vector pb = ProjectToBall(b, 1.5);
    CHECK(pa.norm() <= 1.5 * (1 + 1e-15));
    CHECK((ProjectToBall(pa, 1.5) - pa).norm() <= 1e-15);
    CHECK((pa - pb).norm() <= (a - b).norm() + 1e-14);
  }
}

}  // namespace
}  // namespace ncota
