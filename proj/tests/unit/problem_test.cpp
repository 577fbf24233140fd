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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "ncota/error.hpp"
#include "ncota/problem.hpp"
#include "support/oracles.hpp"

namespace ncota {
namespace {

ProblemSpec HandSpec(const Matrix& features, std::vector<int> labels, double radius) {
  ProblemSpec spec;
  spec.train = {features, std::move(labels)};
  spec.test = spec.train;
  spec.radius = radius;
  return spec;
}

Vector RandomVector(RandomStream& rng, Eigen::Index dim, double scale) {
  Vector v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v[k] = scale * rng.Normal();
  return v;
}

void WriteBigEndian(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

// Tiny 6x6 digits: '0' lights a ring, '1' a vertical bar, other digits noise.
struct IdxFiles {
  std::filesystem::path images;
  std::filesystem::path labels;
};

IdxFiles WriteIdx(const std::string& tag, std::size_t count, std::uint32_t image_magic = 0x803) {
  const auto dir = std::filesystem::temp_directory_path() / ("ncota_idx_" + tag);
  std::filesystem::create_directories(dir);
  IdxFiles f{dir / "images.idx", dir / "labels.idx"};
  std::ofstream img(f.images, std::ios::binary);
  std::ofstream lab(f.labels, std::ios::binary);
  WriteBigEndian(img, image_magic);
  WriteBigEndian(img, static_cast<std::uint32_t>(count));
  WriteBigEndian(img, 6);
  WriteBigEndian(img, 6);
  WriteBigEndian(lab, 0x801);
  WriteBigEndian(lab, static_cast<std::uint32_t>(count));
  RandomStream rng(HashKey({31}));
  for (std::size_t n = 0; n < count; ++n) {
    const std::uint8_t digit = static_cast<std::uint8_t>(n % 3);
    lab.put(static_cast<char>(digit));
    for (int r = 0; r < 6; ++r) {
      for (int c = 0; c < 6; ++c) {
        double v = 0.0;
        if (digit == 0) v = (r == 0 || r == 5 || c == 0 || c == 5) ? 200.0 : 0.0;
        if (digit == 1) v = (c == 2 || c == 3) ? 250.0 : 0.0;
        if (digit == 2) v = 255.0 * rng.Uniform();
        v += 40.0 * rng.Uniform();
        img.put(static_cast<char>(std::min(255.0, v)));
      }
    }
  }
  return f;
}

TEST_CASE("loss and gradient at the origin") {
  const LogisticProblem p(SynthesizeDataset(6, 5, 1, 10));
  for (NodeId i = 0; i < 6; ++i) {
    CHECK(p.LocalLoss(Vector::Zero(5), i) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    const Vector expected =
        -0.5 * p.spec().train.labels[i] * p.spec().train.features.col(static_cast<Eigen::Index>(i));
    CHECK((p.LocalGradient(Vector::Zero(5), i) - expected).norm() <= 1e-16);
  }
}

TEST_CASE("gradient and Hessian against finite differences") {
  const LogisticProblem p(SynthesizeDataset(10, 6, 2, 10));
  RandomStream rng(HashKey({2}));
  for (int t = 0; t < 40; ++t) {
    const Vector w = RandomVector(rng, 6, 3.0);
    const NodeId i = static_cast<NodeId>(t % 10);
    const Vector g = p.LocalGradient(w, i);
    const Vector fd = testing::FiniteDifferenceGradient(
        [&](const Vector& v) { return p.LocalLoss(v, i); }, w, 1e-6);
    CHECK((g - fd).norm() <= 1e-5 * g.norm());
    const Matrix h = p.LocalHessian(w, i);
    const Matrix fdh = testing::FiniteDifferenceHessian(
        [&](const Vector& v) { return p.LocalGradient(v, i); }, w);
    CHECK((h - fdh).norm() <= 1e-6);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    CHECK(eig.eigenvalues().minCoeff() >= 0.01 - 1e-12);
    CHECK(eig.eigenvalues().maxCoeff() <= 0.26 + 1e-12);
  }
  CHECK(p.strong_convexity() == 0.01);
  CHECK(p.smoothness() == doctest::Approx(0.26).epsilon(1e-15));
  const Vector gg = p.GlobalGradient(Vector::Constant(6, 0.4));
  const Vector fdg = testing::FiniteDifferenceGradient(
      [&](const Vector& v) { return p.GlobalLoss(v); }, Vector::Constant(6, 0.4));
  CHECK((gg - fdg).norm() <= 1e-5 * gg.norm());
}

TEST_CASE("large margins stay finite") {
  Matrix f(2, 2);
  f << 1, 0, 0, 1;
  const LogisticProblem p(HandSpec(f, {1, -1}, 1000.0));
  for (double s : {-700.0, 700.0, -1e4, 1e4}) {
    Vector w(2);
    w << s, -s;
    CHECK(std::isfinite(p.LocalLoss(w, 0)));
    CHECK(p.LocalGradient(w, 0).allFinite());
    CHECK(p.LocalHessian(w, 0).allFinite());
  }
  Vector w(2);
  w << -700.0, 0.0;
  CHECK(p.LocalLoss(w, 0) == doctest::Approx(0.005 * 700.0 * 700.0 + 700.0).epsilon(1e-14));
}

TEST_CASE("strong convexity and smoothness certificates of F") {
  const LogisticProblem p(SynthesizeDataset(12, 4, 3, 10));
  RandomStream rng(HashKey({3}));
  for (int t = 0; t < 200; ++t) {
    const Vector a = RandomVector(rng, 4, 5.0);
    const Vector b = RandomVector(rng, 4, 5.0);
    const Vector dg = p.GlobalGradient(a) - p.GlobalGradient(b);
    CHECK(dg.dot(a - b) >= 0.01 * (a - b).squaredNorm() * (1 - 1e-12));
    CHECK(dg.norm() <= 0.26 * (a - b).norm() * (1 + 1e-12));
  }
}

TEST_CASE("radius estimate") {
  Matrix one(3, 1);
  one << 0.6, 0.8, 0.0;
  const LogisticProblem single(HandSpec(one, {1}, 1.0));
  CHECK(RadiusBound(single) == doctest::Approx(50.0).epsilon(1e-14));
  CHECK(EstimateRadius(single) == doctest::Approx(50.0).epsilon(1e-14));

  Matrix sym(2, 2);
  sym << 1, 1, 0, 0;
  const LogisticProblem balanced(HandSpec(sym, {1, -1}, 1.0));
  CHECK(RadiusBound(balanced) == doctest::Approx(0.0));
  CHECK(EstimateRadius(balanced) == 1.0);
  CHECK(EstimateRadius(balanced, 2.5) == 2.5);

  const ProblemSpec synth = SynthesizeDataset(20, 10, 5, 10);
  CHECK(synth.radius > 0.0);
  CHECK(std::isfinite(synth.radius));
}

TEST_CASE("centralized solver on a quadratic") {
  const auto quad = testing::RandomQuadratic(5, 3, 8, 1.0, 0.0);
  const Optimum opt = SolveCentralized(quad, 100.0, 1e-12);
  CHECK((opt.w_star - quad.Minimizer()).norm() <= 1e-10);
  const auto tilted = testing::RandomQuadratic(5, 3, 9, 0.5, 0.7);
  const Optimum opt2 = SolveCentralized(tilted, 100.0, 1e-12);
  CHECK((opt2.w_star - tilted.Minimizer()).norm() <= 1e-10);
}

TEST_CASE("centralized solver on the logistic problem") {
  const LogisticProblem p(SynthesizeDataset(20, 10, 4, 10));
  const Optimum opt = SolveCentralized(p, p.radius());
  CHECK(p.GlobalGradient(opt.w_star).norm() <= 1e-10);
  CHECK(opt.grad_norm <= 1e-10);
  CHECK(opt.zeta == doctest::Approx(p.radius() - opt.w_star.norm()));
  CHECK(opt.zeta > 0.0);
  double worst = 0.0;
  Vector sum = Vector::Zero(10);
  for (NodeId i = 0; i < 20; ++i) {
    const Vector g = p.LocalGradient(opt.w_star, i);
    worst = std::max(worst, g.norm());
    sum += g;
  }
  CHECK(opt.nabla_max == doctest::Approx(worst).epsilon(1e-12));
  CHECK(sum.norm() <= 20 * 1e-10);
  CHECK(opt.grad_norm_at_zero == doctest::Approx(p.GlobalGradient(Vector::Zero(10)).norm()));
  CHECK_THROWS_AS(SolveCentralized(p, p.radius(), 1e-10, 3), Error);
}

TEST_CASE("synthetic datasets") {
  const ProblemSpec a = SynthesizeDataset(20, 10, 7, 30);
  const ProblemSpec b = SynthesizeDataset(20, 10, 7, 30);
  CHECK((a.train.features - b.train.features).norm() == 0.0);
  CHECK(a.train.labels == b.train.labels);
  int positives = 0;
  for (int l : a.train.labels) positives += l == 1;
  CHECK(positives == 10);
  CHECK(a.test.size() == 30);
  for (Eigen::Index i = 0; i < 20; ++i) {
    CHECK(std::abs(a.train.features.col(i).norm() - 1.0) <= 1e-12);
  }
  const ProblemSpec c = SynthesizeDataset(20, 10, 8, 30);
  CHECK((a.train.features - c.train.features).norm() > 0.0);
}

TEST_CASE("test error of the sign classifier") {
  Matrix f(2, 4);
  f << 1, -1, 0.6, -0.8, 0, 0, 0.8, 0.6;
  ProblemSpec spec = HandSpec(f, {1, -1, 1, -1}, 5.0);
  const LogisticProblem p(spec);
  Vector w(2);
  w << 1.0, 0.0;
  CHECK(p.TestError(w) == 0.0);
  CHECK(p.TestError(-w) == 1.0);
  w << 0.0, 1.0;
  CHECK(p.TestError(w) == 0.5);
}

TEST_CASE("invalid problems are rejected") {
  Matrix f(2, 2);
  f << 1, 0.5, 0, 0.5;
  CHECK_THROWS_AS(LogisticProblem(HandSpec(f, {1, -1}, 1.0)), Error);
  Matrix g(2, 2);
  g << 1, 0, 0, 1;
  CHECK_THROWS_AS(LogisticProblem(HandSpec(g, {1, 0}, 1.0)), Error);
  CHECK_THROWS_AS(LogisticProblem(HandSpec(g, {1}, 1.0)), Error);
}

TEST_CASE("IDX ingestion") {
  const IdxFiles files = WriteIdx("ok", 120);
  const IdxImages images = ReadIdxImages(files.images.string());
  CHECK(images.count == 120);
  CHECK(images.rows == 6);
  CHECK(ReadIdxLabels(files.labels.string()).size() == 120);

  const ProblemSpec spec =
      IngestIdx(files.images.string(), files.labels.string(), 20, 8, 20, 3);
  CHECK(spec.num_nodes() == 20);
  CHECK(spec.dim() == 8);
  CHECK(spec.pixel_indices.size() == 8);
  CHECK(spec.test.size() == 20);
  int zeros = 0;
  for (int l : spec.train.labels) zeros += l == 1;
  CHECK(zeros == 10);
  for (Eigen::Index i = 0; i < 20; ++i) {
    CHECK(std::abs(spec.train.features.col(i).norm() - 1.0) <= 1e-12);
  }
  const LogisticProblem p(spec);
  const Optimum opt = SolveCentralized(p, p.radius());
  CHECK(opt.zeta > 0.0);
  CHECK(p.TestError(opt.w_star) < 0.2);

  const ProblemSpec again =
      IngestIdx(files.images.string(), files.labels.string(), 20, 8, 20, 3);
  CHECK((again.train.features - spec.train.features).norm() == 0.0);
}

TEST_CASE("IDX errors") {
  const IdxFiles bad = WriteIdx("bad", 30, 0x802);
  CHECK_THROWS_AS(ReadIdxImages(bad.images.string()), Error);
  const IdxFiles small = WriteIdx("small", 30);
  CHECK_THROWS_AS(
      IngestIdx(small.images.string(), small.labels.string(), 40, 8, 10, 1), Error);
  CHECK_THROWS_AS(ReadIdxImages("/nonexistent/file.idx"), Error);
  {
    std::ofstream trunc(small.images, std::ios::binary);
    WriteBigEndian(trunc, 0x803);
  }
  CHECK_THROWS_AS(ReadIdxImages(small.images.string()), Error);
}

TEST_CASE("problem JSON round trip") {
  const ProblemSpec spec = SynthesizeDataset(7, 3, 2, 5);
  const ProblemSpec back = ProblemFromJson(ProblemToJson(spec));
  CHECK((back.train.features - spec.train.features).norm() == 0.0);
  CHECK((back.test.features - spec.test.features).norm() == 0.0);
  CHECK(back.train.labels == spec.train.labels);
  CHECK(back.radius == spec.radius);
  CHECK(back.mu == spec.mu);
  CHECK(ProblemToJson(back) == ProblemToJson(spec));
  CHECK_THROWS_AS(ProblemFromJson("[]"), Error);
}

}  // namespace
}  // namespace ncota
