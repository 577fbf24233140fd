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

#include "ncota/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "ncota/codec.hpp"
#include "ncota/error.hpp"
#include "ncota/rng.hpp"

namespace ncota {

namespace {

// ln(1 + e^t) without overflow.
double Softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double Sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void CheckDataset(const Dataset& data, const char* what) {
  if (!(static_cast<std::size_t>(data.features.cols()) == data.labels.size())) {
    Fail(ErrorCode::kInvalidConfig,
         std::string(what) + ": feature and label counts differ");
  }
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    if (!(data.labels[i] == 1 || data.labels[i] == -1)) {
      Fail(ErrorCode::kInvalidConfig,
           std::string(what) + ": labels must be +1 or -1");
    }
    const double norm = data.features.col(static_cast<Eigen::Index>(i)).norm();
    if (!(std::abs(norm - 1.0) <= 1e-9)) {
      Fail(ErrorCode::kInvalidConfig,
           std::string(what) + ": feature vectors must have unit norm");
    }
  }
}

std::uint32_t ReadBigEndian32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!(in.gcount() == 4)) {
    Fail(ErrorCode::kParse,
         path + ": truncated IDX header");
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::vector<std::uint8_t> ReadPayload(std::istream& in, std::size_t bytes,
                                      const std::string& path) {
  std::vector<std::uint8_t> out(bytes);
  in.read(reinterpret_cast<char*>(out.data()),
          static_cast<std::streamsize>(bytes));
  if (!(static_cast<std::size_t>(in.gcount()) == bytes)) {
    Fail(ErrorCode::kParse,
         path + ": IDX payload shorter than its header declares");
  }
  return out;
}

std::ifstream OpenBinary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!(in.good())) {
    Fail(ErrorCode::kIo,
         "cannot open " + path);
  }
  return in;
}

nlohmann::json DatasetToJson(const Dataset& data) {
  nlohmann::json features = nlohmann::json::array();
  for (Eigen::Index i = 0; i < data.features.cols(); ++i) {
    features.push_back(std::vector<double>(
        data.features.col(i).data(),
        data.features.col(i).data() + data.features.rows()));
  }
  return {{"features", features}, {"labels", data.labels}};
}

Dataset DatasetFromJson(const nlohmann::json& j, std::size_t expected_dim) {
  Dataset out;
  const auto columns = j.at("features").get<std::vector<std::vector<double>>>();
  out.labels = j.at("labels").get<std::vector<int>>();
  const auto dim = static_cast<Eigen::Index>(
      columns.empty() ? expected_dim : columns.front().size());
  out.features.resize(dim, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < columns.size(); ++i) {
    Require(static_cast<Eigen::Index>(columns[i].size()) == dim,
            ErrorCode::kParse, "problem JSON: ragged feature vectors");
    for (Eigen::Index k = 0; k < dim; ++k) {
      out.features(k, static_cast<Eigen::Index>(i)) = columns[i][k];
    }
  }
  return out;
}

}  // namespace

double Objective::GlobalLoss(const Vector& w) const {
  double total = 0.0;
  for (NodeId i = 0; i < num_nodes(); ++i) total += LocalLoss(w, i);
  return total / static_cast<double>(num_nodes());
}

Vector Objective::GlobalGradient(const Vector& w) const {
  Vector total = Vector::Zero(static_cast<Eigen::Index>(dim()));
  for (NodeId i = 0; i < num_nodes(); ++i) total += LocalGradient(w, i);
  return total / static_cast<double>(num_nodes());
}

LogisticProblem::LogisticProblem(ProblemSpec spec) : spec_(std::move(spec)) {
  Require(spec_.num_nodes() >= 1, ErrorCode::kInvalidConfig,
          "logistic problem needs at least one node");
  Require(spec_.dim() >= 1, ErrorCode::kInvalidConfig,
          "logistic problem needs dimension >= 1");
  Require(spec_.mu > 0.0, ErrorCode::kInvalidConfig,
          "regularization must be positive");
  Require(spec_.radius > 0.0, ErrorCode::kInvalidConfig,
          "feasible radius must be positive");
  CheckDataset(spec_.train, "training set");
  if (spec_.test.size() > 0) {
    Require(spec_.test.features.rows() == spec_.train.features.rows(),
            ErrorCode::kInvalidConfig, "test set dimension mismatch");
    CheckDataset(spec_.test, "test set");
  }
}

double LogisticProblem::LocalLoss(const Vector& w, NodeId i) const {
  const auto col = static_cast<Eigen::Index>(i);
  const double margin =
      static_cast<double>(spec_.train.labels[i]) *
      spec_.train.features.col(col).dot(w);
  return 0.5 * spec_.mu * w.squaredNorm() + Softplus(-margin);
}

Vector LogisticProblem::LocalGradient(const Vector& w, NodeId i) const {
  const auto col = static_cast<Eigen::Index>(i);
  const double label = static_cast<double>(spec_.train.labels[i]);
  const double margin = label * spec_.train.features.col(col).dot(w);
  return spec_.mu * w -
         (label * Sigmoid(-margin)) * spec_.train.features.col(col);
}

Matrix LogisticProblem::LocalHessian(const Vector& w, NodeId i) const {
  const auto col = static_cast<Eigen::Index>(i);
  const auto& feature = spec_.train.features.col(col);
  const double s = Sigmoid(feature.dot(w));
  const auto d = static_cast<Eigen::Index>(dim());
  Matrix h = spec_.mu * Matrix::Identity(d, d);
  h.noalias() += (s * (1.0 - s)) * feature * feature.transpose();
  return h;
}

double LogisticProblem::TestError(const Vector& w) const {
  const Dataset& test = spec_.test;
  if (test.size() == 0) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t k = 0; k < test.size(); ++k) {
    const double score = test.features.col(static_cast<Eigen::Index>(k)).dot(w);
    const int predicted = score > 0.0 ? 1 : -1;
    if (predicted != test.labels[k]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

double RadiusBound(const Objective& objective) {
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(objective.dim()));
  return objective.GlobalGradient(zero).norm() / objective.strong_convexity();
}

double EstimateRadius(const Objective& objective, double r_min) {
  return std::max(RadiusBound(objective), r_min);
}

Optimum SolveCentralized(const Objective& objective, double radius, double tol,
                         std::size_t max_iterations) {
  Require(tol > 0.0, ErrorCode::kInvalidArgument, "tolerance must be positive");
  Require(radius > 0.0, ErrorCode::kInvalidArgument, "radius must be positive");
  const double mu = objective.strong_convexity();
  const double step = 2.0 / (mu + objective.smoothness());
  const auto d = static_cast<Eigen::Index>(objective.dim());

  Optimum out;
  out.grad_norm_at_zero = objective.GlobalGradient(Vector::Zero(d)).norm();
  Vector w = Vector::Zero(d);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const Vector next = ProjectToBall(w - step * objective.GlobalGradient(w), radius);
    const double residual = (next - w).norm() / step;
    w = next;
    if (residual <= tol) {
      // The residual above lags one step behind; re-certify at the iterate.
      const Vector grad = objective.GlobalGradient(w);
      const double certificate =
          (ProjectToBall(w - step * grad, radius) - w).norm() / step;
      if (certificate > tol) continue;
      out.w_star = w;
      out.grad_norm = grad.norm();
      out.iterations = it + 1;
      out.zeta = radius - w.norm();
      for (NodeId i = 0; i < objective.num_nodes(); ++i) {
        out.nabla_max =
            std::max(out.nabla_max, objective.LocalGradient(w, i).norm());
      }
      return out;
    }
  }
  Fail(ErrorCode::kNotConverged,
       "centralized solver did not reach tolerance in " +
           std::to_string(max_iterations) + " iterations");
}

ProblemSpec SynthesizeDataset(std::size_t n_nodes, std::size_t dim,
                              std::uint64_t seed, std::size_t n_test,
                              double noise, double r_min) {
  Require(n_nodes >= 1 && dim >= 1, ErrorCode::kInvalidConfig,
          "synthetic dataset needs N >= 1 and d >= 1");
  Require(noise >= 0.0, ErrorCode::kInvalidConfig,
          "noise level must be non-negative");
  const auto d = static_cast<Eigen::Index>(dim);
  const StreamFactory streams(HashKey({seed, 0x5359u}));

  auto gaussian = [d](RandomStream& rng) {
    Vector g(d);
    for (Eigen::Index k = 0; k < d; ++k) g[k] = rng.Normal();
    return g;
  };
  auto unit = [](Vector v) {
    const double norm = v.norm();
    Require(norm > 0.0, ErrorCode::kInvalidConfig,
            "degenerate synthetic draw");
    return Vector(v / norm);
  };

  RandomStream centroid_rng = streams.Stream(0, 0, StreamKind::kDataset);
  const Vector positive = unit(gaussian(centroid_rng));
  const Vector negative = unit(gaussian(centroid_rng));
  const double spread = noise / std::sqrt(static_cast<double>(dim));

  auto draw = [&](std::size_t count, std::uint64_t bank) {
    Dataset out;
    out.features.resize(d, static_cast<Eigen::Index>(count));
    out.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      RandomStream rng = streams.Stream(bank, i + 1, StreamKind::kDataset);
      const int label = i % 2 == 0 ? 1 : -1;
      const Vector& centre = label == 1 ? positive : negative;
      out.features.col(static_cast<Eigen::Index>(i)) =
          unit(centre + spread * gaussian(rng));
      out.labels[i] = label;
    }
    return out;
  };

  ProblemSpec spec;
  spec.train = draw(n_nodes, 1);
  spec.test = draw(n_test, 2);
  spec.source = "synthetic";
  spec.seed = seed;
  spec.radius = EstimateRadius(LogisticProblem(spec), r_min);
  return spec;
}

IdxImages ReadIdxImages(const std::string& path) {
  std::ifstream in = OpenBinary(path);
  const std::uint32_t magic = ReadBigEndian32(in, path);
  if (!(magic == 0x00000803u)) {
    Fail(ErrorCode::kParse,
         path + ": not an IDX image file (bad magic)");
  }
  IdxImages out;
  out.count = ReadBigEndian32(in, path);
  out.rows = ReadBigEndian32(in, path);
  out.cols = ReadBigEndian32(in, path);
  if (!(out.rows > 0 && out.cols > 0)) {
    Fail(ErrorCode::kParse,
         path + ": empty image geometry");
  }
  out.pixels = ReadPayload(in, out.count * out.rows * out.cols, path);
  return out;
}

std::vector<std::uint8_t> ReadIdxLabels(const std::string& path) {
  std::ifstream in = OpenBinary(path);
  const std::uint32_t magic = ReadBigEndian32(in, path);
  if (!(magic == 0x00000801u)) {
    Fail(ErrorCode::kParse,
         path + ": not an IDX label file (bad magic)");
  }
  const std::size_t count = ReadBigEndian32(in, path);
  return ReadPayload(in, count, path);
}

ProblemSpec IngestIdx(const std::string& images_path,
                      const std::string& labels_path, std::size_t n_nodes,
                      std::size_t dim, std::size_t n_test, std::uint64_t seed,
                      double r_min) {
  const IdxImages images = ReadIdxImages(images_path);
  const std::vector<std::uint8_t> labels = ReadIdxLabels(labels_path);
  Require(images.count == labels.size(), ErrorCode::kParse,
          "IDX image and label counts differ");
  const std::size_t pixels = images.rows * images.cols;
  Require(dim >= 1 && dim <= pixels, ErrorCode::kInvalidConfig,
          "feature dimension must be between 1 and the pixel count");
  Require(n_nodes >= 2, ErrorCode::kInvalidConfig, "need at least two nodes");

  // Per-class pools in a seed-dependent order.
  std::vector<std::size_t> pool[2];
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] <= 1) pool[labels[k]].push_back(k);
  }
  RandomStream rng(HashKey({seed, 0x1d8u}));
  for (auto& p : pool) {
    for (std::size_t k = p.size(); k > 1; --k) {
      const auto pick = std::min(
          static_cast<std::size_t>(rng.Uniform() * static_cast<double>(k)), k - 1);
      std::swap(p[k - 1], p[pick]);
    }
  }
  const std::size_t train_per_class[2] = {n_nodes - n_nodes / 2, n_nodes / 2};
  const std::size_t test_per_class[2] = {n_test - n_test / 2, n_test / 2};

  auto pixel = [&](std::size_t image, std::size_t k) {
    return static_cast<double>(images.pixels[image * pixels + k]) / 255.0;
  };

  // Candidate training images per class, in pool order; more are drawn
  // on demand if some turn out unusable after pixel selection.
  for (int digit = 0; digit < 2; ++digit) {
    if (!(pool[digit].size() >= train_per_class[digit] + test_per_class[digit])) {
      Fail(ErrorCode::kInvalidConfig,
           "IDX file has too few images of digit " + std::to_string(digit));
    }
  }
  std::vector<std::size_t> train_images;
  for (int digit = 0; digit < 2; ++digit) {
    train_images.insert(train_images.end(), pool[digit].begin(),
                        pool[digit].begin() +
                            static_cast<std::ptrdiff_t>(train_per_class[digit]));
  }

  // Largest mean energy over the training split; ties keep the lower index.
  std::vector<double> energy(pixels, 0.0);
  for (std::size_t image : train_images) {
    for (std::size_t k = 0; k < pixels; ++k) energy[k] += pixel(image, k) * pixel(image, k);
  }
  std::vector<int> order(pixels);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return energy[a] > energy[b]; });
  std::vector<int> selected(order.begin(),
                            order.begin() + static_cast<std::ptrdiff_t>(dim));
  std::sort(selected.begin(), selected.end());

  const auto d = static_cast<Eigen::Index>(dim);
  auto featurize = [&](std::size_t image, Vector& out) {
    out.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) out[k] = pixel(image, selected[k]);
    const double norm = out.norm();
    if (norm == 0.0) return false;
    out /= norm;
    return true;
  };

  auto collect = [&](std::size_t (&cursor)[2], const std::size_t (&want)[2]) {
    Dataset out;
    std::vector<Vector> columns;
    for (int digit = 0; digit < 2; ++digit) {
      std::size_t taken = 0;
      while (taken < want[digit]) {
        if (!(cursor[digit] < pool[digit].size())) {
          Fail(ErrorCode::kInvalidConfig,
               "not enough usable images of digit " + std::to_string(digit));
        }
        Vector f;
        if (featurize(pool[digit][cursor[digit]++], f)) {
          columns.push_back(std::move(f));
          out.labels.push_back(digit == 0 ? 1 : -1);
          ++taken;
        }
      }
    }
    out.features.resize(d, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out.features.col(static_cast<Eigen::Index>(i)) = columns[i];
    }
    return out;
  };

  std::size_t cursor[2] = {0, 0};
  ProblemSpec spec;
  spec.train = collect(cursor, train_per_class);
  spec.test = collect(cursor, test_per_class);
  spec.source = "idx";
  spec.seed = seed;
  spec.pixel_indices = selected;
  spec.radius = EstimateRadius(LogisticProblem(spec), r_min);
  return spec;
}

std::string ProblemToJson(const ProblemSpec& spec) {
  nlohmann::json j;
  j["source"] = spec.source;
  j["seed"] = spec.seed;
  j["n"] = spec.num_nodes();
  j["d"] = spec.dim();
  j["mu"] = spec.mu;
  j["radius"] = spec.radius;
  j["pixel_indices"] = spec.pixel_indices;
  j["train"] = DatasetToJson(spec.train);
  j["test"] = DatasetToJson(spec.test);
  return j.dump();
}

ProblemSpec ProblemFromJson(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    ProblemSpec spec;
    spec.source = j.value("source", std::string("synthetic"));
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.mu = j.value("mu", 0.01);
    spec.radius = j.at("radius").get<double>();
    spec.pixel_indices = j.value("pixel_indices", std::vector<int>{});
    spec.train = DatasetFromJson(j.at("train"), 0);
    spec.test = DatasetFromJson(j.at("test"), spec.dim());
    // Validates invariants.
    (void)LogisticProblem(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("problem JSON: ") + e.what());
  }
}

}  // namespace ncota
