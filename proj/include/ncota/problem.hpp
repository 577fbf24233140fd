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

#ifndef NCOTA_PROBLEM_HPP_
#define NCOTA_PROBLEM_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ncota/types.hpp"

namespace ncota {

// Sum-separable objective F(w) = (1/N) sum_i f_i(w), one local loss per
// node. Implementations must be reentrant.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t num_nodes() const = 0;
  virtual std::size_t dim() const = 0;
  // mu and L of every f_i.
  virtual double strong_convexity() const = 0;
  virtual double smoothness() const = 0;

  virtual double LocalLoss(const Vector& w, NodeId i) const = 0;
  virtual Vector LocalGradient(const Vector& w, NodeId i) const = 0;
  virtual Matrix LocalHessian(const Vector& w, NodeId i) const = 0;

  double GlobalLoss(const Vector& w) const;
  Vector GlobalGradient(const Vector& w) const;
};

// Labelled unit-norm feature vectors, one per column.
struct Dataset {
  Matrix features;          // d x n
  std::vector<int> labels;  // +1 or -1

  std::size_t size() const noexcept { return labels.size(); }
};

struct ProblemSpec {
  Dataset train;  // column i belongs to node i
  Dataset test;
  double mu = 0.01;
  // Feasible radius of the ball W.
  double radius = 1.0;
  std::string source = "synthetic";
  std::uint64_t seed = 0;
  // IDX ingestion only: selected pixel positions.
  std::vector<int> pixel_indices;

  std::size_t num_nodes() const noexcept { return train.size(); }
  std::size_t dim() const noexcept {
    return static_cast<std::size_t>(train.features.rows());
  }
};

// f_i(w) = (mu/2) ||w||^2 + ln(1 + exp(-l_i d_i^T w)), mu = 0.01 and
// L = mu + 1/4 for unit-norm features.
class LogisticProblem final : public Objective {
 public:
  explicit LogisticProblem(ProblemSpec spec);

  const ProblemSpec& spec() const noexcept { return spec_; }
  double radius() const noexcept { return spec_.radius; }

  std::size_t num_nodes() const override { return spec_.num_nodes(); }
  std::size_t dim() const override { return spec_.dim(); }
  double strong_convexity() const override { return spec_.mu; }
  double smoothness() const override { return spec_.mu + 0.25; }

  double LocalLoss(const Vector& w, NodeId i) const override;
  Vector LocalGradient(const Vector& w, NodeId i) const override;
  Matrix LocalHessian(const Vector& w, NodeId i) const override;

  // Fraction of test samples misclassified by sign(w^T d).
  double TestError(const Vector& w) const;

 private:
  ProblemSpec spec_;
};

// ||grad F(0)|| / mu: the optimum lies in this ball by strong convexity.
double RadiusBound(const Objective& objective);
// RadiusBound floored at `r_min` so symmetric data cannot collapse W.
double EstimateRadius(const Objective& objective, double r_min = 1.0);

struct Optimum {
  Vector w_star;
  double grad_norm = 0.0;          // ||grad F(w*)||
  double grad_norm_at_zero = 0.0;  // ||grad F(0)||
  double zeta = 0.0;               // R - ||w*||
  double nabla_max = 0.0;          // max_i ||grad f_i(w*)||
  std::size_t iterations = 0;
};

// Projected full-gradient descent with stepsize 2 / (mu + L) until the
// projected-gradient residual drops below `tol`.
Optimum SolveCentralized(const Objective& objective, double radius,
                         double tol = 1e-10,
                         std::size_t max_iterations = 1000000);

// Two unit-norm Gaussian class centroids; node i gets label +1 for even i,
// -1 for odd i and a unit-normalized noisy copy of its class centroid.
ProblemSpec SynthesizeDataset(std::size_t n_nodes, std::size_t dim,
                              std::uint64_t seed, std::size_t n_test = 200,
                              double noise = 0.5, double r_min = 1.0);

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major
};

IdxImages ReadIdxImages(const std::string& path);
std::vector<std::uint8_t> ReadIdxLabels(const std::string& path);

// Digits {0, 1} only: a balanced set of `n_nodes` training images (one per
// node) and `n_test` held-out images. The `dim` pixels with the largest mean
// energy over the training images become the features; label +1 for digit 0.
// Images whose selected pixels are all zero cannot be normalized and are
// skipped.
ProblemSpec IngestIdx(const std::string& images_path,
                      const std::string& labels_path, std::size_t n_nodes,
                      std::size_t dim, std::size_t n_test, std::uint64_t seed,
                      double r_min = 1.0);

std::string ProblemToJson(const ProblemSpec& spec);
ProblemSpec ProblemFromJson(const std::string& text);

}  // namespace ncota

#endif  // NCOTA_PROBLEM_HPP_
