// Copyright 2026 The dpasync Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpasync/synthetic.h"

#include <random>

#include "dpasync/csv.h"
#include "dpasync/errors.h"
#include "dpasync/random.h"

namespace dpasync {
namespace {

Vector DrawTruth(Eigen::Index dim, Rng& rng) {
  Vector theta(dim);
  for (Eigen::Index i = 0; i < dim; ++i) theta(i) = 2.0 * Uniform01(rng) - 1.0;
  return theta;
}

void DrawRows(const Vector& truth, double noise_std, Rng& rng,
              RowMatrix& features, Vector& targets) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      features(r, c) = normal(rng);
    }
    targets(r) = features.row(r).dot(truth) +
                 (noise_std > 0.0 ? noise_std * normal(rng) : 0.0);
  }
}

}  // namespace

SyntheticData gen_synthetic(Eigen::Index dim, std::size_t n_total,
                            std::span<const std::size_t> owner_sizes,
                            double noise_std, std::uint64_t seed,
                            double epsilon) {
  if (dim < 1) throw InvalidArgumentError("gen_synthetic: dim < 1");
  if (owner_sizes.empty()) {
    throw InvalidArgumentError("gen_synthetic: no owners");
  }
  std::size_t total = 0;
  for (std::size_t s : owner_sizes) total += s;
  if (total != n_total) {
    throw InvalidArgumentError("gen_synthetic: owner sizes must sum to n");
  }
  if (!(noise_std >= 0.0)) {
    throw InvalidArgumentError("gen_synthetic: noise_std < 0");
  }
  Rng rng(seed);
  SyntheticData out;
  out.theta_true = DrawTruth(dim, rng);
  RowMatrix x(static_cast<Eigen::Index>(n_total), dim);
  Vector y(static_cast<Eigen::Index>(n_total));
  DrawRows(out.theta_true, noise_std, rng, x, y);
  const double eps[] = {epsilon};
  out.owners = partition_rows(x, y, owner_sizes, eps);
  return out;
}

SyntheticData gen_two_cluster(Eigen::Index dim,
                              std::span<const std::size_t> owner_sizes,
                              double noise_std, std::uint64_t seed,
                              double epsilon) {
  if (dim < 1) throw InvalidArgumentError("gen_two_cluster: dim < 1");
  if (owner_sizes.empty()) {
    throw InvalidArgumentError("gen_two_cluster: no owners");
  }
  Rng truth_rng(DeriveSeed(seed, {0}));
  SyntheticData out;
  out.theta_true = DrawTruth(dim, truth_rng);
  out.theta_other = DrawTruth(dim, truth_rng);
  for (std::size_t i = 0; i < owner_sizes.size(); ++i) {
    const int owner = static_cast<int>(i) + 1;
    Rng rng(DeriveSeed(seed, {static_cast<std::uint64_t>(owner)}));
    const auto rows = static_cast<Eigen::Index>(owner_sizes[i]);
    RowMatrix x(rows, dim);
    Vector y(rows);
    DrawRows(owner % 2 == 1 ? out.theta_true : out.theta_other, noise_std, rng,
             x, y);
    out.owners.emplace_back(owner, std::move(x), std::move(y), epsilon);
  }
  return out;
}

}  // namespace dpasync
