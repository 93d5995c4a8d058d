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

#ifndef DPASYNC_SYNTHETIC_H_
#define DPASYNC_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dpasync/model.h"

namespace dpasync {

struct SyntheticData {
  std::vector<OwnerDataset> owners;
  Vector theta_true;   // ground truth of owner 1's population
  Vector theta_other;  // second population (two-cluster data only)
};

// theta_true ~ U[-1, 1]^p, x ~ N(0, I), y = theta_true'x + N(0, noise_std^2).
// n_total rows are drawn from one stream and split contiguously by
// owner_sizes (which must sum to n_total).
SyntheticData gen_synthetic(
    Eigen::Index dim, std::size_t n_total,
    std::span<const std::size_t> owner_sizes, double noise_std,
    std::uint64_t seed,
    double epsilon = std::numeric_limits<double>::infinity());

// Two populations with independent ground truths: odd owners follow
// theta_true, even owners theta_other. Each owner's rows come from its own
// stream, so owner j's records do not depend on how many owners exist.
SyntheticData gen_two_cluster(
    Eigen::Index dim, std::span<const std::size_t> owner_sizes,
    double noise_std, std::uint64_t seed,
    double epsilon = std::numeric_limits<double>::infinity());

}  // namespace dpasync

#endif  // DPASYNC_SYNTHETIC_H_
