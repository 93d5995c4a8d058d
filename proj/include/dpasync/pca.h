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

#ifndef DPASYNC_PCA_H_
#define DPASYNC_PCA_H_

#include <cstddef>
#include <string>

#include "dpasync/model.h"

namespace dpasync {

// Feature dictionary the learner fits on a public tail of the data and
// ships to owners. Scores are raw (not variance-normalized).
struct PcaDictionary {
  Vector mean;
  Matrix components;  // k x p, orthonormal rows
  Vector explained_variance;
  std::size_t fit_rows = 0;

  Eigen::Index k() const { return components.rows(); }
  Eigen::Index input_dim() const { return components.cols(); }

  std::string ToJson() const;
  static PcaDictionary FromJson(const std::string& json);
};

struct PcaOptions {
  double tolerance = 1e-9;
  long max_iterations = 200'000;
};

// Top-k principal directions of the last sample_size rows, by power
// iteration with deflation on the sample covariance. Throws
// InvalidArgumentError if k exceeds the numerical rank.
PcaDictionary fit_pca(const RowMatrix& table, Eigen::Index k,
                      std::size_t sample_size, const PcaOptions& options = {});

// (row - mean) * components'.
RowMatrix apply_pca(const PcaDictionary& dict, const RowMatrix& table);

}  // namespace dpasync

#endif  // DPASYNC_PCA_H_
