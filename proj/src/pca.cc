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

#include "dpasync/pca.h"

#include <cmath>

#include "json.hpp"

#include "dpasync/errors.h"

namespace dpasync {
namespace {

// Relative eigenvalue floor below which a direction counts as null.
constexpr double kRankTolerance = 1e-12;

void FixSign(Vector& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

}  // namespace

PcaDictionary fit_pca(const RowMatrix& table, Eigen::Index k,
                      std::size_t sample_size, const PcaOptions& options) {
  const Eigen::Index p = table.cols();
  const auto m = static_cast<Eigen::Index>(sample_size);
  if (sample_size < 2 || m > table.rows()) {
    throw InvalidArgumentError("fit_pca: need 2 <= sample_size <= rows");
  }
  if (k < 1 || k > p) throw InvalidArgumentError("fit_pca: need 1 <= k <= p");

  const auto sample = table.bottomRows(m);
  PcaDictionary dict;
  dict.fit_rows = sample_size;
  dict.mean = sample.colwise().mean().transpose();
  const RowMatrix centered = sample.rowwise() - dict.mean.transpose();
  Matrix cov = Matrix::Zero(p, p);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(m - 1);

  dict.components.resize(k, p);
  dict.explained_variance.resize(k);
  Matrix deflated = cov;
  double top = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    // Start away from every previous component.
    Vector v = Vector::LinSpaced(p, 1.0, 2.0) +
               Vector::Unit(p, j % p) * static_cast<double>(p);
    double value = 0.0;
    bool converged = false;
    for (long it = 0; it < options.max_iterations; ++it) {
      for (Eigen::Index i = 0; i < j; ++i) {
        v -= dict.components.row(i).dot(v) * dict.components.row(i).transpose();
      }
      const double norm = v.norm();
      if (norm == 0.0) break;
      v /= norm;
      const Vector w = deflated * v;
      value = v.dot(w);
      const double scale = std::max(top, std::abs(value));
      if (scale == 0.0 || (w - value * v).norm() <= options.tolerance * scale) {
        converged = true;
        break;
      }
      v = w;
    }
    if (j == 0) top = value;
    if (!(value > kRankTolerance * top) || top <= 0.0) {
      throw InvalidArgumentError("fit_pca: k exceeds the rank of the sample");
    }
    if (!converged) {
      throw ConvergenceError("fit_pca: power iteration did not converge",
                             value);
    }
    FixSign(v);
    dict.components.row(j) = v.transpose();
    dict.explained_variance(j) = value;
    deflated -= value * v * v.transpose();
  }
  return dict;
}

RowMatrix apply_pca(const PcaDictionary& dict, const RowMatrix& table) {
  if (table.cols() != dict.input_dim()) {
    throw InvalidArgumentError("apply_pca: dimension mismatch");
  }
  return (table.rowwise() - dict.mean.transpose()) *
         dict.components.transpose();
}

std::string PcaDictionary::ToJson() const {
  nlohmann::ordered_json j;
  j["fit_rows"] = fit_rows;
  j["mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
  j["explained_variance"] =
      std::vector<double>(explained_variance.data(),
                          explained_variance.data() + explained_variance.size());
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    const Vector row = components.row(r).transpose();
    rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  j["components"] = rows;
  j["scores"] = "raw";
  return j.dump(2);
}

PcaDictionary PcaDictionary::FromJson(const std::string& json) {
  const auto j = nlohmann::json::parse(json);
  PcaDictionary d;
  d.fit_rows = j.at("fit_rows").get<std::size_t>();
  const auto mean = j.at("mean").get<std::vector<double>>();
  d.mean = Eigen::Map<const Vector>(mean.data(),
                                    static_cast<Eigen::Index>(mean.size()));
  const auto var = j.at("explained_variance").get<std::vector<double>>();
  d.explained_variance = Eigen::Map<const Vector>(
      var.data(), static_cast<Eigen::Index>(var.size()));
  const auto rows = j.at("components").get<std::vector<std::vector<double>>>();
  d.components.resize(static_cast<Eigen::Index>(rows.size()), d.mean.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != mean.size()) {
      throw InvalidArgumentError("pca json: component length mismatch");
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      d.components(static_cast<Eigen::Index>(r),
                   static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return d;
}

}  // namespace dpasync
