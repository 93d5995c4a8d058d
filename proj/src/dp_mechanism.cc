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

#include "dpasync/dp_mechanism.h"

#include <cmath>
#include <string>

#include "dpasync/errors.h"

namespace dpasync {

BudgetLedger::BudgetLedger(long horizon, double epsilon)
    : horizon_(horizon), epsilon_(epsilon) {
  if (horizon_ < 1) throw InvalidArgumentError("BudgetLedger: horizon < 1");
  if (!(epsilon_ > 0.0)) {
    throw InvalidArgumentError("BudgetLedger: epsilon must be positive");
  }
}

void BudgetLedger::Charge() {
  if (issued_ >= horizon_) {
    throw BudgetExhaustedError("owner budget exhausted after " +
                               std::to_string(horizon_) + " responses");
  }
  ++issued_;
}

Vector true_query(const OwnerDataset& dataset, const ConstVectorRef& theta,
                  double xi) {
  if (!(xi > 0.0)) throw InvalidArgumentError("true_query: xi must be > 0");
  if (theta.size() != dataset.dim()) {
    throw InvalidArgumentError("true_query: dimension mismatch");
  }
  const RowMatrix& x = dataset.features();
  const Vector& y = dataset.targets();
  const Vector& l1 = dataset.row_l1_norms();
  Vector sum = Vector::Zero(theta.size());
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    // record_grad = coef * x_j with ||.||_1 = |coef| * ||x_j||_1.
    double coef = -2.0 * (y(j) - x.row(j).dot(theta));
    const double norm = std::abs(coef) * l1(j);
    if (norm > xi) {
      coef *= xi / norm;
      while (std::abs(coef) * l1(j) > xi) coef = std::nextafter(coef, 0.0);
    }
    sum.noalias() += coef * x.row(j).transpose();
  }
  return sum / static_cast<double>(dataset.size());
}

double laplace_scale(double xi, long horizon, std::size_t n_i,
                     double epsilon_i) {
  if (!(xi > 0.0) || horizon <= 0 || n_i == 0 || !(epsilon_i > 0.0)) {
    throw InvalidArgumentError("laplace_scale: arguments must be positive");
  }
  return 2.0 * xi * static_cast<double>(horizon) /
         (static_cast<double>(n_i) * epsilon_i);
}

double laplace_from_uniform(double u, double scale) {
  if (u == 0.0) return 0.0;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(u));
  return u > 0.0 ? magnitude : -magnitude;
}

Vector sample_laplace(double scale, Rng& rng, Eigen::Index dim) {
  if (!(scale >= 0.0)) throw InvalidArgumentError("sample_laplace: scale < 0");
  Vector out(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    double u;
    // u = -1/2 maps to an infinite draw; probability 2^-53, redraw.
    do {
      u = Uniform01(rng) - 0.5;
    } while (u == -0.5);
    out(i) = laplace_from_uniform(u, scale);
  }
  return out;
}

QueryResponse respond(const OwnerDataset& dataset, const ConstVectorRef& theta,
                      long k, double xi, BudgetLedger& ledger, Rng& rng) {
  if (k < 1 || k > ledger.horizon()) {
    throw InvalidArgumentError("respond: iteration outside 1..T");
  }
  ledger.Charge();
  const double scale =
      laplace_scale(xi, ledger.horizon(), dataset.size(), ledger.epsilon());
  QueryResponse out;
  out.noisy_grad = true_query(dataset, theta, xi);
  if (scale > 0.0) out.noisy_grad += sample_laplace(scale, rng, theta.size());
  out.owner_id = dataset.owner_id();
  out.iteration_k = k;
  out.noise_scale_used = scale;
  return out;
}

DataOwner::DataOwner(const OwnerDataset& dataset, long horizon, double xi,
                     std::uint64_t master_seed)
    : dataset_(&dataset),
      xi_(xi),
      ledger_(horizon, dataset.epsilon()),
      rng_(MakeStream(master_seed, StreamTag::kOwnerNoise,
                      {static_cast<std::uint64_t>(dataset.owner_id())})) {}

QueryResponse DataOwner::Respond(const ConstVectorRef& theta, long k) {
  return respond(*dataset_, theta, k, xi_, ledger_, rng_);
}

}  // namespace dpasync
