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

// Owner-side query answering.
//
// An owner holding n_i records with total budget epsilon_i answers at most T
// gradient queries. Each answer is the clipped mean loss-gradient plus i.i.d.
// per-coordinate Laplace noise of scale 2 xi T / (n_i epsilon_i): the l1
// sensitivity of the clipped mean is 2 xi / n_i and each answer spends
// epsilon_i / T, so the whole response sequence is epsilon_i-DP.

#ifndef DPASYNC_DP_MECHANISM_H_
#define DPASYNC_DP_MECHANISM_H_

#include <cstddef>

#include "dpasync/model.h"
#include "dpasync/random.h"

namespace dpasync {

struct QueryResponse {
  Vector noisy_grad;
  int owner_id = 0;
  long iteration_k = 0;
  double noise_scale_used = 0.0;
};

// Per-owner response counter against the horizon T.
class BudgetLedger {
 public:
  BudgetLedger(long horizon, double epsilon);

  long horizon() const { return horizon_; }
  long responses_issued() const { return issued_; }
  long remaining() const { return horizon_ - issued_; }
  double epsilon() const { return epsilon_; }
  double per_round_epsilon() const { return epsilon_ / static_cast<double>(horizon_); }

  // Records one response. Throws BudgetExhaustedError once T are issued.
  void Charge();

 private:
  long horizon_;
  double epsilon_;
  long issued_ = 0;
};

// (1/n_i) sum of clip_grad(record_grad) over the owner's records.
Vector true_query(const OwnerDataset& dataset, const ConstVectorRef& theta,
                  double xi);

// 2 xi T / (n_i epsilon_i). epsilon_i = +inf yields 0 (noise disabled).
double laplace_scale(double xi, long horizon, std::size_t n_i,
                     double epsilon_i);

// Inverse CDF for u in (-1/2, 1/2): -b sign(u) ln(1 - 2|u|).
double laplace_from_uniform(double u, double scale);

// dim i.i.d. Laplace(0, scale) draws. scale == 0 returns zeros.
Vector sample_laplace(double scale, Rng& rng, Eigen::Index dim);

// Answers the k-th query (1-based) at theta. Charges the ledger first, so a
// refused query leaves the RNG untouched.
QueryResponse respond(const OwnerDataset& dataset, const ConstVectorRef& theta,
                      long k, double xi, BudgetLedger& ledger, Rng& rng);

// Bundles an owner's data with its ledger and private noise stream.
class DataOwner {
 public:
  DataOwner(const OwnerDataset& dataset, long horizon, double xi,
            std::uint64_t master_seed);

  QueryResponse Respond(const ConstVectorRef& theta, long k);

  const OwnerDataset& dataset() const { return *dataset_; }
  const BudgetLedger& ledger() const { return ledger_; }

 private:
  const OwnerDataset* dataset_;
  double xi_;
  BudgetLedger ledger_;
  Rng rng_;
};

}  // namespace dpasync

#endif  // DPASYNC_DP_MECHANISM_H_
