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

// The learner side of asynchronous DP training.
//
// The learner keeps a central model theta_L and one copy theta_i per owner,
// all starting at zero. At iteration k the scheduled owner i is queried at
// the average theta_bar = (theta_L + theta_i) / 2 and the two models move:
//
//   theta_i <- Proj[theta_bar - (N rho / (T^2 sigma)) *
//                   (grad_g(theta_bar) / (2N) + (n_i / n) * noisy_grad)]
//   theta_L <- Proj[theta_bar - ((N - 1) rho / (N T^2 sigma)) *
//                   grad_g(theta_bar)]
//
// Copies of owners that were not scheduled are left untouched.

#ifndef DPASYNC_TRAINER_H_
#define DPASYNC_TRAINER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "dpasync/dp_mechanism.h"
#include "dpasync/model.h"
#include "dpasync/schedule.h"

namespace dpasync {

struct ProtocolConfig {
  int num_owners = 1;
  long horizon = 1000;
  double rho = 0.0;
  double theta_max = 1e3;
  SchedulerMode mode = SchedulerMode::kUniformIid;
  std::uint64_t master_seed = 0;
  FitnessSpec fitness;

  // Throws InvalidArgumentError unless N >= 1, T >= 1, rho > 0,
  // sigma > 0, theta_max > 0 and xi > 0.
  void Validate() const;

  // rho = T^2 sigma / (10 N (xi + xi_g)): the first step moves at most a
  // tenth of the gradient bound.
  static double DefaultRho(long horizon, double sigma, int num_owners,
                           double xi, double xi_g);

  // N rho / (T^2 sigma)
  double local_step() const;
  // (N - 1) rho / (N T^2 sigma)
  double central_step() const;
};

struct TrainerState {
  ModelParams theta_L;
  std::vector<ModelParams> theta_local;  // index j holds owner j + 1
  long k = 0;
  std::vector<ScheduleEvent> event_log;
  // (k, theta_L after iteration k)
  std::vector<std::pair<long, Vector>> trajectory;
};

TrainerState init_state(const ProtocolConfig& config, Eigen::Index dim);

Vector theta_bar(const TrainerState& state, int owner);

ModelParams local_update(const ConstVectorRef& theta_bar,
                         const QueryResponse& response,
                         const ProtocolConfig& config, std::size_t n,
                         std::size_t n_i);

ModelParams central_update(const ConstVectorRef& theta_bar,
                           const ProtocolConfig& config);

struct RunOptions {
  // Snapshot theta_L every stride iterations (and at k = T); 0 disables.
  long trajectory_stride = 1;
  // Called after every iteration.
  std::function<void(const ScheduleEvent&, const TrainerState&)> observer;
};

// Runs all T iterations. datasets[j] must carry owner_id j + 1 and
// config.num_owners must equal datasets.size(). Deterministic given
// config.master_seed.
TrainerState run(const ProtocolConfig& config,
                 std::span<const OwnerDataset> datasets,
                 const RunOptions& options = {});

}  // namespace dpasync

#endif  // DPASYNC_TRAINER_H_
