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

#include "dpasync/trainer.h"

#include <string>

#include "dpasync/errors.h"

namespace dpasync {

void ProtocolConfig::Validate() const {
  if (num_owners < 1) throw InvalidArgumentError("config: N must be >= 1");
  if (horizon < 1) throw InvalidArgumentError("config: T must be >= 1");
  if (!(rho > 0.0)) throw InvalidArgumentError("config: rho must be > 0");
  if (!(fitness.sigma() > 0.0)) {
    throw InvalidArgumentError("config: sigma = 2 reg_coeff must be > 0");
  }
  if (!(theta_max > 0.0)) {
    throw InvalidArgumentError("config: theta_max must be > 0");
  }
  if (!(fitness.xi > 0.0)) throw InvalidArgumentError("config: xi must be > 0");
}

double ProtocolConfig::DefaultRho(long horizon, double sigma, int num_owners,
                                  double xi, double xi_g) {
  const double t = static_cast<double>(horizon);
  return t * t * sigma / (10.0 * num_owners * (xi + xi_g));
}

double ProtocolConfig::local_step() const {
  const double t = static_cast<double>(horizon);
  return num_owners * rho / (t * t * fitness.sigma());
}

double ProtocolConfig::central_step() const {
  const double t = static_cast<double>(horizon);
  return (num_owners - 1) * rho / (num_owners * t * t * fitness.sigma());
}

TrainerState init_state(const ProtocolConfig& config, Eigen::Index dim) {
  TrainerState state;
  state.theta_L = ModelParams{Vector::Zero(dim), config.theta_max};
  state.theta_local.assign(static_cast<std::size_t>(config.num_owners),
                           state.theta_L);
  return state;
}

Vector theta_bar(const TrainerState& state, int owner) {
  if (owner < 1 || owner > static_cast<int>(state.theta_local.size())) {
    throw InvalidArgumentError("theta_bar: owner out of range");
  }
  return 0.5 * (state.theta_L.theta +
                state.theta_local[static_cast<std::size_t>(owner - 1)].theta);
}

ModelParams local_update(const ConstVectorRef& theta_bar,
                         const QueryResponse& response,
                         const ProtocolConfig& config, std::size_t n,
                         std::size_t n_i) {
  config.Validate();
  if (n == 0 || n_i == 0 || n_i > n) {
    throw InvalidArgumentError("local_update: need 0 < n_i <= n");
  }
  if (response.noisy_grad.size() != theta_bar.size()) {
    throw InvalidArgumentError("local_update: dimension mismatch");
  }
  const double share = static_cast<double>(n_i) / static_cast<double>(n);
  const Vector direction =
      reg_grad(config.fitness, theta_bar) / (2.0 * config.num_owners) +
      share * response.noisy_grad;
  return project(theta_bar - config.local_step() * direction,
                 config.theta_max);
}

ModelParams central_update(const ConstVectorRef& theta_bar,
                           const ProtocolConfig& config) {
  config.Validate();
  return project(
      theta_bar - config.central_step() * reg_grad(config.fitness, theta_bar),
      config.theta_max);
}

TrainerState run(const ProtocolConfig& config,
                 std::span<const OwnerDataset> datasets,
                 const RunOptions& options) {
  config.Validate();
  if (static_cast<int>(datasets.size()) != config.num_owners) {
    throw InvalidArgumentError("run: expected " +
                               std::to_string(config.num_owners) +
                               " datasets, got " +
                               std::to_string(datasets.size()));
  }
  const Eigen::Index dim = datasets.front().dim();
  std::size_t n = 0;
  std::vector<DataOwner> owners;
  owners.reserve(datasets.size());
  for (std::size_t j = 0; j < datasets.size(); ++j) {
    if (datasets[j].owner_id() != static_cast<int>(j) + 1) {
      throw InvalidArgumentError("run: datasets must be ordered by owner_id");
    }
    if (datasets[j].dim() != dim) {
      throw InvalidArgumentError("run: owners disagree on feature dimension");
    }
    n += datasets[j].size();
    owners.emplace_back(datasets[j], config.horizon, config.fitness.xi,
                        config.master_seed);
  }

  Rng schedule_rng = MakeStream(config.master_seed, StreamTag::kSchedule);
  TrainerState state = init_state(config, dim);
  state.event_log = build_schedule(config.mode, config.num_owners,
                                   config.horizon, schedule_rng);

  for (const ScheduleEvent& event : state.event_log) {
    const auto slot = static_cast<std::size_t>(event.owner - 1);
    const Vector bar = theta_bar(state, event.owner);
    const QueryResponse response = owners[slot].Respond(bar, event.k);
    state.theta_local[slot] =
        local_update(bar, response, config, n, datasets[slot].size());
    state.theta_L = central_update(bar, config);
    state.k = event.k;
    if (options.trajectory_stride > 0 &&
        (event.k % options.trajectory_stride == 0 ||
         event.k == config.horizon)) {
      state.trajectory.emplace_back(event.k, state.theta_L.theta);
    }
    if (options.observer) options.observer(event, state);
  }
  return state;
}

}  // namespace dpasync
