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

#include "dpasync/schedule.h"

#include <cmath>
#include <ostream>

#include "dpasync/csv.h"
#include "dpasync/errors.h"

namespace dpasync {

std::string ToString(SchedulerMode mode) {
  return mode == SchedulerMode::kPoissonClocks ? "poisson" : "uniform";
}

SchedulerMode ParseSchedulerMode(const std::string& name) {
  if (name == "poisson" || name == "poisson_clocks") {
    return SchedulerMode::kPoissonClocks;
  }
  if (name == "uniform" || name == "uniform_iid") {
    return SchedulerMode::kUniformIid;
  }
  throw InvalidArgumentError("unknown scheduler mode: " + name);
}

double sample_exponential(Rng& rng) {
  // 1 - U lies in (0, 1], so the log is finite.
  return -std::log1p(-Uniform01(rng));
}

PoissonClocks::PoissonClocks(int num_owners, Rng& rng)
    : num_owners_(num_owners) {
  if (num_owners < 1) throw InvalidArgumentError("PoissonClocks: N < 1");
  for (int i = 1; i <= num_owners; ++i) {
    pending_.emplace(sample_exponential(rng), i);
  }
}

ScheduleEvent PoissonClocks::next_event(Rng& rng) {
  const auto [t, owner] = pending_.top();
  pending_.pop();
  pending_.emplace(t + sample_exponential(rng), owner);
  return ScheduleEvent{++k_, t, owner};
}

int uniform_pick(int num_owners, Rng& rng) {
  if (num_owners < 1) throw InvalidArgumentError("uniform_pick: N < 1");
  std::uniform_int_distribution<int> dist(1, num_owners);
  return dist(rng);
}

std::vector<ScheduleEvent> build_schedule(SchedulerMode mode, int num_owners,
                                          long horizon, Rng& rng) {
  if (horizon < 1) throw InvalidArgumentError("build_schedule: T < 1");
  if (num_owners < 1) throw InvalidArgumentError("build_schedule: N < 1");
  std::vector<ScheduleEvent> out;
  out.reserve(static_cast<std::size_t>(horizon));
  if (mode == SchedulerMode::kPoissonClocks) {
    PoissonClocks clocks(num_owners, rng);
    for (long k = 1; k <= horizon; ++k) out.push_back(clocks.next_event(rng));
  } else {
    for (long k = 1; k <= horizon; ++k) {
      out.push_back(ScheduleEvent{k, static_cast<double>(k),
                                  uniform_pick(num_owners, rng)});
    }
  }
  return out;
}

void write_schedule_csv(std::ostream& out,
                        std::span<const ScheduleEvent> schedule) {
  out << "k,t_k,owner\n";
  for (const ScheduleEvent& e : schedule) {
    out << e.k << ',' << FormatDouble(e.t) << ',' << e.owner << '\n';
  }
}

}  // namespace dpasync
