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

#ifndef DPASYNC_SCHEDULE_H_
#define DPASYNC_SCHEDULE_H_

#include <functional>
#include <iosfwd>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpasync/random.h"

namespace dpasync {

enum class SchedulerMode { kPoissonClocks, kUniformIid };

std::string ToString(SchedulerMode mode);
// Accepts "poisson" / "uniform" (and the long names).
SchedulerMode ParseSchedulerMode(const std::string& name);

struct ScheduleEvent {
  long k = 0;
  double t = 0.0;
  int owner = 0;  // 1-based

  bool operator==(const ScheduleEvent&) const = default;
};

// N independent rate-one Poisson clocks. Each owner's inter-tick gaps are
// Exponential(1); the next event is the earliest pending tick, ties going to
// the lowest owner id.
class PoissonClocks {
 public:
  PoissonClocks(int num_owners, Rng& rng);

  ScheduleEvent next_event(Rng& rng);
  int num_owners() const { return num_owners_; }

 private:
  using Tick = std::pair<double, int>;
  int num_owners_;
  long k_ = 0;
  std::priority_queue<Tick, std::vector<Tick>, std::greater<Tick>> pending_;
};

double sample_exponential(Rng& rng);

// Uniform on {1..N}.
int uniform_pick(int num_owners, Rng& rng);

// Exactly T events. Uniform mode uses logical time t_k = k.
std::vector<ScheduleEvent> build_schedule(SchedulerMode mode, int num_owners,
                                          long horizon, Rng& rng);

// CSV with header k,t_k,owner.
void write_schedule_csv(std::ostream& out,
                        std::span<const ScheduleEvent> schedule);

}  // namespace dpasync

#endif  // DPASYNC_SCHEDULE_H_
