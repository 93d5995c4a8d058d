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

// Ensemble experiments over a grid of (N, n_i, eps) cells.
//
// Seeds fan out from the plan's master seed: run r of cell c trains with
// DeriveSeed(master, {kRun, c, r}), so re-running a subset of the grid
// reproduces the same numbers. Data depends on n_i only: the generator is
// seeded with DeriveSeed(master, {kData, n_i}) and both generators are
// prefix-stable, so owner j holds the same records for every N.

#ifndef DPASYNC_EXPERIMENT_H_
#define DPASYNC_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpasync/bounds.h"
#include "dpasync/schedule.h"
#include "dpasync/trainer.h"

namespace dpasync {

// Linear interpolation between order statistics: with sorted x_0..x_{m-1}
// and h = q (m - 1), returns x_lo + (h - lo) (x_hi - x_lo).
double percentile(std::vector<double> values, double q);

enum class DataKind { kSynthetic, kTwoCluster };

struct ExperimentPlan {
  std::vector<std::size_t> owner_sizes = {1000};  // n_i grid
  std::vector<double> epsilons = {1.0};           // equal budgets grid
  std::vector<int> owner_counts = {3};            // N grid
  int runs_per_cell = 100;
  long horizon = 1000;
  std::uint64_t master_seed = 0;
  SchedulerMode mode = SchedulerMode::kPoissonClocks;

  Eigen::Index dim = 10;
  double noise_std = 1.0;
  DataKind data = DataKind::kSynthetic;

  double reg_coeff = 1e-5;
  double xi = 30.0;
  double theta_max = 1e3;
  // rho = rho_fraction * T^2 sigma / (N (xi + xi_g)) unless rho > 0.
  double rho_fraction = 0.1;
  double rho = 0.0;

  long trajectory_stride = 10;
  // Fixed limiting-bound constants; fitted to the sweep when absent.
  std::optional<FittedBound> bound;

  // Throws InvalidArgumentError on an empty grid or runs_per_cell < 1.
  void Validate() const;
  // Protocol config of one cell (seed left at 0).
  ProtocolConfig CellConfig(int num_owners) const;
};

struct CellResult {
  std::size_t cell_index = 0;
  int num_owners = 0;
  std::size_t owner_size = 0;
  std::size_t n_total = 0;
  double epsilon = 0.0;
  double rho = 0.0;
  std::vector<long> ks;
  std::vector<double> p25, p50, p75;
  std::vector<double> final_psi;  // one per run
  double mean_final_psi = 0.0;
  double solo_psi = 0.0;  // psi of owner 1's non-private solo model
  std::vector<ScheduleEvent> representative_schedule;  // run 0
};

struct EnsembleResult {
  std::vector<CellResult> cells;
  FittedBound bound;
  bool bound_fitted = false;
};

// Builds the owners of one (N, n_i) grid point with the plan's data model.
std::vector<OwnerDataset> make_cell_data(const ExperimentPlan& plan,
                                         int num_owners,
                                         std::size_t owner_size,
                                         double epsilon);

EnsembleResult run_ensemble(const ExperimentPlan& plan);

struct CollaborationRow {
  int num_owners = 0;
  std::size_t owner_size = 0;
  double epsilon = 0.0;
  double mean_psi = 0.0;
  double solo_psi = 0.0;
  bool benefit = false;  // mean_psi < solo_psi
};

// Runs the ensemble and compares E[psi(theta_L,T)] with psi of the given
// owner's (1-based) solo model on the union of each cell's data.
std::vector<CollaborationRow> collaboration_report(const ExperimentPlan& plan,
                                                   int solo_owner = 1);

// k,p25,p50,p75
void write_percentiles_csv(std::ostream& out, const CellResult& cell);
// n,eps,N,mean_psi,bound_psi  (n is the total record count)
void write_sweep_csv(std::ostream& out, const EnsembleResult& result);
// N,n_i,eps,mean_psi,solo_psi,benefit
void write_report_csv(std::ostream& out,
                      std::span<const CollaborationRow> rows);
// key=value echo of every plan field, readable back through --config.
void write_manifest(std::ostream& out, const ExperimentPlan& plan,
                    const std::string& section);

// Writes sweep.csv, manifest.txt and cells/cell_<c>/{percentiles,schedule}.csv
// under dir (created if needed).
void write_sweep_outputs(const std::string& dir, const ExperimentPlan& plan,
                         const EnsembleResult& result);

}  // namespace dpasync

#endif  // DPASYNC_EXPERIMENT_H_
