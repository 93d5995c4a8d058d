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

#include "dpasync/experiment.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dpasync/csv.h"
#include "dpasync/errors.h"
#include "dpasync/oracle.h"
#include "dpasync/random.h"
#include "dpasync/synthetic.h"

namespace dpasync {
namespace {

template <typename T>
std::string JoinList(const std::vector<T>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += FormatDouble(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out + "]";
}

std::ofstream OpenOut(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgumentError("percentile: no values");
  if (!(q >= 0.0 && q <= 1.0)) {
    throw InvalidArgumentError("percentile: q outside [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void ExperimentPlan::Validate() const {
  if (owner_sizes.empty() || epsilons.empty() || owner_counts.empty()) {
    throw InvalidArgumentError("plan: empty grid");
  }
  if (runs_per_cell < 1) throw InvalidArgumentError("plan: runs_per_cell < 1");
  if (horizon < 1) throw InvalidArgumentError("plan: T < 1");
  if (trajectory_stride < 1) throw InvalidArgumentError("plan: stride < 1");
  for (std::size_t s : owner_sizes) {
    if (s == 0) throw InvalidArgumentError("plan: owner size 0");
  }
  for (int n : owner_counts) {
    if (n < 1) throw InvalidArgumentError("plan: owner count < 1");
  }
  for (double e : epsilons) {
    if (!(e > 0.0)) throw InvalidArgumentError("plan: epsilon <= 0");
  }
}

ProtocolConfig ExperimentPlan::CellConfig(int num_owners) const {
  ProtocolConfig config;
  config.num_owners = num_owners;
  config.horizon = horizon;
  config.theta_max = theta_max;
  config.mode = mode;
  config.fitness.reg_coeff = reg_coeff;
  config.fitness.xi = xi;
  config.fitness.xi_g = FitnessSpec::RegGradBound(reg_coeff, theta_max, dim);
  const double t = static_cast<double>(horizon);
  config.rho = rho > 0.0 ? rho
                         : rho_fraction * t * t * config.fitness.sigma() /
                               (num_owners *
                                (config.fitness.xi + config.fitness.xi_g));
  return config;
}

std::vector<OwnerDataset> make_cell_data(const ExperimentPlan& plan,
                                         int num_owners,
                                         std::size_t owner_size,
                                         double epsilon) {
  const std::vector<std::size_t> sizes(static_cast<std::size_t>(num_owners),
                                       owner_size);
  const std::uint64_t seed =
      DeriveSeed(plan.master_seed,
                 {static_cast<std::uint64_t>(StreamTag::kData),
                  static_cast<std::uint64_t>(owner_size)});
  if (plan.data == DataKind::kTwoCluster) {
    return gen_two_cluster(plan.dim, sizes, plan.noise_std, seed, epsilon)
        .owners;
  }
  return gen_synthetic(plan.dim, owner_size * sizes.size(), sizes,
                       plan.noise_std, seed, epsilon)
      .owners;
}

EnsembleResult run_ensemble(const ExperimentPlan& plan) {
  plan.Validate();
  EnsembleResult result;
  std::size_t cell_index = 0;
  for (int num_owners : plan.owner_counts) {
    for (std::size_t owner_size : plan.owner_sizes) {
      const std::vector<OwnerDataset> base =
          make_cell_data(plan, num_owners, owner_size,
                         std::numeric_limits<double>::infinity());
      const ProtocolConfig base_config = plan.CellConfig(num_owners);
      const OracleSolution oracle =
          solve_exact(base, base_config.fitness, plan.theta_max);
      const RelativeFitness psi(base, base_config.fitness,
                                oracle.fitness_star);
      const OracleSolution solo =
          solo_model(base.front(), base_config.fitness, plan.theta_max);
      const double solo_psi = psi(solo.theta_star.theta);

      for (double epsilon : plan.epsilons) {
        std::vector<OwnerDataset> datasets;
        for (const OwnerDataset& d : base) {
          datasets.push_back(d.WithEpsilon(epsilon));
        }
        CellResult cell;
        cell.cell_index = cell_index;
        cell.num_owners = num_owners;
        cell.owner_size = owner_size;
        cell.n_total = owner_size * static_cast<std::size_t>(num_owners);
        cell.epsilon = epsilon;
        cell.rho = base_config.rho;
        cell.solo_psi = solo_psi;

        // series[j][r]: psi at the j-th recorded iteration of run r.
        std::vector<std::vector<double>> series;
        for (int r = 0; r < plan.runs_per_cell; ++r) {
          ProtocolConfig config = base_config;
          config.master_seed = DeriveSeed(
              plan.master_seed, {static_cast<std::uint64_t>(StreamTag::kRun),
                                 cell_index, static_cast<std::uint64_t>(r)});
          std::size_t slot = 0;
          RunOptions options;
          options.trajectory_stride = 0;
          options.observer = [&](const ScheduleEvent& e,
                                 const TrainerState& state) {
            if (e.k % plan.trajectory_stride != 0 && e.k != plan.horizon) {
              return;
            }
            if (r == 0) {
              cell.ks.push_back(e.k);
              series.emplace_back();
            }
            series[slot++].push_back(psi(state.theta_L.theta));
          };
          TrainerState final_state;
          try {
            final_state = run(config, datasets, options);
          } catch (const std::exception& ex) {
            std::ostringstream msg;
            msg << "cell " << cell_index << " (N=" << num_owners
                << ", n_i=" << owner_size << ", eps=" << FormatDouble(epsilon)
                << ") run " << r << ": " << ex.what();
            throw std::runtime_error(msg.str());
          }
          if (r == 0) cell.representative_schedule = final_state.event_log;
          cell.final_psi.push_back(series.back().back());
        }
        for (const auto& column : series) {
          cell.p25.push_back(percentile(column, 0.25));
          cell.p50.push_back(percentile(column, 0.50));
          cell.p75.push_back(percentile(column, 0.75));
        }
        double sum = 0.0;
        for (double v : cell.final_psi) sum += v;
        cell.mean_final_psi = sum / static_cast<double>(cell.final_psi.size());
        result.cells.push_back(std::move(cell));
        ++cell_index;
      }
    }
  }

  if (plan.bound) {
    result.bound = *plan.bound;
  } else {
    std::vector<SweepPoint> points;
    for (const CellResult& c : result.cells) {
      points.push_back(SweepPoint{
          static_cast<double>(c.n_total),
          std::vector<double>(static_cast<std::size_t>(c.num_owners),
                              c.epsilon),
          c.mean_final_psi});
    }
    try {
      result.bound = fit_constants(points);
      result.bound_fitted = true;
    } catch (const InvalidArgumentError&) {
      // Single-cell or rank-deficient grids have no fitted bound.
      result.bound = FittedBound{std::nan(""), std::nan("")};
    }
  }
  return result;
}

std::vector<CollaborationRow> collaboration_report(const ExperimentPlan& plan,
                                                   int solo_owner) {
  ExperimentPlan p = plan;
  // The trajectory is not reported; only the final iterate matters.
  p.trajectory_stride = p.horizon;
  const EnsembleResult result = run_ensemble(p);
  std::vector<CollaborationRow> rows;
  for (const CellResult& c : result.cells) {
    double solo_psi = c.solo_psi;
    if (solo_owner != 1) {
      if (solo_owner < 1 || solo_owner > c.num_owners) {
        solo_psi = std::nan("");
      } else {
        const auto data = make_cell_data(
            p, c.num_owners, c.owner_size,
            std::numeric_limits<double>::infinity());
        const ProtocolConfig config = p.CellConfig(c.num_owners);
        const OracleSolution oracle =
            solve_exact(data, config.fitness, p.theta_max);
        const RelativeFitness psi(data, config.fitness, oracle.fitness_star);
        solo_psi =
            psi(solo_model(data[static_cast<std::size_t>(solo_owner - 1)],
                           config.fitness, p.theta_max)
                    .theta_star.theta);
      }
    }
    rows.push_back(CollaborationRow{c.num_owners, c.owner_size, c.epsilon,
                                    c.mean_final_psi, solo_psi,
                                    c.mean_final_psi < solo_psi});
  }
  return rows;
}

void write_percentiles_csv(std::ostream& out, const CellResult& cell) {
  out << "k,p25,p50,p75\n";
  for (std::size_t j = 0; j < cell.ks.size(); ++j) {
    out << cell.ks[j] << ',' << FormatDouble(cell.p25[j]) << ','
        << FormatDouble(cell.p50[j]) << ',' << FormatDouble(cell.p75[j])
        << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const EnsembleResult& result) {
  out << "n,eps,N,mean_psi,bound_psi\n";
  for (const CellResult& c : result.cells) {
    const std::vector<double> eps(static_cast<std::size_t>(c.num_owners),
                                  c.epsilon);
    const double bound =
        std::isnan(result.bound.cbar2_prime)
            ? std::nan("")
            : limiting_bound_fitness(static_cast<double>(c.n_total), eps,
                                     result.bound);
    out << c.n_total << ',' << FormatDouble(c.epsilon) << ',' << c.num_owners
        << ',' << FormatDouble(c.mean_final_psi) << ',' << FormatDouble(bound)
        << '\n';
  }
}

void write_report_csv(std::ostream& out,
                      std::span<const CollaborationRow> rows) {
  out << "N,n_i,eps,mean_psi,solo_psi,benefit\n";
  for (const CollaborationRow& r : rows) {
    out << r.num_owners << ',' << r.owner_size << ','
        << FormatDouble(r.epsilon) << ',' << FormatDouble(r.mean_psi) << ','
        << FormatDouble(r.solo_psi) << ',' << (r.benefit ? 1 : 0) << '\n';
  }
}

void write_manifest(std::ostream& out, const ExperimentPlan& plan,
                    const std::string& section) {
  out << "# dpasync run manifest; replay with --config <this file>\n";
  out << "# features: raw synthetic or raw PCA scores (not variance-normalized)\n";
  out << "[" << section << "]\n";
  out << "owner-sizes=" << JoinList(plan.owner_sizes) << '\n';
  out << "eps=" << JoinList(plan.epsilons) << '\n';
  out << "owners=" << JoinList(plan.owner_counts) << '\n';
  out << "runs=" << plan.runs_per_cell << '\n';
  out << "T=" << plan.horizon << '\n';
  out << "seed=" << plan.master_seed << '\n';
  out << "mode=" << ToString(plan.mode) << '\n';
  out << "dim=" << plan.dim << '\n';
  out << "noise-std=" << FormatDouble(plan.noise_std) << '\n';
  out << "kind=" << (plan.data == DataKind::kTwoCluster ? "two-cluster"
                                                         : "synthetic")
      << '\n';
  out << "reg=" << FormatDouble(plan.reg_coeff) << '\n';
  out << "xi=" << FormatDouble(plan.xi) << '\n';
  out << "theta-max=" << FormatDouble(plan.theta_max) << '\n';
  out << "rho-fraction=" << FormatDouble(plan.rho_fraction) << '\n';
  out << "rho=" << FormatDouble(plan.rho) << '\n';
  out << "stride=" << plan.trajectory_stride << '\n';
  if (plan.bound) {
    out << "cbar1=" << FormatDouble(plan.bound->cbar1_prime) << '\n';
    out << "cbar2=" << FormatDouble(plan.bound->cbar2_prime) << '\n';
  }
  for (int n : plan.owner_counts) {
    out << "# N=" << n << " effective rho="
        << FormatDouble(plan.CellConfig(n).rho) << '\n';
  }
}

void write_sweep_outputs(const std::string& dir, const ExperimentPlan& plan,
                         const EnsembleResult& result) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  fs::create_directories(root / "cells");
  {
    auto out = OpenOut(root / "sweep.csv");
    write_sweep_csv(out, result);
  }
  {
    auto out = OpenOut(root / "manifest.txt");
    write_manifest(out, plan, "sweep");
    if (result.bound_fitted) {
      out << "# fitted cbar1=" << FormatDouble(result.bound.cbar1_prime)
          << " cbar2=" << FormatDouble(result.bound.cbar2_prime) << '\n';
    }
  }
  for (const CellResult& c : result.cells) {
    char name[32];
    std::snprintf(name, sizeof(name), "cell_%03zu", c.cell_index);
    const fs::path cell_dir = root / "cells" / name;
    fs::create_directories(cell_dir);
    {
      auto out = OpenOut(cell_dir / "percentiles.csv");
      write_percentiles_csv(out, c);
    }
    {
      auto out = OpenOut(cell_dir / "schedule.csv");
      write_schedule_csv(out, c.representative_schedule);
    }
  }
}

}  // namespace dpasync
