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

// Command-line front end: synth, pca, train, sweep, bounds, report.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpasync/bounds.h"
#include "dpasync/csv.h"
#include "dpasync/errors.h"
#include "dpasync/experiment.h"
#include "dpasync/oracle.h"
#include "dpasync/pca.h"
#include "dpasync/synthetic.h"
#include "dpasync/trainer.h"

namespace fs = std::filesystem;

namespace dpasync {
namespace {

const std::map<std::string, SchedulerMode> kModes = {
    {"poisson", SchedulerMode::kPoissonClocks},
    {"uniform", SchedulerMode::kUniformIid}};
const std::map<std::string, DataKind> kKinds = {
    {"synthetic", DataKind::kSynthetic},
    {"two-cluster", DataKind::kTwoCluster}};

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string Join(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += '"' + v[i] + '"';
  }
  return out + "]";
}

std::string JoinDoubles(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += FormatDouble(v[i]);
  }
  return out + "]";
}

std::string JoinSizes(const std::vector<std::size_t>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out + "]";
}

// Options shared by sweep and report.
struct PlanFlags {
  ExperimentPlan plan;
  std::optional<double> cbar1, cbar2;
  std::string out = "out";

  void Register(CLI::App* app) {
    app->add_option("--owner-sizes", plan.owner_sizes, "n_i grid")
        ->delimiter(',');
    app->add_option("--eps", plan.epsilons, "equal-budget grid")
        ->delimiter(',');
    app->add_option("--owners", plan.owner_counts, "N grid")->delimiter(',');
    app->add_option("--runs", plan.runs_per_cell, "runs per cell")
        ->check(CLI::PositiveNumber);
    app->add_option("--T", plan.horizon, "horizon")->check(CLI::PositiveNumber);
    app->add_option("--seed", plan.master_seed, "master seed");
    app->add_option("--mode", plan.mode, "scheduler")
        ->transform(CLI::CheckedTransformer(kModes));
    app->add_option("--dim", plan.dim, "feature dimension");
    app->add_option("--noise-std", plan.noise_std, "target noise");
    app->add_option("--kind", plan.data, "synthetic data model")
        ->transform(CLI::CheckedTransformer(kKinds));
    app->add_option("--reg", plan.reg_coeff, "regularizer coefficient");
    app->add_option("--xi", plan.xi, "per-record gradient bound");
    app->add_option("--theta-max", plan.theta_max, "box radius");
    app->add_option("--rho-fraction", plan.rho_fraction,
                    "rho as a fraction of T^2 sigma / (N (xi + xi_g))");
    app->add_option("--rho", plan.rho, "explicit rho (overrides fraction)");
    app->add_option("--stride", plan.trajectory_stride,
                    "percentile recording stride");
    app->add_option("--cbar1", cbar1, "fixed limiting-bound constant");
    app->add_option("--cbar2", cbar2, "fixed limiting-bound constant");
    app->add_option("--out", out, "output directory");
  }

  ExperimentPlan Resolve() const {
    ExperimentPlan p = plan;
    if (cbar1 || cbar2) {
      p.bound = FittedBound{cbar1.value_or(0.0), cbar2.value_or(0.0)};
    }
    return p;
  }
};

// synth ----------------------------------------------------------------------

struct SynthFlags {
  Eigen::Index dim = 10;
  std::vector<std::size_t> owner_sizes = {1000, 1000, 1000};
  double noise_std = 1.0;
  DataKind kind = DataKind::kSynthetic;
  std::vector<double> eps = {1.0};
  std::uint64_t seed = 0;
  std::string out = "out";
};

void RunSynth(const SynthFlags& f) {
  if (f.eps.size() != 1 && f.eps.size() != f.owner_sizes.size()) {
    throw InvalidArgumentError("--eps needs one value or one per owner");
  }
  std::size_t total = 0;
  for (std::size_t s : f.owner_sizes) total += s;
  SyntheticData data =
      f.kind == DataKind::kTwoCluster
          ? gen_two_cluster(f.dim, f.owner_sizes, f.noise_std, f.seed)
          : gen_synthetic(f.dim, total, f.owner_sizes, f.noise_std, f.seed);
  fs::create_directories(f.out);
  auto out = OpenOut(fs::path(f.out) / "owners.csv");
  write_owner_csv(out, data.owners);
  auto m = OpenOut(fs::path(f.out) / "manifest.txt");
  m << "[synth]\n"
    << "dim=" << f.dim << '\n'
    << "owner-sizes=" << JoinSizes(f.owner_sizes) << '\n'
    << "noise-std=" << FormatDouble(f.noise_std) << '\n'
    << "kind="
    << (f.kind == DataKind::kTwoCluster ? "two-cluster" : "synthetic") << '\n'
    << "eps=" << JoinDoubles(f.eps) << '\n'
    << "seed=" << f.seed << '\n';
}

// pca ------------------------------------------------------------------------

struct PcaFlags {
  std::string input;
  std::string target;
  std::vector<std::string> drop;
  std::vector<std::string> categorical;
  Eigen::Index k = 10;
  std::size_t sample = 10000;
  std::string dict;
  std::vector<std::size_t> owner_sizes;
  std::vector<double> eps = {1.0};
  std::string out = "out";

  TableSchema Schema() const { return TableSchema{target, drop, categorical}; }
};

void WritePcaManifest(const PcaFlags& f, const std::string& section,
                      const RawTable& table) {
  auto m = OpenOut(fs::path(f.out) / "manifest.txt");
  m << "# features are raw principal component scores (not variance-"
       "normalized)\n"
    << "# rows dropped for a missing target: " << table.dropped_missing_target
    << '\n'
    << "[" << section << "]\n"
    << "input=" << f.input << '\n'
    << "target=" << f.target << '\n'
    << "drop=" << Join(f.drop) << '\n'
    << "categorical=" << Join(f.categorical) << '\n';
  if (section == "pca.fit") {
    m << "k=" << f.k << '\n' << "sample=" << f.sample << '\n';
  } else {
    m << "dict=" << f.dict << '\n'
      << "owner-sizes=" << JoinSizes(f.owner_sizes) << '\n'
      << "eps=" << JoinDoubles(f.eps) << '\n';
  }
}

void RunPcaFit(const PcaFlags& f) {
  const RawTable table = ingest_csv(f.input, f.Schema());
  const std::size_t sample =
      std::min<std::size_t>(f.sample, static_cast<std::size_t>(
                                          table.features.rows()));
  const PcaDictionary dict = fit_pca(table.features, f.k, sample);
  fs::create_directories(f.out);
  OpenOut(fs::path(f.out) / "dictionary.json") << dict.ToJson() << '\n';
  OpenOut(fs::path(f.out) / "categories.json")
      << table.categories.ToJson() << '\n';
  WritePcaManifest(f, "pca.fit", table);
}

void RunPcaApply(const PcaFlags& f) {
  const fs::path dir(f.dict);
  const PcaDictionary dict =
      PcaDictionary::FromJson(ReadFile(dir / "dictionary.json"));
  const CategoryDictionary categories =
      CategoryDictionary::FromJson(ReadFile(dir / "categories.json"));
  const RawTable table = ingest_csv(f.input, f.Schema(), &categories);
  const RowMatrix scores = apply_pca(dict, table.features);
  std::vector<std::size_t> sizes = f.owner_sizes;
  if (sizes.empty()) sizes.push_back(static_cast<std::size_t>(scores.rows()));
  const auto owners = partition_rows(scores, table.targets, sizes, f.eps);
  fs::create_directories(f.out);
  auto out = OpenOut(fs::path(f.out) / "owners.csv");
  write_owner_csv(out, owners);
  WritePcaManifest(f, "pca.apply", table);
}

// train ----------------------------------------------------------------------

struct TrainFlags {
  std::string input;
  SynthFlags synth;
  std::vector<double> eps = {1.0};
  long horizon = 1000;
  double rho = 0.0;
  double rho_fraction = 0.1;
  double reg = 1e-5;
  double xi = 30.0;
  double theta_max = 1e3;
  std::uint64_t seed = 0;
  SchedulerMode mode = SchedulerMode::kPoissonClocks;
  long stride = 1;
  std::string out = "out";
};

void RunTrain(const TrainFlags& f) {
  std::vector<OwnerDataset> owners;
  if (!f.input.empty()) {
    std::ifstream in(f.input, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + f.input);
    owners = read_owner_csv(in, f.eps);
  } else {
    std::size_t total = 0;
    for (std::size_t s : f.synth.owner_sizes) total += s;
    const auto& s = f.synth;
    owners = (s.kind == DataKind::kTwoCluster
                  ? gen_two_cluster(s.dim, s.owner_sizes, s.noise_std, f.seed)
                  : gen_synthetic(s.dim, total, s.owner_sizes, s.noise_std,
                                  f.seed))
                 .owners;
    if (f.eps.size() != 1 && f.eps.size() != owners.size()) {
      throw InvalidArgumentError("--eps needs one value or one per owner");
    }
    for (std::size_t j = 0; j < owners.size(); ++j) {
      owners[j] = owners[j].WithEpsilon(f.eps.size() == 1 ? f.eps[0] : f.eps[j]);
    }
  }
  const Eigen::Index dim = owners.front().dim();

  ProtocolConfig config;
  config.num_owners = static_cast<int>(owners.size());
  config.horizon = f.horizon;
  config.theta_max = f.theta_max;
  config.mode = f.mode;
  config.master_seed = f.seed;
  config.fitness.reg_coeff = f.reg;
  config.fitness.xi = f.xi;
  config.fitness.xi_g = FitnessSpec::RegGradBound(f.reg, f.theta_max, dim);
  const double t = static_cast<double>(f.horizon);
  config.rho = f.rho > 0.0
                   ? f.rho
                   : f.rho_fraction * t * t * config.fitness.sigma() /
                         (config.num_owners *
                          (config.fitness.xi + config.fitness.xi_g));

  const OracleSolution oracle =
      solve_exact(owners, config.fitness, config.theta_max);
  const RelativeFitness psi(owners, config.fitness, oracle.fitness_star);

  fs::create_directories(f.out);
  auto traj = OpenOut(fs::path(f.out) / "trajectory.csv");
  traj << "k,t_k,owner,psi\n";
  RunOptions options;
  options.trajectory_stride = 0;
  options.observer = [&](const ScheduleEvent& e, const TrainerState& state) {
    if (e.k % f.stride != 0 && e.k != f.horizon) return;
    traj << e.k << ',' << FormatDouble(e.t) << ',' << e.owner << ','
         << FormatDouble(psi(state.theta_L.theta)) << '\n';
  };
  const TrainerState state = run(config, owners, options);
  {
    auto out = OpenOut(fs::path(f.out) / "schedule.csv");
    write_schedule_csv(out, state.event_log);
  }
  auto m = OpenOut(fs::path(f.out) / "manifest.txt");
  m << "# final psi=" << FormatDouble(psi(state.theta_L.theta))
    << " fitness_star=" << FormatDouble(oracle.fitness_star)
    << " effective rho=" << FormatDouble(config.rho) << '\n'
    << "[train]\n"
    << "input=" << f.input << '\n'
    << "dim=" << f.synth.dim << '\n'
    << "owner-sizes=" << JoinSizes(f.synth.owner_sizes) << '\n'
    << "noise-std=" << FormatDouble(f.synth.noise_std) << '\n'
    << "kind="
    << (f.synth.kind == DataKind::kTwoCluster ? "two-cluster" : "synthetic")
    << '\n'
    << "eps=" << JoinDoubles(f.eps) << '\n'
    << "T=" << f.horizon << '\n'
    << "rho=" << FormatDouble(f.rho) << '\n'
    << "rho-fraction=" << FormatDouble(f.rho_fraction) << '\n'
    << "reg=" << FormatDouble(f.reg) << '\n'
    << "xi=" << FormatDouble(f.xi) << '\n'
    << "theta-max=" << FormatDouble(f.theta_max) << '\n'
    << "seed=" << f.seed << '\n'
    << "mode=" << ToString(f.mode) << '\n'
    << "stride=" << f.stride << '\n';
}

// bounds ---------------------------------------------------------------------

struct BoundsFlags {
  std::string sweep;
  std::optional<double> cbar1, cbar2;
  std::vector<double> n = {3000, 30000};
  std::vector<double> eps = {0.1, 1, 10};
  int owners = 3;
  // Finite-horizon bound inputs.
  long horizon = 0;
  double rho = 1.0;
  double reg = 1e-5;
  double xi = 30.0;
  double theta_max = 1e3;
  Eigen::Index dim = 10;
  std::string out = "out";
};

std::vector<SweepPoint> ReadSweep(const std::string& path,
                                  std::vector<BoundRow>* rows) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  const auto header = SplitCsvLine(line);
  const auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ParseError("sweep csv: missing column " + name, 1);
  };
  const std::size_t cn = col("n"), ce = col("eps"), cN = col("N"),
                    cm = col("mean_psi");
  std::vector<SweepPoint> points;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitCsvLine(line);
    const auto get = [&](std::size_t i) {
      const auto v = i < fields.size() ? ParseDouble(fields[i]) : std::nullopt;
      if (!v) throw ParseError("sweep csv: bad field", line_no);
      return *v;
    };
    const auto count = static_cast<std::size_t>(get(cN));
    points.push_back(
        SweepPoint{get(cn), std::vector<double>(count, get(ce)), get(cm)});
    rows->push_back(BoundRow{get(cn), get(ce), get(cm), 0.0});
  }
  return points;
}

void RunBounds(const BoundsFlags& f) {
  fs::create_directories(f.out);
  std::vector<BoundRow> rows;
  FittedBound fitted{f.cbar1.value_or(0.0), f.cbar2.value_or(0.0)};
  bool was_fitted = false;
  if (!f.sweep.empty()) {
    const std::vector<SweepPoint> points = ReadSweep(f.sweep, &rows);
    if (!f.cbar1 && !f.cbar2) {
      fitted = fit_constants(points);
      was_fitted = true;
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      rows[i].bound_psi =
          limiting_bound_fitness(points[i].n, points[i].epsilons, fitted);
    }
  } else {
    for (double n : f.n) {
      for (double e : f.eps) {
        const std::vector<double> eps(static_cast<std::size_t>(f.owners), e);
        rows.push_back(BoundRow{n, e, std::nan(""),
                                limiting_bound_fitness(n, eps, fitted)});
      }
    }
  }
  {
    auto out = OpenOut(fs::path(f.out) / "bounds.csv");
    write_bound_table(out, rows);
  }
  auto m = OpenOut(fs::path(f.out) / "manifest.txt");
  m << "# " << (was_fitted ? "fitted" : "given")
    << " cbar1=" << FormatDouble(fitted.cbar1_prime)
    << " cbar2=" << FormatDouble(fitted.cbar2_prime) << '\n';
  if (f.horizon > 0) {
    const double xi_g = FitnessSpec::RegGradBound(f.reg, f.theta_max, f.dim);
    auto dist = OpenOut(fs::path(f.out) / "distance.csv");
    dist << "n,eps,distance_bound\n";
    for (double n : f.n) {
      for (double e : f.eps) {
        const BoundParams p = BoundParams::Make(
            f.owners, f.horizon, n,
            std::vector<double>(static_cast<std::size_t>(f.owners), e),
            2.0 * f.reg, f.xi, xi_g, f.rho);
        dist << FormatDouble(n) << ',' << FormatDouble(e) << ','
             << FormatDouble(bound_parameter_distance(p)) << '\n';
      }
    }
    const BoundParams p = BoundParams::Make(
        f.owners, f.horizon, f.n.front(),
        std::vector<double>(static_cast<std::size_t>(f.owners),
                            f.eps.front()),
        2.0 * f.reg, f.xi, xi_g, f.rho);
    m << "# lambda=" << FormatDouble(p.lambda) << " C=" << FormatDouble(p.C)
      << " c1=" << FormatDouble(p.c1) << " c2=" << FormatDouble(p.c2) << '\n';
  }
  m << "[bounds]\n"
    << "sweep=" << f.sweep << '\n'
    << "n=" << JoinDoubles(f.n) << '\n'
    << "eps=" << JoinDoubles(f.eps) << '\n'
    << "owners=" << f.owners << '\n'
    << "T=" << f.horizon << '\n'
    << "rho=" << FormatDouble(f.rho) << '\n'
    << "reg=" << FormatDouble(f.reg) << '\n'
    << "xi=" << FormatDouble(f.xi) << '\n'
    << "theta-max=" << FormatDouble(f.theta_max) << '\n'
    << "dim=" << f.dim << '\n';
  if (f.cbar1) m << "cbar1=" << FormatDouble(*f.cbar1) << '\n';
  if (f.cbar2) m << "cbar2=" << FormatDouble(*f.cbar2) << '\n';
}

int Main(int argc, char** argv) {
  CLI::App app{"Asynchronous differentially private collaborative training"};
  app.set_config("--config", "", "key=value plan file (INI sections per "
                                 "subcommand)");
  app.require_subcommand(1);

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic owners");
  synth_cmd->add_option("--dim", synth.dim);
  synth_cmd->add_option("--owner-sizes", synth.owner_sizes)->delimiter(',');
  synth_cmd->add_option("--noise-std", synth.noise_std);
  synth_cmd->add_option("--kind", synth.kind)
      ->transform(CLI::CheckedTransformer(kKinds));
  synth_cmd->add_option("--eps", synth.eps)->delimiter(',');
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--out", synth.out);

  PcaFlags pca;
  auto* pca_cmd = app.add_subcommand("pca", "fit or apply a PCA dictionary");
  pca_cmd->require_subcommand(1);
  auto* pca_fit = pca_cmd->add_subcommand("fit", "fit a dictionary");
  auto* pca_apply = pca_cmd->add_subcommand("apply", "apply a dictionary");
  for (CLI::App* cmd : {pca_fit, pca_apply}) {
    cmd->add_option("--input", pca.input)->required();
    cmd->add_option("--target", pca.target)->required();
    cmd->add_option("--drop", pca.drop)->delimiter(',');
    cmd->add_option("--categorical", pca.categorical)->delimiter(',');
    cmd->add_option("--out", pca.out);
  }
  pca_fit->add_option("--k", pca.k);
  pca_fit->add_option("--sample", pca.sample);
  pca_apply->add_option("--dict", pca.dict, "directory written by pca fit")
      ->required();
  pca_apply->add_option("--owner-sizes", pca.owner_sizes)->delimiter(',');
  pca_apply->add_option("--eps", pca.eps)->delimiter(',');

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "single training run");
  train_cmd->add_option("--input", train.input, "owners.csv");
  train_cmd->add_option("--dim", train.synth.dim);
  train_cmd->add_option("--owner-sizes", train.synth.owner_sizes)
      ->delimiter(',');
  train_cmd->add_option("--noise-std", train.synth.noise_std);
  train_cmd->add_option("--kind", train.synth.kind)
      ->transform(CLI::CheckedTransformer(kKinds));
  train_cmd->add_option("--eps", train.eps)->delimiter(',');
  train_cmd->add_option("--T", train.horizon)->check(CLI::PositiveNumber);
  train_cmd->add_option("--rho", train.rho);
  train_cmd->add_option("--rho-fraction", train.rho_fraction);
  train_cmd->add_option("--reg", train.reg);
  train_cmd->add_option("--xi", train.xi);
  train_cmd->add_option("--theta-max", train.theta_max);
  train_cmd->add_option("--seed", train.seed);
  train_cmd->add_option("--mode", train.mode)
      ->transform(CLI::CheckedTransformer(kModes));
  train_cmd->add_option("--stride", train.stride)->check(CLI::PositiveNumber);
  train_cmd->add_option("--out", train.out);

  PlanFlags sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "ensemble over a grid");
  sweep.Register(sweep_cmd);

  BoundsFlags bounds;
  auto* bounds_cmd =
      app.add_subcommand("bounds", "evaluate or fit the privacy bounds");
  bounds_cmd->add_option("--sweep", bounds.sweep, "sweep.csv to fit");
  bounds_cmd->add_option("--cbar1", bounds.cbar1);
  bounds_cmd->add_option("--cbar2", bounds.cbar2);
  bounds_cmd->add_option("--n", bounds.n, "total record counts")
      ->delimiter(',');
  bounds_cmd->add_option("--eps", bounds.eps)->delimiter(',');
  bounds_cmd->add_option("--owners", bounds.owners);
  bounds_cmd->add_option("--T", bounds.horizon,
                         "also evaluate the finite-horizon distance bound");
  bounds_cmd->add_option("--rho", bounds.rho);
  bounds_cmd->add_option("--reg", bounds.reg);
  bounds_cmd->add_option("--xi", bounds.xi);
  bounds_cmd->add_option("--theta-max", bounds.theta_max);
  bounds_cmd->add_option("--dim", bounds.dim);
  bounds_cmd->add_option("--out", bounds.out);

  PlanFlags report;
  int solo_owner = 1;
  auto* report_cmd =
      app.add_subcommand("report", "collaboration value against solo models");
  report.Register(report_cmd);
  report_cmd->add_option("--solo-owner", solo_owner);

  CLI11_PARSE(app, argc, argv);

  if (synth_cmd->parsed()) {
    RunSynth(synth);
  } else if (pca_fit->parsed()) {
    RunPcaFit(pca);
  } else if (pca_apply->parsed()) {
    RunPcaApply(pca);
  } else if (train_cmd->parsed()) {
    RunTrain(train);
  } else if (sweep_cmd->parsed()) {
    const ExperimentPlan plan = sweep.Resolve();
    write_sweep_outputs(sweep.out, plan, run_ensemble(plan));
  } else if (bounds_cmd->parsed()) {
    RunBounds(bounds);
  } else if (report_cmd->parsed()) {
    const ExperimentPlan plan = report.Resolve();
    const auto rows = collaboration_report(plan, solo_owner);
    fs::create_directories(report.out);
    auto out = OpenOut(fs::path(report.out) / "report.csv");
    write_report_csv(out, rows);
    auto m = OpenOut(fs::path(report.out) / "manifest.txt");
    write_manifest(m, plan, "report");
    m << "solo-owner=" << solo_owner << '\n';
  }
  return 0;
}

}  // namespace
}  // namespace dpasync

int main(int argc, char** argv) {
  try {
    return dpasync::Main(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "dpasync: " << e.what() << '\n';
    return 1;
  }
}
