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

// Non-private baselines: the global optimum theta*, single-owner models and
// the relative fitness psi(theta) = f(theta) / f(theta*) - 1.

#ifndef DPASYNC_ORACLE_H_
#define DPASYNC_ORACLE_H_

#include <functional>
#include <limits>
#include <span>

#include "dpasync/model.h"

namespace dpasync {

struct OracleSolution {
  ModelParams theta_star;
  double fitness_star = 0.0;
  // ||grad f(theta_star)||_2; for box-constrained solutions, the norm of the
  // projected-gradient map instead.
  double solver_residual = 0.0;
};

struct IterativeOptions {
  double step_tolerance = 1e-10;  // on ||theta_{t+1} - theta_t||_inf
  long max_iterations = 1'000'000;
  // Receives (iteration, f(theta_{t+1}) - f(theta_t)) for every step.
  std::function<void(long, double)> on_step;
};

// Solves (X'X/n + reg I) theta = X'y/n by Cholesky. Falls back to
// solve_iterative when the solution leaves the box. Requires reg_coeff > 0.
OracleSolution solve_exact(
    std::span<const OwnerDataset> datasets, const FitnessSpec& spec,
    double theta_max = std::numeric_limits<double>::infinity());

// Projected gradient descent with backtracking line search. Throws
// ConvergenceError (carrying the last step size) at the iteration cap.
OracleSolution solve_iterative(std::span<const OwnerDataset> datasets,
                               const FitnessSpec& spec, double theta_max,
                               const IterativeOptions& options = {});

// Optimum of one owner's records alone (n replaced by n_i).
OracleSolution solo_model(
    const OwnerDataset& dataset, const FitnessSpec& spec,
    double theta_max = std::numeric_limits<double>::infinity());

// f(theta) / fitness_star - 1 over the given datasets.
double relative_fitness(const ConstVectorRef& theta,
                        const OracleSolution& oracle,
                        std::span<const OwnerDataset> datasets,
                        const FitnessSpec& spec);

// psi evaluated from sufficient statistics; used on hot paths.
class RelativeFitness {
 public:
  RelativeFitness(std::span<const OwnerDataset> datasets,
                  const FitnessSpec& spec, double fitness_star);

  double operator()(const ConstVectorRef& theta) const;
  double fitness_star() const { return fitness_star_; }
  const QuadraticFitness& objective() const { return objective_; }

 private:
  QuadraticFitness objective_;
  double fitness_star_;
};

}  // namespace dpasync

#endif  // DPASYNC_ORACLE_H_
