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

#include "dpasync/oracle.h"

#include <algorithm>
#include <cmath>

#include "dpasync/errors.h"

namespace dpasync {
namespace {

void RequirePositiveReg(const FitnessSpec& spec, const char* where) {
  if (!(spec.reg_coeff > 0.0)) {
    throw InvalidArgumentError(std::string(where) +
                               ": reg_coeff must be > 0 for a unique optimum");
  }
}

double ProjectedGradientResidual(const QuadraticFitness& f,
                                 const Vector& theta, double theta_max) {
  const Vector grad = f.gradient(theta);
  if (std::isinf(theta_max)) return grad.norm();
  return (theta - project(theta - grad, theta_max).theta).norm();
}

}  // namespace

OracleSolution solve_exact(std::span<const OwnerDataset> datasets,
                           const FitnessSpec& spec, double theta_max) {
  RequirePositiveReg(spec, "solve_exact");
  const QuadraticFitness f(datasets, spec);
  const Eigen::Index p = f.cross().size();
  const Matrix normal = f.gram() + spec.reg_coeff * Matrix::Identity(p, p);
  const Eigen::LLT<Matrix> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw InvalidArgumentError("solve_exact: normal equations not SPD");
  }
  Vector theta = llt.solve(f.cross());
  // One step of iterative refinement.
  theta += llt.solve(f.cross() - normal * theta);
  if (theta.lpNorm<Eigen::Infinity>() > theta_max) {
    return solve_iterative(datasets, spec, theta_max);
  }
  OracleSolution out;
  out.theta_star = ModelParams{theta, theta_max};
  out.fitness_star = fitness(theta, datasets, spec);
  out.solver_residual = f.gradient(theta).norm();
  return out;
}

OracleSolution solve_iterative(std::span<const OwnerDataset> datasets,
                               const FitnessSpec& spec, double theta_max,
                               const IterativeOptions& options) {
  RequirePositiveReg(spec, "solve_iterative");
  const QuadraticFitness f(datasets, spec);
  const Matrix hessian = f.hessian();
  Vector theta = Vector::Zero(f.cross().size());
  // The trace bounds the largest Hessian eigenvalue, so 1/trace is always
  // accepted; each iteration first tries twice the previous step.
  double step = 1.0 / std::max(hessian.trace(), 1e-300);
  for (long it = 0; it < options.max_iterations; ++it) {
    const Vector grad = f.gradient(theta);
    Vector delta;
    double curvature;
    // Backtracking on the sufficient-decrease test. For a quadratic,
    // f(theta + d) - f(theta) = grad'd + d'Hd/2 exactly, so the test
    // reduces to d'Hd <= |d|^2 / step with no cancellation error.
    for (;;) {
      delta = project(theta - step * grad, theta_max).theta - theta;
      curvature = delta.dot(hessian * delta);
      if (curvature <= delta.squaredNorm() / step) break;
      step *= 0.5;
    }
    theta += delta;
    if (options.on_step) {
      options.on_step(it + 1, grad.dot(delta) + 0.5 * curvature);
    }
    if (delta.lpNorm<Eigen::Infinity>() <= options.step_tolerance) {
      OracleSolution out;
      out.theta_star = ModelParams{theta, theta_max};
      out.fitness_star = fitness(theta, datasets, spec);
      out.solver_residual = ProjectedGradientResidual(f, theta, theta_max);
      return out;
    }
    step *= 2.0;
  }
  throw ConvergenceError("solve_iterative: no convergence",
                         ProjectedGradientResidual(f, theta, theta_max));
}

OracleSolution solo_model(const OwnerDataset& dataset, const FitnessSpec& spec,
                          double theta_max) {
  return solve_exact(std::span<const OwnerDataset>(&dataset, 1), spec,
                     theta_max);
}

double relative_fitness(const ConstVectorRef& theta,
                        const OracleSolution& oracle,
                        std::span<const OwnerDataset> datasets,
                        const FitnessSpec& spec) {
  if (!(oracle.fitness_star > 0.0)) {
    throw InvalidArgumentError("relative_fitness: fitness_star must be > 0");
  }
  return fitness(theta, datasets, spec) / oracle.fitness_star - 1.0;
}

RelativeFitness::RelativeFitness(std::span<const OwnerDataset> datasets,
                                 const FitnessSpec& spec, double fitness_star)
    : objective_(datasets, spec), fitness_star_(fitness_star) {
  if (!(fitness_star_ > 0.0)) {
    throw InvalidArgumentError("RelativeFitness: fitness_star must be > 0");
  }
}

double RelativeFitness::operator()(const ConstVectorRef& theta) const {
  return objective_.value(theta) / fitness_star_ - 1.0;
}

}  // namespace dpasync
