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

// Convergence guarantees for the asynchronous learner.
//
// With S = 1/T^2 + N sum_i (1/T + 2 sqrt(2) / (n eps_i))^2 the squared
// parameter error of theta_L,T is bounded by c1 sqrt(S) + c2 S, where
//
//   C  = xi_g + xi
//   c1 = N C^2 / sigma^2
//   c2 = 2 N^2 C^2 sqrt(N + 1) / (sigma^2 (1 - sqrt(lambda)))
//
// and lambda is the mixing constant of the star gossip graph (owners
// 1..N, learner N + 1). For large T the fitness gap reduces to
//
//   cbar1 / n * sqrt(sum 1/eps_i^2) + cbar2 / n^2 * sum 1/eps_i^2,
//
// whose coefficients are not available in closed form and are fitted to
// measured sweeps instead.

#ifndef DPASYNC_BOUNDS_H_
#define DPASYNC_BOUNDS_H_

#include <iosfwd>
#include <span>
#include <vector>

#include "dpasync/model.h"
#include "dpasync/oracle.h"

namespace dpasync {

// Largest eigenvalue of a symmetric positive semidefinite matrix by power
// iteration. Throws ConvergenceError after max_iterations.
double TopEigenvaluePsd(const Matrix& a, double tolerance = 1e-10,
                        long max_iterations = 100'000);

// W = I - (e_i - e_{N+1})(e_i - e_{N+1})' / 2 for the edge between owner
// `edge` (1..N) and the learner.
Matrix gossip_matrix(int num_owners, int edge);

// ||W - 11'W / (N + 1)||_2^2 for a single edge.
double edge_deflated_norm_sq(int num_owners, int edge);

// lambda = || E_i[M_i' M_i] ||_2 with M_i = W_i - 11'W_i / (N + 1) and i
// uniform over the N edges: the squared deflated norm in expectation over
// the random edge. Always < 1.
double lambda_for_uniform_gossip(int num_owners);

struct BoundParams {
  int num_owners = 1;
  long horizon = 1;
  double n = 0.0;  // total record count
  std::vector<double> epsilons;
  double sigma = 0.0;
  double xi = 0.0;
  double xi_g = 0.0;
  double C = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;  // rho / T^2
  std::vector<double> nu;
  double c1 = 0.0;
  double c2 = 0.0;

  // Fills every derived field. Throws InvalidArgumentError if
  // epsilons.size() != N or any input is non-positive.
  static BoundParams Make(int num_owners, long horizon, double n,
                          std::vector<double> epsilons, double sigma,
                          double xi, double xi_g, double rho);
};

double bound_parameter_distance(const BoundParams& params);

struct FittedBound {
  double cbar1_prime = 0.0;
  double cbar2_prime = 0.0;
};

// (cbar1 / n) sqrt(sum 1/eps^2) + (cbar2 / n^2) sum 1/eps^2.
double limiting_bound_fitness(double n, std::span<const double> epsilons,
                              const FittedBound& fitted);

struct SweepPoint {
  double n = 0.0;
  std::vector<double> epsilons;
  double measured = 0.0;
};

// Nonnegative least squares on the two basis terms of the limiting bound.
// If the fit then sits above fewer than 95% of the points, both
// coefficients are scaled by the largest measured/fit ratio among the
// violated points. Throws InvalidArgumentError on fewer than 2 points or a
// rank-deficient basis.
FittedBound fit_constants(std::span<const SweepPoint> sweep);

// Fraction of points with limiting_bound_fitness >= measured.
double bound_coverage(std::span<const SweepPoint> sweep,
                      const FittedBound& fitted);

// f(theta_private) - f(theta*).
double cost_of_privacy(const ConstVectorRef& theta_private,
                       const OracleSolution& oracle,
                       std::span<const OwnerDataset> datasets,
                       const FitnessSpec& spec);

struct BoundRow {
  double n = 0.0;
  double eps = 0.0;
  double measured_psi = 0.0;
  double bound_psi = 0.0;
};

// CSV with header n,eps,measured_psi,bound_psi.
void write_bound_table(std::ostream& out, std::span<const BoundRow> rows);

}  // namespace dpasync

#endif  // DPASYNC_BOUNDS_H_
