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

#include "dpasync/bounds.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "dpasync/csv.h"
#include "dpasync/errors.h"

namespace dpasync {
namespace {

double SumInverseSquares(std::span<const double> epsilons) {
  double s = 0.0;
  for (double e : epsilons) {
    if (!(e > 0.0)) throw InvalidArgumentError("epsilon must be > 0");
    s += 1.0 / (e * e);
  }
  return s;
}

std::array<double, 2> Basis(const SweepPoint& p) {
  if (!(p.n > 0.0)) throw InvalidArgumentError("sweep point: n must be > 0");
  const double s = SumInverseSquares(p.epsilons);
  return {std::sqrt(s) / p.n, s / (p.n * p.n)};
}

}  // namespace

double TopEigenvaluePsd(const Matrix& a, double tolerance,
                        long max_iterations) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InvalidArgumentError("TopEigenvaluePsd: need a square matrix");
  }
  // Deterministic start with no special symmetry.
  Vector v = Vector::LinSpaced(a.rows(), 1.0, static_cast<double>(a.rows()));
  v += Vector::Constant(a.rows(), 0.5).cwiseProduct(
      Vector::LinSpaced(a.rows(), 0.0, 1.0).array().square().matrix());
  v.normalize();
  double estimate = 0.0;
  for (long it = 0; it < max_iterations; ++it) {
    Vector w = a * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double rayleigh = v.dot(w);
    v = w / norm;
    if (std::abs(rayleigh - estimate) <= tolerance * std::max(1.0, rayleigh)) {
      return rayleigh;
    }
    estimate = rayleigh;
  }
  throw ConvergenceError("power iteration did not converge", estimate);
}

Matrix gossip_matrix(int num_owners, int edge) {
  if (num_owners < 1) throw InvalidArgumentError("gossip_matrix: N < 1");
  if (edge < 1 || edge > num_owners) {
    throw InvalidArgumentError("gossip_matrix: edge out of range");
  }
  const int m = num_owners + 1;
  Vector diff = Vector::Zero(m);
  diff(edge - 1) = 1.0;
  diff(m - 1) = -1.0;
  return Matrix::Identity(m, m) - 0.5 * diff * diff.transpose();
}

namespace {

Matrix DeflatedGossip(int num_owners, int edge) {
  const Matrix w = gossip_matrix(num_owners, edge);
  const auto m = static_cast<double>(num_owners + 1);
  const Matrix ones = Matrix::Ones(w.rows(), w.cols());
  return w - (ones * w) / m;
}

}  // namespace

double edge_deflated_norm_sq(int num_owners, int edge) {
  const Matrix d = DeflatedGossip(num_owners, edge);
  return TopEigenvaluePsd(d.transpose() * d);
}

double lambda_for_uniform_gossip(int num_owners) {
  if (num_owners < 1) throw InvalidArgumentError("lambda: N < 1");
  const int m = num_owners + 1;
  Matrix expected = Matrix::Zero(m, m);
  for (int i = 1; i <= num_owners; ++i) {
    const Matrix d = DeflatedGossip(num_owners, i);
    expected.noalias() += d.transpose() * d;
  }
  expected /= static_cast<double>(num_owners);
  const double lambda = TopEigenvaluePsd(expected);
  if (!(lambda < 1.0)) {
    throw ConvergenceError("lambda_for_uniform_gossip: lambda >= 1", lambda);
  }
  return std::max(lambda, 0.0);
}

BoundParams BoundParams::Make(int num_owners, long horizon, double n,
                              std::vector<double> epsilons, double sigma,
                              double xi, double xi_g, double rho) {
  if (num_owners < 1 || horizon < 1 || !(n > 0.0) || !(sigma > 0.0) ||
      !(xi > 0.0) || !(xi_g >= 0.0) || !(rho > 0.0)) {
    throw InvalidArgumentError("BoundParams: invalid argument");
  }
  if (static_cast<int>(epsilons.size()) != num_owners) {
    throw InvalidArgumentError("BoundParams: need one epsilon per owner");
  }
  BoundParams p;
  p.num_owners = num_owners;
  p.horizon = horizon;
  p.n = n;
  p.epsilons = std::move(epsilons);
  p.sigma = sigma;
  p.xi = xi;
  p.xi_g = xi_g;
  p.C = xi_g + xi;
  p.lambda = lambda_for_uniform_gossip(num_owners);
  const double t = static_cast<double>(horizon);
  p.alpha = rho / (t * t);
  for (double e : p.epsilons) {
    if (!(e > 0.0)) throw InvalidArgumentError("BoundParams: epsilon <= 0");
    p.nu.push_back(2.0 * std::sqrt(2.0) * xi * t / (n * e));
  }
  const double big_n = num_owners;
  const double c_sq = p.C * p.C;
  const double sigma_sq = sigma * sigma;
  p.c1 = big_n * c_sq / sigma_sq;
  p.c2 = 2.0 * big_n * big_n * c_sq * std::sqrt(big_n + 1.0) /
         (sigma_sq * (1.0 - std::sqrt(p.lambda)));
  return p;
}

double bound_parameter_distance(const BoundParams& params) {
  const double inv_t = 1.0 / static_cast<double>(params.horizon);
  double sum = 0.0;
  for (double e : params.epsilons) {
    const double term = inv_t + 2.0 * std::sqrt(2.0) / (params.n * e);
    sum += term * term;
  }
  const double s = inv_t * inv_t + params.num_owners * sum;
  return params.c1 * std::sqrt(s) + params.c2 * s;
}

double limiting_bound_fitness(double n, std::span<const double> epsilons,
                              const FittedBound& fitted) {
  if (!(n > 0.0)) throw InvalidArgumentError("limiting bound: n must be > 0");
  const double s = SumInverseSquares(epsilons);
  return fitted.cbar1_prime / n * std::sqrt(s) +
         fitted.cbar2_prime / (n * n) * s;
}

double bound_coverage(std::span<const SweepPoint> sweep,
                      const FittedBound& fitted) {
  if (sweep.empty()) return 1.0;
  std::size_t covered = 0;
  for (const SweepPoint& p : sweep) {
    if (limiting_bound_fitness(p.n, p.epsilons, fitted) >= p.measured) {
      ++covered;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(sweep.size());
}

FittedBound fit_constants(std::span<const SweepPoint> sweep) {
  if (sweep.size() < 2) {
    throw InvalidArgumentError("fit_constants: need at least 2 points");
  }
  // Normal equations of the 2-column least-squares problem, with columns
  // rescaled to unit norm so the rank test is scale-free.
  std::vector<std::array<double, 2>> basis;
  basis.reserve(sweep.size());
  std::array<double, 2> col_norm = {0.0, 0.0};
  for (const SweepPoint& p : sweep) {
    basis.push_back(Basis(p));
    col_norm[0] += basis.back()[0] * basis.back()[0];
    col_norm[1] += basis.back()[1] * basis.back()[1];
  }
  col_norm[0] = std::sqrt(col_norm[0]);
  col_norm[1] = std::sqrt(col_norm[1]);
  double g00 = 0, g01 = 0, g11 = 0, r0 = 0, r1 = 0;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const double a = basis[i][0] / col_norm[0];
    const double b = basis[i][1] / col_norm[1];
    g00 += a * a;
    g01 += a * b;
    g11 += b * b;
    r0 += a * sweep[i].measured;
    r1 += b * sweep[i].measured;
  }
  const double det = g00 * g11 - g01 * g01;
  if (!(det > 1e-12)) {
    throw InvalidArgumentError("fit_constants: degenerate sweep");
  }

  // Two-variable NNLS: compare the feasible candidates of each active set.
  auto residual = [&](double u, double v) {
    double sse = 0.0;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      const double fit =
          u * basis[i][0] / col_norm[0] + v * basis[i][1] / col_norm[1];
      sse += (fit - sweep[i].measured) * (fit - sweep[i].measured);
    }
    return sse;
  };
  std::array<std::array<double, 2>, 4> candidates = {{
      {0.0, 0.0},
      {std::max(0.0, r0 / g00), 0.0},
      {0.0, std::max(0.0, r1 / g11)},
      {(g11 * r0 - g01 * r1) / det, (g00 * r1 - g01 * r0) / det},
  }};
  std::array<double, 2> best = candidates[0];
  double best_sse = residual(best[0], best[1]);
  for (const auto& c : candidates) {
    if (c[0] < 0.0 || c[1] < 0.0) continue;
    const double sse = residual(c[0], c[1]);
    if (sse < best_sse) {
      best_sse = sse;
      best = c;
    }
  }
  FittedBound fitted{best[0] / col_norm[0], best[1] / col_norm[1]};

  if (bound_coverage(sweep, fitted) < 0.95) {
    double factor = 1.0;
    bool zero_fit = false;
    for (const SweepPoint& p : sweep) {
      const double fit = limiting_bound_fitness(p.n, p.epsilons, fitted);
      if (fit >= p.measured) continue;
      if (fit > 0.0) {
        factor = std::max(factor, p.measured / fit);
      } else {
        zero_fit = true;
      }
    }
    if (zero_fit) {
      // Nothing to scale; majorize with the quadratic term alone.
      double c2 = 0.0;
      for (std::size_t i = 0; i < sweep.size(); ++i) {
        c2 = std::max(c2, sweep[i].measured / basis[i][1]);
      }
      fitted = FittedBound{0.0, c2};
    } else {
      // Rounding can leave the binding point an ulp short.
      factor *= 1.0 + 1e-12;
      fitted.cbar1_prime *= factor;
      fitted.cbar2_prime *= factor;
    }
  }
  return fitted;
}

double cost_of_privacy(const ConstVectorRef& theta_private,
                       const OracleSolution& oracle,
                       std::span<const OwnerDataset> datasets,
                       const FitnessSpec& spec) {
  return fitness(theta_private, datasets, spec) - oracle.fitness_star;
}

void write_bound_table(std::ostream& out, std::span<const BoundRow> rows) {
  out << "n,eps,measured_psi,bound_psi\n";
  for (const BoundRow& r : rows) {
    out << FormatDouble(r.n) << ',' << FormatDouble(r.eps) << ','
        << FormatDouble(r.measured_psi) << ',' << FormatDouble(r.bound_psi)
        << '\n';
  }
}

}  // namespace dpasync
