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

// Linear model with squared-error loss and quadratic regularizer.
//
// The training objective over the union of all owners' records is
//
//   f(theta) = reg_coeff * theta'theta + (1/n) * sum (y - theta'x)^2
//
// minimized over the box ||theta||_inf <= theta_max. Everything here is a
// pure function of its arguments.

#ifndef DPASYNC_MODEL_H_
#define DPASYNC_MODEL_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dpasync {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstVectorRef = Eigen::Ref<const Vector>;

struct Record {
  Vector features;
  double target = 0.0;
};

// One owner's private records plus its total privacy budget. Records are
// stored row-wise; row j of features() pairs with targets()(j).
class OwnerDataset {
 public:
  // Throws InvalidArgumentError on empty data, row/target count mismatch,
  // non-finite entries or epsilon <= 0. epsilon may be +inf (noise off).
  OwnerDataset(int owner_id, RowMatrix features, Vector targets,
               double epsilon);

  static OwnerDataset FromRecords(int owner_id, std::span<const Record> records,
                                  double epsilon);

  int owner_id() const { return owner_id_; }
  std::size_t size() const { return static_cast<std::size_t>(targets_.size()); }
  Eigen::Index dim() const { return features_.cols(); }
  double epsilon() const { return epsilon_; }
  const RowMatrix& features() const { return features_; }
  const Vector& targets() const { return targets_; }
  // l1 norm of each feature row, cached for fast gradient clipping.
  const Vector& row_l1_norms() const { return row_l1_; }

  Record record(std::size_t i) const;

  OwnerDataset WithEpsilon(double epsilon) const;
  // Adjacent dataset: same records except row i.
  OwnerDataset WithRecordReplaced(std::size_t i, const Record& r) const;

 private:
  int owner_id_;
  RowMatrix features_;
  Vector targets_;
  Vector row_l1_;
  double epsilon_;
};

struct ModelParams {
  Vector theta;
  double theta_max = 0.0;
};

struct FitnessSpec {
  double reg_coeff = 1e-5;
  // Per-record gradient bound (l1), enforced by clipping.
  double xi = 1.0;
  // Regularizer gradient bound (l2) over the feasible box.
  double xi_g = 1.0;

  // Strong-convexity modulus of reg_coeff * theta'theta.
  double sigma() const { return 2.0 * reg_coeff; }

  // sup over ||theta||_inf <= theta_max of ||2 reg_coeff theta||_2.
  static double RegGradBound(double reg_coeff, double theta_max,
                             Eigen::Index dim);
};

double predict(const ConstVectorRef& theta, const ConstVectorRef& x);

double record_loss(const ConstVectorRef& theta, const ConstVectorRef& x,
                   double y);
double record_loss(const ConstVectorRef& theta, const Record& r);

// Unclipped gradient of the squared error: -2 (y - theta'x) x.
Vector record_grad(const ConstVectorRef& theta, const ConstVectorRef& x,
                   double y);
Vector record_grad(const ConstVectorRef& theta, const Record& r);

// Rescales grad so that ||grad||_1 <= xi. Direction is preserved.
Vector clip_grad(Vector grad, double xi);

double reg_value(const FitnessSpec& spec, const ConstVectorRef& theta);
Vector reg_grad(const FitnessSpec& spec, const ConstVectorRef& theta);

// Direct evaluation over every record. Throws on an empty union.
double fitness(const ConstVectorRef& theta,
               std::span<const OwnerDataset> datasets, const FitnessSpec& spec);

// Coordinate-wise clamp to [-theta_max, theta_max].
ModelParams project(const ConstVectorRef& theta, double theta_max);

// Same objective as fitness(), evaluated from sufficient statistics
// (X'X/n, X'y/n, y'y/n) in O(p^2) per call.
class QuadraticFitness {
 public:
  QuadraticFitness(std::span<const OwnerDataset> datasets,
                   const FitnessSpec& spec);

  double value(const ConstVectorRef& theta) const;
  Vector gradient(const ConstVectorRef& theta) const;

  // Hessian 2 (X'X/n + reg I).
  Matrix hessian() const;

  const Matrix& gram() const { return gram_; }
  const Vector& cross() const { return cross_; }
  double target_energy() const { return target_energy_; }
  std::size_t num_records() const { return n_; }
  const FitnessSpec& spec() const { return spec_; }

 private:
  FitnessSpec spec_;
  Matrix gram_;
  Vector cross_;
  double target_energy_ = 0.0;
  std::size_t n_ = 0;
};

}  // namespace dpasync

#endif  // DPASYNC_MODEL_H_
