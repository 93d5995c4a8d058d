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

#include "dpasync/model.h"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "dpasync/errors.h"

namespace dpasync {
namespace {

void CheckSameDim(Eigen::Index a, Eigen::Index b, const char* where) {
  if (a != b) {
    throw InvalidArgumentError(std::string(where) + ": dimension mismatch (" +
                               std::to_string(a) + " vs " + std::to_string(b) +
                               ")");
  }
}

}  // namespace

OwnerDataset::OwnerDataset(int owner_id, RowMatrix features, Vector targets,
                           double epsilon)
    : owner_id_(owner_id),
      features_(std::move(features)),
      targets_(std::move(targets)),
      epsilon_(epsilon) {
  if (targets_.size() == 0) {
    throw InvalidArgumentError("OwnerDataset: no records");
  }
  if (features_.rows() != targets_.size()) {
    throw InvalidArgumentError("OwnerDataset: feature rows != targets");
  }
  if (!(epsilon_ > 0.0)) {
    throw InvalidArgumentError("OwnerDataset: epsilon must be positive");
  }
  if (!features_.allFinite() || !targets_.allFinite()) {
    throw InvalidArgumentError("OwnerDataset: non-finite entry");
  }
  row_l1_ = features_.cwiseAbs().rowwise().sum();
}

OwnerDataset OwnerDataset::FromRecords(int owner_id,
                                       std::span<const Record> records,
                                       double epsilon) {
  if (records.empty()) throw InvalidArgumentError("OwnerDataset: no records");
  const Eigen::Index p = records.front().features.size();
  RowMatrix x(static_cast<Eigen::Index>(records.size()), p);
  Vector y(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    CheckSameDim(records[i].features.size(), p, "OwnerDataset::FromRecords");
    x.row(static_cast<Eigen::Index>(i)) = records[i].features.transpose();
    y(static_cast<Eigen::Index>(i)) = records[i].target;
  }
  return OwnerDataset(owner_id, std::move(x), std::move(y), epsilon);
}

Record OwnerDataset::record(std::size_t i) const {
  const auto row = static_cast<Eigen::Index>(i);
  return Record{features_.row(row).transpose(), targets_(row)};
}

OwnerDataset OwnerDataset::WithEpsilon(double epsilon) const {
  return OwnerDataset(owner_id_, features_, targets_, epsilon);
}

OwnerDataset OwnerDataset::WithRecordReplaced(std::size_t i,
                                              const Record& r) const {
  CheckSameDim(r.features.size(), dim(), "WithRecordReplaced");
  if (i >= size()) throw InvalidArgumentError("WithRecordReplaced: index");
  RowMatrix x = features_;
  Vector y = targets_;
  x.row(static_cast<Eigen::Index>(i)) = r.features.transpose();
  y(static_cast<Eigen::Index>(i)) = r.target;
  return OwnerDataset(owner_id_, std::move(x), std::move(y), epsilon_);
}

double FitnessSpec::RegGradBound(double reg_coeff, double theta_max,
                                 Eigen::Index dim) {
  return 2.0 * reg_coeff * theta_max * std::sqrt(static_cast<double>(dim));
}

double predict(const ConstVectorRef& theta, const ConstVectorRef& x) {
  CheckSameDim(theta.size(), x.size(), "predict");
  return theta.dot(x);
}

double record_loss(const ConstVectorRef& theta, const ConstVectorRef& x,
                   double y) {
  const double r = y - predict(theta, x);
  return r * r;
}

double record_loss(const ConstVectorRef& theta, const Record& r) {
  return record_loss(theta, r.features, r.target);
}

Vector record_grad(const ConstVectorRef& theta, const ConstVectorRef& x,
                   double y) {
  const double r = y - predict(theta, x);
  return (-2.0 * r) * x;
}

Vector record_grad(const ConstVectorRef& theta, const Record& r) {
  return record_grad(theta, r.features, r.target);
}

Vector clip_grad(Vector grad, double xi) {
  if (!(xi > 0.0)) throw InvalidArgumentError("clip_grad: xi must be > 0");
  double norm = grad.lpNorm<1>();
  if (norm <= xi) return grad;
  grad *= xi / norm;
  // Rounding in the rescale can leave the norm a few ulps above xi.
  while ((norm = grad.lpNorm<1>()) > xi) {
    grad *= std::nextafter(xi / norm, 0.0);
  }
  return grad;
}

double reg_value(const FitnessSpec& spec, const ConstVectorRef& theta) {
  return spec.reg_coeff * theta.squaredNorm();
}

Vector reg_grad(const FitnessSpec& spec, const ConstVectorRef& theta) {
  return (2.0 * spec.reg_coeff) * theta;
}

double fitness(const ConstVectorRef& theta,
               std::span<const OwnerDataset> datasets,
               const FitnessSpec& spec) {
  std::size_t n = 0;
  double loss_sum = 0.0;
  for (const OwnerDataset& d : datasets) {
    CheckSameDim(d.dim(), theta.size(), "fitness");
    const Vector residual = d.targets() - d.features() * theta;
    loss_sum += residual.squaredNorm();
    n += d.size();
  }
  if (n == 0) throw InvalidArgumentError("fitness: no records");
  return reg_value(spec, theta) + loss_sum / static_cast<double>(n);
}

ModelParams project(const ConstVectorRef& theta, double theta_max) {
  if (!(theta_max >= 0.0)) {
    throw InvalidArgumentError("project: theta_max must be nonnegative");
  }
  return ModelParams{theta.cwiseMax(-theta_max).cwiseMin(theta_max),
                     theta_max};
}

QuadraticFitness::QuadraticFitness(std::span<const OwnerDataset> datasets,
                                   const FitnessSpec& spec)
    : spec_(spec) {
  if (datasets.empty()) throw InvalidArgumentError("QuadraticFitness: empty");
  const Eigen::Index p = datasets.front().dim();
  gram_ = Matrix::Zero(p, p);
  cross_ = Vector::Zero(p);
  for (const OwnerDataset& d : datasets) {
    CheckSameDim(d.dim(), p, "QuadraticFitness");
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(d.features().transpose());
    cross_.noalias() += d.features().transpose() * d.targets();
    target_energy_ += d.targets().squaredNorm();
    n_ += d.size();
  }
  gram_ = gram_.selfadjointView<Eigen::Lower>();
  const double inv_n = 1.0 / static_cast<double>(n_);
  gram_ *= inv_n;
  cross_ *= inv_n;
  target_energy_ *= inv_n;
}

double QuadraticFitness::value(const ConstVectorRef& theta) const {
  CheckSameDim(theta.size(), cross_.size(), "QuadraticFitness::value");
  const double loss =
      target_energy_ - 2.0 * cross_.dot(theta) + theta.dot(gram_ * theta);
  // The expansion can round slightly below zero on near-perfect fits.
  return reg_value(spec_, theta) + std::max(loss, 0.0);
}

Vector QuadraticFitness::gradient(const ConstVectorRef& theta) const {
  CheckSameDim(theta.size(), cross_.size(), "QuadraticFitness::gradient");
  return 2.0 * (gram_ * theta - cross_) + reg_grad(spec_, theta);
}

Matrix QuadraticFitness::hessian() const {
  return 2.0 * (gram_ + spec_.reg_coeff *
                            Matrix::Identity(gram_.rows(), gram_.cols()));
}

}  // namespace dpasync
