// Copyright 2026 The LSVI Space Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lsvi/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "lsvi/errors.hpp"

namespace lsvi {

GramInverse::GramInverse(int dim, double ridge, std::uint64_t refresh_interval)
    : dim_(dim), ridge_(ridge), refresh_interval_(refresh_interval) {
  if (dim <= 0) throw std::invalid_argument("GramInverse: dim must be positive");
  if (!(ridge > 0.0) || !std::isfinite(ridge)) {
    throw std::invalid_argument("GramInverse: ridge must be positive and finite");
  }
  reset();
}

void GramInverse::reset() {
  inv_ = Matrix::Identity(dim_, dim_) / ridge_;
  if (refresh_interval_ > 0) gram_ = Matrix::Identity(dim_, dim_) * ridge_;
  scratch_ = Vector::Zero(dim_);
  count_ = 0;
  last_denominator_ = 1.0;
}

void GramInverse::update(const Vector& u) {
  if (u.size() != dim_) throw std::invalid_argument("GramInverse::update: dimension mismatch");
  if (!u.allFinite()) throw std::invalid_argument("GramInverse::update: non-finite vector");

  scratch_.noalias() = inv_ * u;
  const double denom = 1.0 + u.dot(scratch_);
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw NumericalFailure("Sherman-Morrison denominator is not positive");
  }
  inv_.noalias() -= (scratch_ * scratch_.transpose()) / denom;
  inv_ = 0.5 * (inv_ + inv_.transpose()).eval();
  last_denominator_ = denom;
  ++count_;

  if (refresh_interval_ > 0) {
    gram_.noalias() += u * u.transpose();
    if (count_ % refresh_interval_ == 0) {
      inv_ = gram_.ldlt().solve(Matrix::Identity(dim_, dim_));
      inv_ = 0.5 * (inv_ + inv_.transpose()).eval();
    }
  }
}

GramInverse rank_one_update(GramInverse g, const Vector& u) {
  g.update(u);
  return g;
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("frobenius_distance: dimension mismatch");
  }
  return (a - b).norm();
}

double ellipsoid_bonus(const Vector& x, const Matrix& inv) {
  if (x.size() != inv.rows() || inv.rows() != inv.cols()) {
    throw std::invalid_argument("ellipsoid_bonus: dimension mismatch");
  }
  const double q = x.dot(inv * x);
  if (q < 0.0 || !std::isfinite(q)) {
    throw NumericalFailure("ellipsoid_bonus: negative quadratic form, inverse is corrupted");
  }
  return std::sqrt(q);
}

double ellipsoid_bonus(const Vector& x, const GramInverse& g) {
  return ellipsoid_bonus(x, g.inverse());
}

double operator_norm_estimate(const Matrix& a, int iterations) {
  if (a.rows() != a.cols()) throw std::invalid_argument("operator_norm_estimate: non-square input");
  if (iterations <= 0) throw std::invalid_argument("operator_norm_estimate: iterations must be positive");
  const auto n = a.rows();
  if (n == 0) return 0.0;

  const Matrix ata = a.transpose() * a;
  Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  for (int it = 0; it < iterations; ++it) {
    Vector next = ata * v;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    v = next / norm;
  }
  return (a * v).norm();
}

}  // namespace lsvi
