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

#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace lsvi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Incrementally maintained inverse of a ridge-regularized Gram matrix
// A = lambda*I + sum_i u_i u_i^T, kept up to date with Sherman-Morrison.
//
// The stored inverse is re-symmetrized after every update. When a refresh
// interval is set, the Gram matrix itself is tracked as well and the inverse
// is recomputed densely every `refresh_interval` updates (stress testing only).
class GramInverse {
 public:
  GramInverse() = default;
  GramInverse(int dim, double ridge, std::uint64_t refresh_interval = 0);

  // A <- A + u u^T.
  void update(const Vector& u);

  // Back to (lambda*I)^{-1}.
  void reset();

  int dim() const { return dim_; }
  double ridge() const { return ridge_; }
  const Matrix& inverse() const { return inv_; }
  std::uint64_t rank_one_count() const { return count_; }

  // 1 + u^T A^{-1} u of the most recent update (1 before any update).
  double last_denominator() const { return last_denominator_; }

 private:
  int dim_ = 0;
  double ridge_ = 1.0;
  std::uint64_t refresh_interval_ = 0;
  std::uint64_t count_ = 0;
  double last_denominator_ = 1.0;
  Matrix inv_;
  Matrix gram_;  // only populated when refresh_interval_ > 0
  Vector scratch_;
};

// Functional form of GramInverse::update.
GramInverse rank_one_update(GramInverse g, const Vector& u);

// ||a - b||_F. Throws std::invalid_argument on shape mismatch.
double frobenius_distance(const Matrix& a, const Matrix& b);

// sqrt(x^T A^{-1} x). Throws NumericalFailure if the quadratic form is negative.
double ellipsoid_bonus(const Vector& x, const GramInverse& g);
double ellipsoid_bonus(const Vector& x, const Matrix& inv);

// Largest |eigenvalue| of a symmetric matrix by power iteration on a^T a,
// started from the normalized all-ones vector.
double operator_norm_estimate(const Matrix& a, int iterations = 200);

}  // namespace lsvi
