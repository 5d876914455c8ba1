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
#include <optional>
#include <string>
#include <vector>

#include "lsvi/linalg.hpp"

namespace lsvi {

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
// Iterates until the off-diagonal Frobenius mass falls below tol * ||a||_F.
Vector jacobi_eigenvalues(const Matrix& a, double tol = 1e-10, int max_sweeps = 100);

// i.i.d. N(0, covariance) feature draws.
struct GaussianFeatureSpec {
  int dim = 1;
  Matrix covariance = Matrix::Identity(1, 1);
  int n_samples = 1;
  std::uint64_t seed = 0;
  bool zero_draws = false;  // forced-degenerate mode: every draw is the zero vector

  // Symmetry within 1e-12 and a positive smallest eigenvalue; throws std::invalid_argument.
  void validate() const;

  static GaussianFeatureSpec isotropic(int dim, int n_samples, std::uint64_t seed);
};

// n_samples x dim matrix of draws, row k is w_{k+1}.
Matrix draw_gaussian_features(const GaussianFeatureSpec& spec);

struct DecaySeries {
  std::string label;
  std::vector<int> index;
  std::vector<double> values;
};

// v_k = ||Lambda_k^{-1} - Lambda_{k+1}^{-1}||_{2->2} for k = 1..n, where
// Lambda_k = lambda*I + sum_{i<k} w_i w_i^T.
DecaySeries lambda_step_norm_series(const GaussianFeatureSpec& spec, double lambda = 1.0);

// lambda_min(sum_{i<=k} w_i w_i^T) at the given checkpoints (default d, 2d, 4d, ... <= n).
DecaySeries min_eigenvalue_series(const GaussianFeatureSpec& spec, std::optional<std::vector<int>> checkpoints = {});

// Number of seeded trials (out of `trials`) in which lambda_min after k draws
// from N(0, I_d) is at least k / 100.
int min_eigenvalue_trials_passing(int dim, int k, int trials, std::uint64_t seed);

struct EllipsoidWitness {
  Matrix a;
  Matrix a_prime;
  Vector x;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct EllipsoidReport {
  int trials = 0;
  double max_lhs_minus_rhs = -1.0;  // most adversarial margin observed
  std::vector<EllipsoidWitness> violations;
  bool passed() const { return violations.empty(); }
};

inline constexpr double kEllipsoidSlack = 1e-9;

// | ||x||_A^2 - ||x||_{A'}^2 | <= ||x||^2 ||A - A'||_{2->2} on random SPD pairs.
EllipsoidReport ellipsoid_inequality_check(int trials, int dim, std::uint64_t seed);

// ||w_{k+1} - w_k||_2 for k = 1..K-1 over per-episode weight vectors of one step.
DecaySeries weight_step_norm_series(const std::vector<Vector>& weights_by_episode);

// median_{k in late} k^p v_k / median_{k in early} k^p v_k. Returns 0 when both medians are 0.
double scaled_median_ratio(const DecaySeries& series, double power, int early_lo, int early_hi, int late_lo,
                           int late_hi);

// sum of v_k over k in [lo, hi].
double partial_sum(const DecaySeries& series, int lo, int hi);

}  // namespace lsvi
