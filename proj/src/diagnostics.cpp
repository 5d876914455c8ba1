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

#include "lsvi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lsvi/random.hpp"

namespace lsvi {

Vector jacobi_eigenvalues(const Matrix& input, double tol, int max_sweeps) {
  if (input.rows() != input.cols()) throw std::invalid_argument("jacobi_eigenvalues: non-square input");
  Matrix a = 0.5 * (input + input.transpose());
  const auto n = a.rows();
  const double scale = a.norm();
  if (scale == 0.0) return Vector::Zero(n);

  auto off_diagonal = [&a, n] {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i != j) sum += a(i, j) * a(i, j);
      }
    }
    return std::sqrt(sum);
  };

  for (int sweep = 0; sweep < max_sweeps && off_diagonal() > tol * scale; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vector eig = a.diagonal();
  std::sort(eig.data(), eig.data() + n);
  return eig;
}

void GaussianFeatureSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("GaussianFeatureSpec: dim must be positive");
  if (n_samples < 1) throw std::invalid_argument("GaussianFeatureSpec: n_samples must be positive");
  if (covariance.rows() != dim || covariance.cols() != dim) {
    throw std::invalid_argument("GaussianFeatureSpec: covariance must be dim x dim");
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("GaussianFeatureSpec: covariance is not symmetric");
  }
  if (!(jacobi_eigenvalues(covariance)[0] > 0.0)) {
    throw std::invalid_argument("GaussianFeatureSpec: covariance is not positive definite");
  }
}

GaussianFeatureSpec GaussianFeatureSpec::isotropic(int dim, int n_samples, std::uint64_t seed) {
  GaussianFeatureSpec spec;
  spec.dim = dim;
  spec.covariance = Matrix::Identity(dim, dim);
  spec.n_samples = n_samples;
  spec.seed = seed;
  return spec;
}

Matrix draw_gaussian_features(const GaussianFeatureSpec& spec) {
  spec.validate();
  Matrix draws = Matrix::Zero(spec.n_samples, spec.dim);
  if (spec.zero_draws) return draws;
  const Matrix chol = spec.covariance.llt().matrixL();
  RandomStream rng = RandomStream(spec.seed).derive({stream_tag::kDiagnostics});
  Vector z(spec.dim);
  for (int k = 0; k < spec.n_samples; ++k) {
    for (int j = 0; j < spec.dim; ++j) z[j] = rng.normal();
    draws.row(k) = (chol * z).transpose();
  }
  return draws;
}

DecaySeries lambda_step_norm_series(const GaussianFeatureSpec& spec, double lambda) {
  const Matrix draws = draw_gaussian_features(spec);
  DecaySeries series;
  series.label = "lambda_step_norm";
  GramInverse gram(spec.dim, lambda);
  for (int k = 1; k <= spec.n_samples; ++k) {
    const Matrix before = gram.inverse();
    gram.update(draws.row(k - 1).transpose());
    series.index.push_back(k);
    series.values.push_back(operator_norm_estimate(before - gram.inverse()));
  }
  return series;
}

DecaySeries min_eigenvalue_series(const GaussianFeatureSpec& spec, std::optional<std::vector<int>> checkpoints) {
  const Matrix draws = draw_gaussian_features(spec);
  std::vector<int> marks;
  if (checkpoints) {
    marks = *checkpoints;
    std::sort(marks.begin(), marks.end());
  } else {
    for (int k = spec.dim; k <= spec.n_samples; k *= 2) marks.push_back(k);
  }
  DecaySeries series;
  series.label = "min_eigenvalue";
  Matrix sum = Matrix::Zero(spec.dim, spec.dim);
  int used = 0;
  for (int k : marks) {
    if (k < 0 || k > spec.n_samples) throw std::invalid_argument("min_eigenvalue_series: checkpoint out of range");
    for (; used < k; ++used) sum.noalias() += draws.row(used).transpose() * draws.row(used);
    series.index.push_back(k);
    series.values.push_back(std::max(0.0, jacobi_eigenvalues(sum)[0]));
  }
  return series;
}

int min_eigenvalue_trials_passing(int dim, int k, int trials, std::uint64_t seed) {
  int passing = 0;
  const RandomStream root(seed);
  for (int t = 0; t < trials; ++t) {
    auto spec = GaussianFeatureSpec::isotropic(dim, k, root.derive({static_cast<std::uint64_t>(t)}).key());
    const DecaySeries s = min_eigenvalue_series(spec, std::vector<int>{k});
    if (s.values.front() >= k / 100.0) ++passing;
  }
  return passing;
}

namespace {

Matrix random_spd(int dim, RandomStream& rng) {
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
  }
  return g.transpose() * g + 1e-3 * Matrix::Identity(dim, dim);
}

}  // namespace

EllipsoidReport ellipsoid_inequality_check(int trials, int dim, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("ellipsoid_inequality_check: trials must be >= 1");
  if (dim < 1) throw std::invalid_argument("ellipsoid_inequality_check: dim must be >= 1");
  EllipsoidReport report;
  report.trials = trials;
  RandomStream rng = RandomStream(seed).derive({stream_tag::kDiagnostics, 1});
  for (int t = 0; t < trials; ++t) {
    EllipsoidWitness w;
    w.a = random_spd(dim, rng);
    w.a_prime = random_spd(dim, rng);
    w.x.resize(dim);
    for (int j = 0; j < dim; ++j) w.x[j] = rng.normal();
    w.lhs = std::abs(w.x.dot(w.a * w.x) - w.x.dot(w.a_prime * w.x));
    // Exact spectral norm of the symmetric difference.
    const Vector eig = jacobi_eigenvalues(w.a - w.a_prime);
    const double op_norm = std::max(std::abs(eig[0]), std::abs(eig[dim - 1]));
    w.rhs = w.x.squaredNorm() * op_norm;
    report.max_lhs_minus_rhs = t == 0 ? w.lhs - w.rhs : std::max(report.max_lhs_minus_rhs, w.lhs - w.rhs);
    if (w.lhs > w.rhs + kEllipsoidSlack) report.violations.push_back(std::move(w));
  }
  return report;
}

DecaySeries weight_step_norm_series(const std::vector<Vector>& weights_by_episode) {
  if (weights_by_episode.empty()) throw std::invalid_argument("weight_step_norm_series: no recorded weights");
  DecaySeries series;
  series.label = "weight_step_norm";
  for (std::size_t k = 1; k < weights_by_episode.size(); ++k) {
    series.index.push_back(static_cast<int>(k));
    series.values.push_back((weights_by_episode[k] - weights_by_episode[k - 1]).norm());
  }
  return series;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty window");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

std::vector<double> scaled_window(const DecaySeries& s, double power, int lo, int hi) {
  std::vector<double> out;
  for (std::size_t i = 0; i < s.index.size(); ++i) {
    if (s.index[i] >= lo && s.index[i] <= hi) out.push_back(std::pow(s.index[i], power) * s.values[i]);
  }
  return out;
}

}  // namespace

double scaled_median_ratio(const DecaySeries& series, double power, int early_lo, int early_hi, int late_lo,
                           int late_hi) {
  const double early = median_of(scaled_window(series, power, early_lo, early_hi));
  const double late = median_of(scaled_window(series, power, late_lo, late_hi));
  if (early == 0.0) return late == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return late / early;
}

double partial_sum(const DecaySeries& series, int lo, int hi) {
  double total = 0.0;
  for (std::size_t i = 0; i < series.index.size(); ++i) {
    if (series.index[i] >= lo && series.index[i] <= hi) total += series.values[i];
  }
  return total;
}

}  // namespace lsvi
