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

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gtest/gtest.h"
#include "lsvi/diagnostics.hpp"
#include "lsvi/harness.hpp"
#include "lsvi/random.hpp"

namespace lsvi {
namespace {

Matrix random_symmetric(int n, RandomStream& rng) {
  Matrix m(n, n);
  for (auto& x : m.reshaped()) x = rng.normal();
  return 0.5 * (m + m.transpose());
}

TEST(JacobiTest, MatchesEigenSolver) {
  RandomStream rng(1);
  for (int n : {1, 2, 5, 12}) {
    const Matrix m = random_symmetric(n, rng);
    const Vector expected = Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues();
    const Vector got = jacobi_eigenvalues(m);
    EXPECT_LE((got - expected).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, m.norm()));
  }
}

TEST(JacobiTest, DiagonalAndZeroInputs) {
  const Vector d = jacobi_eigenvalues(Vector(Eigen::Vector3d(3.0, -1.0, 2.0)).asDiagonal());
  EXPECT_EQ(d, Vector(Eigen::Vector3d(-1.0, 2.0, 3.0)));
  EXPECT_EQ(jacobi_eigenvalues(Matrix::Zero(4, 4)), Vector::Zero(4));
  EXPECT_THROW(jacobi_eigenvalues(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST(GaussianFeatureSpecTest, RejectsBadCovariance) {
  auto spec = GaussianFeatureSpec::isotropic(2, 10, 0);
  EXPECT_NO_THROW(spec.validate());
  spec.covariance(0, 1) = 0.5;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.covariance = Matrix::Zero(2, 2);
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(GaussianFeatureSpecTest, DrawsMatchCovariance) {
  GaussianFeatureSpec spec = GaussianFeatureSpec::isotropic(2, 200000, 3);
  spec.covariance << 2.0, 0.6, 0.6, 1.0;
  const Matrix draws = draw_gaussian_features(spec);
  const Matrix empirical = draws.transpose() * draws / spec.n_samples;
  EXPECT_LE((empirical - spec.covariance).cwiseAbs().maxCoeff(), 0.03);
}

TEST(DecaySeriesTest, ZeroDrawsGiveZeroSeries) {
  auto spec = GaussianFeatureSpec::isotropic(3, 40, 0);
  spec.zero_draws = true;
  for (double v : lambda_step_norm_series(spec).values) EXPECT_EQ(v, 0.0);
  for (double v : min_eigenvalue_series(spec).values) EXPECT_EQ(v, 0.0);
}

TEST(DecaySeriesTest, ScalarClosedForms) {
  const auto spec = GaussianFeatureSpec::isotropic(1, 64, 9);
  const Matrix draws = draw_gaussian_features(spec);
  const DecaySeries steps = lambda_step_norm_series(spec, 2.0);
  ASSERT_EQ(steps.values.size(), 64u);
  double gram = 2.0;
  for (int k = 0; k < 64; ++k) {
    const double next = gram + draws(k, 0) * draws(k, 0);
    EXPECT_NEAR(steps.values[k], 1.0 / gram - 1.0 / next, 1e-12);
    EXPECT_EQ(steps.index[k], k + 1);
    gram = next;
  }
  const DecaySeries mins = min_eigenvalue_series(spec);
  EXPECT_EQ(mins.index, (std::vector<int>{1, 2, 4, 8, 16, 32, 64}));
  for (std::size_t i = 0; i < mins.index.size(); ++i) {
    double sum = 0.0;
    for (int k = 0; k < mins.index[i]; ++k) sum += draws(k, 0) * draws(k, 0);
    EXPECT_NEAR(mins.values[i], sum, 1e-12 * std::max(1.0, sum));
  }
}

TEST(DecaySeriesTest, StepNormMatchesRankOneClosedForm) {
  const auto spec = GaussianFeatureSpec::isotropic(4, 50, 2);
  const Matrix draws = draw_gaussian_features(spec);
  const DecaySeries steps = lambda_step_norm_series(spec);
  Matrix gram = Matrix::Identity(4, 4);
  for (int k = 0; k < 50; ++k) {
    const Vector w = draws.row(k).transpose();
    const Matrix inv = gram.fullPivLu().inverse();
    const Vector iw = inv * w;
    const double expected = iw.squaredNorm() / (1.0 + w.dot(iw));
    EXPECT_NEAR(steps.values[k], expected, 1e-9 * std::max(1.0, expected));
    gram += w * w.transpose();
  }
}

TEST(DecaySeriesTest, MinEigenvalueIsZeroBeforeFullRank) {
  const auto spec = GaussianFeatureSpec::isotropic(6, 20, 4);
  const DecaySeries s = min_eigenvalue_series(spec, std::vector<int>{1, 3, 5, 6, 12});
  for (int i = 0; i < 3; ++i) EXPECT_LE(s.values[i], 1e-10);
  EXPECT_GT(s.values[3], 0.0);
  EXPECT_GE(s.values[4], s.values[3]);
  EXPECT_THROW(min_eigenvalue_series(spec, std::vector<int>{21}), std::invalid_argument);
}

TEST(DecaySeriesTest, MinEigenvalueGrowsLinearlyForIsotropicDraws) {
  EXPECT_GE(min_eigenvalue_trials_passing(8, 800, 100, 7), 95);
}

TEST(EllipsoidTest, RandomTrialsSatisfyInequality) {
  for (int d : {1, 3, 8}) {
    const EllipsoidReport r = ellipsoid_inequality_check(500, d, 11);
    EXPECT_TRUE(r.passed());
    EXPECT_EQ(r.trials, 500);
    EXPECT_LE(r.max_lhs_minus_rhs, kEllipsoidSlack);
  }
  EXPECT_THROW(ellipsoid_inequality_check(0, 2, 0), std::invalid_argument);
}

TEST(WeightSeriesTest, ConstantWeightsGiveZeros) {
  const std::vector<Vector> w(10, Vector::Constant(3, 0.25));
  const DecaySeries s = weight_step_norm_series(w);
  ASSERT_EQ(s.values.size(), 9u);
  for (double v : s.values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(weight_step_norm_series({}), std::invalid_argument);
}

TEST(WeightSeriesTest, SingleChangeAppearsOnce) {
  std::vector<Vector> w(6, Vector::Zero(2));
  for (int k = 3; k < 6; ++k) w[k] = Vector(Eigen::Vector2d(3.0, 4.0));
  const DecaySeries s = weight_step_norm_series(w);
  EXPECT_EQ(s.values, (std::vector<double>{0.0, 0.0, 5.0, 0.0, 0.0}));
  EXPECT_EQ(s.index, (std::vector<int>{1, 2, 3, 4, 5}));
}

TEST(WeightSeriesTest, RecomputesFromRecordedSnapshots) {
  KeyValueConfig kv;
  kv.set("env.n_states", "20");
  kv.set("env.n_actions", "3");
  kv.set("env.dim", "4");
  kv.set("env.horizon", "3");
  kv.set("hp.K", "500");
  kv.set("hp.variant", "adaptive");
  kv.set("hp.budget", "0");
  kv.set("run.record_snapshots", "true");
  const RunResult run = run_single(make_experiment_config(kv), 3);
  ASSERT_EQ(run.weights.size(), 500u);
  for (int h = 0; h < 3; ++h) {
    std::vector<Vector> series;
    for (const auto& ep : run.weights) series.push_back(ep[h]);
    const DecaySeries s = weight_step_norm_series(series);
    // Budget 0 never learns: the weights stay at zero throughout.
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      EXPECT_EQ(s.values[k], (series[k + 1] - series[k]).norm());
      EXPECT_EQ(s.values[k], 0.0);
    }
  }
}

TEST(RatioStatisticsTest, MediansAndPartialSums) {
  DecaySeries s;
  for (int k = 1; k <= 100; ++k) {
    s.index.push_back(k);
    s.values.push_back(1.0 / k);
  }
  EXPECT_NEAR(scaled_median_ratio(s, 1.0, 1, 10, 91, 100), 1.0, 1e-12);
  EXPECT_NEAR(scaled_median_ratio(s, 0.0, 1, 3, 4, 4), 0.25 / 0.5, 1e-12);
  EXPECT_NEAR(partial_sum(s, 1, 4), 1.0 + 0.5 + 1.0 / 3 + 0.25, 1e-15);
  DecaySeries zeros = s;
  std::fill(zeros.values.begin(), zeros.values.end(), 0.0);
  EXPECT_EQ(scaled_median_ratio(zeros, 1.0, 1, 10, 91, 100), 0.0);
  EXPECT_THROW(scaled_median_ratio(s, 1.0, 200, 300, 1, 2), std::invalid_argument);
}

TEST(RatioStatisticsTest, StepNormPartialSumsAreStableAcrossSeeds) {
  std::vector<double> sums;
  for (std::uint64_t seed = 0; seed < 5; ++seed)
    sums.push_back(partial_sum(lambda_step_norm_series(GaussianFeatureSpec::isotropic(4, 2000, seed)), 1000, 2000));
  const auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
  EXPECT_GT(*lo, 0.0);
  EXPECT_LE(*hi / *lo, 2.0);
}

TEST(RatioStatisticsTest, StepNormDecaysLikeInverseSquare) {
  const DecaySeries s = lambda_step_norm_series(GaussianFeatureSpec::isotropic(4, 4000, 1));
  const double ratio = scaled_median_ratio(s, 2.0, 200, 400, 3000, 4000);
  EXPECT_GE(ratio, 1.0 / 20);
  EXPECT_LE(ratio, 20.0);
}

}  // namespace
}  // namespace lsvi
