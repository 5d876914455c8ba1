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

#include <cmath>
#include <filesystem>
#include <vector>

#include "gtest/gtest.h"
#include "lsvi/errors.hpp"
#include "lsvi/linear_mdp.hpp"

namespace lsvi {
namespace {

void expect_simplex(const Vector& v, const char* what) {
  EXPECT_GE(v.minCoeff(), 0.0) << what;
  EXPECT_NEAR(v.sum(), 1.0, 1e-12) << what;
}

TEST(GenerateSyntheticTest, ReferenceSizesProduceSimplexTables) {
  const LinearMdp mdp = generate_synthetic({500, 15, 30, 50, 3});
  ASSERT_EQ(mdp.features.rows(), 500 * 15);
  ASSERT_EQ(mdp.features.cols(), 30);
  ASSERT_EQ(mdp.measures.size(), 50u);
  ASSERT_EQ(mdp.reward_weights.size(), 50u);
  for (const Matrix& mu : mdp.measures) {
    ASSERT_EQ(mu.rows(), 30);
    ASSERT_EQ(mu.cols(), 500);
  }
  for (Eigen::Index r = 0; r < mdp.features.rows(); ++r) expect_simplex(mdp.features.row(r).transpose(), "phi");
  for (int h = 0; h < 50; ++h) {
    expect_simplex(mdp.reward_weights[h], "theta");
    for (int j = 0; j < 30; ++j) expect_simplex(mdp.measures[h].row(j).transpose(), "mu");
  }
}

TEST(GenerateSyntheticTest, OneDimensionalInstanceIsAPoint) {
  const LinearMdp mdp = generate_synthetic({1, 1, 1, 1, 77});
  EXPECT_EQ(mdp.features(0, 0), 1.0);
  EXPECT_EQ(mdp.reward_weights[0][0], 1.0);
  EXPECT_EQ(mdp.measures[0](0, 0), 1.0);
  EXPECT_EQ(reward(mdp, 0, 0, 0), 1.0);
  EXPECT_EQ(transition_probabilities(mdp, 0, 0, 0)[0], 1.0);
}

TEST(GenerateSyntheticTest, SameSeedIsBitIdenticalOtherSeedDiffers) {
  const LinearMdp a = generate_synthetic({3, 2, 2, 2, 1234});
  const LinearMdp b = generate_synthetic({3, 2, 2, 2, 1234});
  const LinearMdp c = generate_synthetic({3, 2, 2, 2, 1235});
  EXPECT_TRUE(identical(a, b));
  EXPECT_FALSE(identical(a, c));
}

TEST(GenerateSyntheticTest, RejectsZeroSizes) {
  EXPECT_THROW(generate_synthetic({0, 1, 1, 1, 0}), std::invalid_argument);
  EXPECT_THROW(generate_synthetic({1, 1, 1, 0, 0}), std::invalid_argument);
}

TEST(LinearMdpTest, TransitionRowsAndRewardsAreValidExhaustively) {
  const LinearMdp mdp = generate_synthetic({20, 4, 5, 6, 8});
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        const Vector p = transition_probabilities(mdp, s, a, h);
        EXPECT_GE(p.minCoeff(), -1e-12);
        EXPECT_NEAR(p.sum(), 1.0, 1e-9);
        const double r = reward(mdp, s, a, h);
        EXPECT_GE(r, 0.0);
        EXPECT_LE(r, 1.0);
      }
    }
  }
}

TEST(RewardTest, UniformThetaGivesOneOverD) {
  LinearMdp mdp = generate_synthetic({4, 3, 5, 2, 0});
  mdp.reward_weights[1] = Vector::Constant(5, 1.0 / 5.0);
  for (int s = 0; s < 4; ++s)
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(reward(mdp, s, a, 1), 0.2, 1e-15);
}

TEST(RewardTest, MatchesExplicitSummation) {
  const LinearMdp mdp = generate_synthetic({6, 3, 7, 3, 21});
  for (int s = 0; s < 6; ++s) {
    for (int a = 0; a < 3; ++a) {
      double sum = 0.0;
      for (int j = 0; j < 7; ++j) sum += mdp.features(s * 3 + a, j) * mdp.reward_weights[2][j];
      EXPECT_NEAR(reward(mdp, s, a, 2), sum, 1e-15);
    }
  }
  EXPECT_THROW(reward(mdp, 6, 0, 0), std::out_of_range);
  EXPECT_THROW(reward(mdp, 0, 3, 0), std::out_of_range);
  EXPECT_THROW(reward(mdp, 0, 0, 3), std::out_of_range);
}

TEST(TransitionSampleTest, PointMassMeasuresAlwaysReturnThatState) {
  LinearMdp mdp = generate_synthetic({5, 2, 3, 2, 4});
  for (auto& mu : mdp.measures) {
    mu.setZero();
    mu.col(0).setOnes();
  }
  RandomStream rng(1);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(transition_sample(mdp, i % 5, i % 2, i % 2, rng), 0);
}

TEST(TransitionSampleTest, SingleStateAlwaysReturnsIt) {
  const LinearMdp mdp = generate_synthetic({1, 3, 4, 2, 4});
  RandomStream rng(2);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(transition_sample(mdp, 0, i % 3, i % 2, rng), 0);
}

TEST(TransitionSampleTest, EmpiricalFrequenciesMatchDistribution) {
  const LinearMdp mdp = generate_synthetic({12, 3, 4, 2, 99});
  const Vector p = transition_probabilities(mdp, 5, 1, 1);
  std::vector<double> counts(12, 0.0);
  RandomStream rng(123);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[transition_sample(mdp, 5, 1, 1, rng)] += 1.0;
  double tv = 0.0;
  for (int s = 0; s < 12; ++s) tv += std::abs(counts[s] / n - p[s]);
  EXPECT_LE(0.5 * tv, 0.01);
  EXPECT_THROW(transition_sample(mdp, 12, 0, 0, rng), std::out_of_range);
}

TEST(ValidateTest, SyntheticInstanceIsClean) {
  EXPECT_TRUE(validate(generate_synthetic({30, 4, 6, 5, 2})).ok());
}

TEST(ValidateTest, FlagsRewardAboveOne) {
  LinearMdp mdp = generate_synthetic({3, 2, 3, 2, 5});
  mdp.reward_weights[0][1] = 2.0;
  mdp.features.row(0) = Vector::Unit(3, 1).transpose();  // phi(0, 0) is a point mass on coordinate 1
  const ValidationReport report = validate(mdp);
  bool found = false;
  for (const auto& v : report.violations) {
    if (v.kind == Violation::Kind::kRewardRange && v.state == 0 && v.action == 0 && v.step == 0) {
      EXPECT_DOUBLE_EQ(v.value, 2.0);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(ValidateTest, FlagsHalvedMeasureRow) {
  LinearMdp mdp = generate_synthetic({4, 2, 3, 2, 6});
  mdp.measures[1].row(2) *= 0.5;
  // Oracle: row sum for (s, a) at h=1 becomes 1 - 0.5 * phi(s, a)_2, so every pair with
  // phi_2 > 2e-9 is flagged with that sum.
  const ValidationReport report = validate(mdp);
  int expected_flags = 0;
  for (int s = 0; s < 4; ++s) {
    for (int a = 0; a < 2; ++a) {
      const double expected_sum = 1.0 - 0.5 * mdp.features(s * 2 + a, 2);
      if (std::abs(expected_sum - 1.0) <= 1e-9) continue;
      ++expected_flags;
      bool found = false;
      for (const auto& v : report.violations) {
        if (v.kind == Violation::Kind::kTransitionSum && v.state == s && v.action == a && v.step == 1) {
          EXPECT_NEAR(v.value, expected_sum, 1e-12);
          found = true;
        }
      }
      EXPECT_TRUE(found) << "s=" << s << " a=" << a;
    }
  }
  EXPECT_EQ(static_cast<int>(report.violations.size()), expected_flags);
}

TEST(SerializationTest, RoundTripIsBitExactAndValidates) {
  const LinearMdp mdp = generate_synthetic({500, 15, 30, 50, 17});
  const auto bytes = serialize(mdp);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "LMDPv001");
  const LinearMdp back = deserialize(bytes);
  EXPECT_TRUE(identical(mdp, back));
  EXPECT_EQ(serialize(back), bytes);
  EXPECT_TRUE(validate(back).ok());
}

TEST(SerializationTest, HeaderLayoutIsLittleEndian) {
  const LinearMdp mdp = generate_synthetic({3, 2, 4, 5, 0x0102030405060708ULL});
  const auto bytes = serialize(mdp);
  EXPECT_EQ(bytes[8], 3);
  EXPECT_EQ(bytes[16], 2);
  EXPECT_EQ(bytes[24], 4);
  EXPECT_EQ(bytes[32], 5);
  EXPECT_EQ(bytes[40], 0x08);
  EXPECT_EQ(bytes[47], 0x01);
  EXPECT_EQ(bytes.size(), 48u + 8u * (3 * 2 * 4 + 5 * 4 + 5 * 4 * 3) + 4u);
}

TEST(SerializationTest, TruncatedStreamIsAShapeMismatch) {
  auto bytes = serialize(generate_synthetic({3, 2, 2, 2, 1}));
  bytes.resize(bytes.size() - 9);
  try {
    deserialize(bytes);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("shape mismatch"), std::string::npos);
  }
}

TEST(SerializationTest, BadMagicAndCorruptPayloadAreRejected) {
  const auto good = serialize(generate_synthetic({3, 2, 2, 2, 1}));
  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize(bad_magic), ValidationError);
  auto corrupt = good;
  corrupt[60] ^= 0x01;
  try {
    deserialize(corrupt);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
  }
  EXPECT_THROW(deserialize({}), ValidationError);
}

TEST(SerializationTest, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "lsvi_mdp_roundtrip.lmdp";
  const LinearMdp mdp = generate_synthetic({7, 3, 4, 3, 8});
  save_mdp(mdp, path);
  EXPECT_TRUE(identical(load_mdp(path), mdp));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace lsvi
