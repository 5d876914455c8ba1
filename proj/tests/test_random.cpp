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
#include <set>

#include "gtest/gtest.h"
#include "lsvi/random.hpp"

namespace lsvi {
namespace {

TEST(RandomStreamTest, OutputIsAPureFunctionOfKeyAndCounter) {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  RandomStream c(43);
  EXPECT_NE(RandomStream(42).next_u64(), c.next_u64());
}

TEST(RandomStreamTest, DeriveDoesNotAdvanceAndSeparatesTags) {
  RandomStream root(1);
  const auto x = root.derive({1, 2});
  const auto y = root.derive({1, 2});
  const auto z = root.derive({2, 1});
  EXPECT_EQ(root.counter(), 0u);
  EXPECT_EQ(x.key(), y.key());
  EXPECT_NE(x.key(), z.key());
}

TEST(RandomStreamTest, UniformMomentsAndRange) {
  RandomStream rng(9);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(RandomStreamTest, NormalAndExponentialMoments) {
  RandomStream rng(10);
  const int n = 200000;
  double ns = 0, nsq = 0, es = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    ns += z;
    nsq += z * z;
    const double e = rng.exponential();
    ASSERT_GE(e, 0.0);
    es += e;
  }
  EXPECT_NEAR(ns / n, 0.0, 0.01);
  EXPECT_NEAR(nsq / n, 1.0, 0.01);
  EXPECT_NEAR(es / n, 1.0, 0.01);
}

TEST(RandomStreamTest, UniformIndexCoversRange) {
  RandomStream rng(4);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.uniform_index(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_THROW(rng.uniform_index(0), std::invalid_argument);
}

}  // namespace
}  // namespace lsvi
