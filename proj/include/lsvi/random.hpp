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
#include <initializer_list>

namespace lsvi {

// Counter-based 64-bit random stream. The i-th output is a pure function of
// (key, i): the SplitMix64 finalizer applied to key + i * golden gamma.
// Independent consumers get independent keys through derive().
class RandomStream {
 public:
  RandomStream() = default;
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  // A child stream keyed by this stream's key and the given tags. Does not
  // advance this stream.
  RandomStream derive(std::initializer_list<std::uint64_t> tags) const;

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  // Unit-rate exponential.
  double exponential();

  // Standard normal (Box-Muller; one value per call, two uniforms consumed).
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

// Stream tags used across the library.
namespace stream_tag {
inline constexpr std::uint64_t kFeatures = 0x7068690000000001ULL;
inline constexpr std::uint64_t kRewardWeights = 0x7468650000000002ULL;
inline constexpr std::uint64_t kMeasures = 0x6d75000000000003ULL;
inline constexpr std::uint64_t kRollout = 0x726f6c6c00000004ULL;
inline constexpr std::uint64_t kInitialState = 0x696e697400000005ULL;
inline constexpr std::uint64_t kDiagnostics = 0x6469616700000006ULL;
}  // namespace stream_tag

}  // namespace lsvi
