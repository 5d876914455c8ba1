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
#include <filesystem>
#include <string>
#include <vector>

#include "lsvi/linalg.hpp"
#include "lsvi/random.hpp"

namespace lsvi {

// Sizes and seed of a synthetic linear MDP: every feature vector, reward
// weight vector and transition measure is drawn uniformly from its simplex.
struct SyntheticSpec {
  std::uint64_t n_states = 1;
  std::uint64_t n_actions = 1;
  std::uint64_t dim = 1;
  std::uint64_t horizon = 1;
  std::uint64_t seed = 0;
};

// A finite linear MDP. Steps are zero-based here (h in [0, H)).
//
//   P_h(s' | s, a) = <phi(s, a), mu_h(s')>,   r_h(s, a) = <phi(s, a), theta_h>.
struct LinearMdp {
  int n_states = 0;
  int n_actions = 0;
  int dim = 0;
  int horizon = 0;
  std::uint64_t seed = 0;

  Matrix features;                    // (n_states * n_actions) x dim, row s * n_actions + a
  std::vector<Matrix> measures;       // per h: dim x n_states, row j is mu_{h,j}
  std::vector<Vector> reward_weights; // per h: dim

  auto feature(int s, int a) const { return features.row(static_cast<Eigen::Index>(s) * n_actions + a); }

  // Rows phi(s, a) for every a, as an n_actions x dim block.
  auto state_features(int s) const {
    return features.middleRows(static_cast<Eigen::Index>(s) * n_actions, n_actions);
  }

  void check_indices(int s, int a, int h) const;
};

// Exact (bit-level) equality of shapes, seed and every table entry.
bool identical(const LinearMdp& a, const LinearMdp& b);

// Uniform sample from the probability simplex in R^n (normalized exponentials).
Vector sample_simplex(int n, RandomStream& rng);

LinearMdp generate_synthetic(const SyntheticSpec& spec);

// The transition row phi(s, a)^T mu_h as a length-|S| vector.
Vector transition_probabilities(const LinearMdp& mdp, int s, int a, int h);

// Inverse-CDF draw of s' ~ P_h(. | s, a).
int transition_sample(const LinearMdp& mdp, int s, int a, int h, RandomStream& rng);

double reward(const LinearMdp& mdp, int s, int a, int h);

struct Violation {
  enum class Kind { kNegativeProbability, kTransitionSum, kRewardRange, kNonFinite };
  Kind kind;
  int state;
  int action;
  int step;
  double value;  // the offending sum, entry or reward
  std::string describe() const;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

inline constexpr double kTransitionSumTolerance = 1e-9;
inline constexpr double kNegativityTolerance = 1e-12;

ValidationReport validate(const LinearMdp& mdp);

// Binary container: "LMDPv001", five little-endian u64 (|S|, |A|, d, H, seed),
// phi (s-major then a), theta (h-major), mu (h-major, row-major within h)
// as little-endian f64, then a little-endian CRC-32 of all preceding bytes.
std::vector<std::uint8_t> serialize(const LinearMdp& mdp);

// Throws ValidationError on bad magic, shape mismatch or checksum failure.
LinearMdp deserialize(const std::vector<std::uint8_t>& bytes);

void save_mdp(const LinearMdp& mdp, const std::filesystem::path& path);
LinearMdp load_mdp(const std::filesystem::path& path);

}  // namespace lsvi
