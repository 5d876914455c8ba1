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

#include <vector>

#include "lsvi/linear_mdp.hpp"

namespace lsvi {

// Q*_h(s, a) and V*_h(s) for h = 0..H-1, plus the terminal V*_H = 0.
struct ValueTables {
  std::vector<Matrix> q_star;  // H tables, n_states x n_actions
  std::vector<Vector> v_star;  // H + 1 vectors, v_star[H] == 0
};

// A deterministic, time-dependent policy pi(s, h).
class DeterministicPolicy {
 public:
  DeterministicPolicy() = default;
  DeterministicPolicy(int n_states, int horizon, int fill_action = 0)
      : n_states_(n_states), horizon_(horizon),
        actions_(static_cast<std::size_t>(n_states) * horizon, fill_action) {}

  int action(int s, int h) const { return actions_[index(s, h)]; }
  void set(int s, int h, int a) { actions_[index(s, h)] = a; }

  int n_states() const { return n_states_; }
  int horizon() const { return horizon_; }
  const std::vector<int>& table() const { return actions_; }

  // Throws std::invalid_argument if the shape or any action is invalid for mdp.
  void check(const LinearMdp& mdp) const;

  friend bool operator==(const DeterministicPolicy&, const DeterministicPolicy&) = default;

 private:
  std::size_t index(int s, int h) const { return static_cast<std::size_t>(h) * n_states_ + s; }

  int n_states_ = 0;
  int horizon_ = 0;
  std::vector<int> actions_;
};

// Explicit transition rows phi(s, a)^T mu_h for the given (s, a) pairs, one
// row per pair. Rows whose sum deviates from 1 by more than 1e-12 are
// renormalized; deviations above 1e-9 throw ValidationError.
Matrix transition_rows(const LinearMdp& mdp, const Matrix& pair_features, int h);

// Backward induction on the Bellman optimality equations. Ties in the max
// are irrelevant for values; greedy_policy breaks them by lowest action index.
ValueTables optimal_values(const LinearMdp& mdp);

DeterministicPolicy greedy_policy(const ValueTables& vt);

// V^pi_h(s) for h = 0..H (the last entry is the zero terminal vector).
std::vector<Vector> policy_value(const LinearMdp& mdp, const DeterministicPolicy& pi);

// Q^pi_h(s, a) = r_h(s, a) + E[V^pi_{h+1}(s')], H tables of n_states x n_actions.
std::vector<Matrix> policy_action_values(const LinearMdp& mdp, const DeterministicPolicy& pi);

// Values of the stochastic policy that picks an action uniformly at random.
std::vector<Vector> uniform_policy_value(const LinearMdp& mdp);

// V*_0(s1) - V^pi_0(s1); values in [-1e-9, 0) are clamped to 0.
double episode_regret(const LinearMdp& mdp, const ValueTables& vt, const DeterministicPolicy& pi, int s1);

// Same, from a precomputed V^pi table.
double episode_regret(const ValueTables& vt, const std::vector<Vector>& policy_values, int s1);

}  // namespace lsvi
