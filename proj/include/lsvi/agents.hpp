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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsvi/linalg.hpp"
#include "lsvi/linear_mdp.hpp"
#include "lsvi/oracle.hpp"
#include "lsvi/random.hpp"

namespace lsvi {

enum class Variant { kBaseline, kFixed, kAdaptive };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);  // throws ConfigError

struct Hyperparameters {
  Variant variant = Variant::kBaseline;
  int episodes = 1000;  // K
  double lambda = 1.0;
  double beta = 1.0;
  double rho = 0.75;   // phase exponent, fixed and adaptive
  int lookback = 10;   // m, adaptive
  double tau = 0.0;    // absolute Frobenius threshold, adaptive
  int budget = 31;     // learning episodes per phase per step, adaptive
  std::uint64_t gram_refresh_interval = 0;  // 0: pure Sherman-Morrison

  // Throws ConfigError on violated ranges.
  void validate() const;
};

// beta = c * d * H * sqrt(log(2 d T / p)) with T = H K.
double default_beta(int dim, int horizon, int episodes, double c = 1.0, double p = 0.01);

// max(1, floor(K^rho)).
int phase_length(int episodes, double rho);

// Per-step weights and Gram inverses defining
//   Q_h(s, a) = min(w_h^T phi(s, a) + beta * ||phi(s, a)||_{Lambda_h^{-1}}, H).
struct PolicySnapshot {
  std::vector<Vector> weights;
  std::vector<GramInverse> grams;
  double beta = 0.0;
  double cap = 0.0;  // H
};

PolicySnapshot fresh_snapshot(int dim, int horizon, double lambda, double beta, std::uint64_t refresh = 0);

double q_value(const PolicySnapshot& snap, int h, const Vector& phi);
double q_value(const PolicySnapshot& snap, int h, int s, int a, const LinearMdp& mdp);

// Q_h(s, a) for every row of `features` (one row per action).
void q_values(const PolicySnapshot& snap, int h, const Eigen::Ref<const Matrix>& features, Vector& out,
              Matrix& scratch);

// argmax_a Q_h(s, a), lowest index on ties.
int greedy_action(const PolicySnapshot& snap, int h, int s, const LinearMdp& mdp);

DeterministicPolicy greedy_policy(const PolicySnapshot& snap, const LinearMdp& mdp);

// One observed transition kept for regression at a given step.
struct RetainedTransition {
  int episode = 0;
  Vector feature;        // phi(s_h, a_h)
  double reward = 0.0;   // r_h(s_h, a_h)
  Matrix next_features;  // phi(s_{h+1}, a) for every a, n_actions x dim
};

struct StepLearnerState {
  std::vector<RetainedTransition> retained;  // I_h, in episode order
  std::size_t gram_synced = 0;   // retained entries already folded into the snapshot Gram inverse
  bool gram_stale = false;       // set on reset: the Gram inverse must be rebuilt from lambda*I
  int learn_its = 0;
  int tot_its = 0;
  // Adaptive only: full-history L_h^{-1} and the last m+1 of its values.
  GramInverse full_gram;
  std::vector<Matrix> window;
};

// w = Lambda^{-1} sum_i phi_i (r_i + q_i) over the retained set.
Vector regression_update(const StepLearnerState& state, const GramInverse& gram, std::span<const double> next_q_max);

// max_{i,j} ||W_i - W_j||_F >= tau; true for windows with fewer than two entries.
bool learn_condition(std::span<const Matrix> window, double tau);

// Retained 64-bit scalars, split by structure.
struct SpaceMeter {
  std::uint64_t gram_inverses = 0;
  std::uint64_t weights = 0;
  std::uint64_t stored_features = 0;
  std::uint64_t stored_rewards = 0;
  std::uint64_t window_matrices = 0;

  std::uint64_t total() const {
    return gram_inverses + weights + stored_features + stored_rewards + window_matrices;
  }
  // Per-episode data plus window matrices; the part bounded by K^rho / Budget.
  std::uint64_t retained() const { return stored_features + stored_rewards + window_matrices; }

  friend bool operator==(const SpaceMeter&, const SpaceMeter&) = default;
};

struct EpisodeOutcome {
  int episode = 0;
  double regret = 0.0;
  std::uint64_t logical_space = 0;
  int learn_events = 0;
  int resets = 0;
  int initial_state = 0;
  std::vector<int> states;   // s_0 .. s_H
  std::vector<int> actions;  // a_0 .. a_{H-1}
};

// LSVI-UCB and its fixed-interval and adaptive-interval reset variants.
class Agent {
 public:
  Agent(const LinearMdp& mdp, Hyperparameters hp);

  // Runs episode k = episodes_done() + 1: learning pass, greedy rollout on the
  // per-(episode, step) streams derived from `run_stream`, exact regret.
  EpisodeOutcome step_episode(const LinearMdp& mdp, const ValueTables& vt, int initial_state,
                              const RandomStream& run_stream);

  const PolicySnapshot& snapshot() const { return snapshot_; }
  const StepLearnerState& step_state(int h) const { return steps_[h]; }
  const Hyperparameters& hyperparameters() const { return hp_; }
  int episodes_done() const { return episode_; }

  // Incrementally maintained meter and an independent recount of the live structures.
  const SpaceMeter& space() const { return meter_; }
  SpaceMeter recount_space() const;

  // Policy the agent acted with in the most recent episode.
  const DeterministicPolicy& policy() const { return policy_; }

 private:
  void commit_staged();
  std::vector<bool> decide(int k, int& resets);
  void reset_step(int h);
  void backward_pass(const std::vector<bool>& learn);
  void sync_gram(int h);

  Hyperparameters hp_;
  int n_states_;
  int n_actions_;
  int dim_;
  int horizon_;
  int phase_;
  int phase_start_ = 0;  // K0, fixed variant
  int episode_ = 0;

  PolicySnapshot snapshot_;
  std::vector<StepLearnerState> steps_;
  DeterministicPolicy policy_;
  SpaceMeter meter_;

  // Transitions observed in the last episode, committed at the start of the next.
  std::vector<RetainedTransition> staged_;
  std::vector<bool> staged_keep_;
};

}  // namespace lsvi
