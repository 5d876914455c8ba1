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

#include "lsvi/oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lsvi/errors.hpp"

namespace lsvi {

namespace {

constexpr double kRenormalizeAbove = 1e-12;
constexpr double kRegretClampBelow = -1e-9;

// Q_h(s, a) = r_h(s, a) + sum_{s'} P_h(s' | s, a) V_{h+1}(s') for all (s, a).
Matrix bellman_backup(const LinearMdp& mdp, int h, const Vector& next_values) {
  const Matrix p = transition_rows(mdp, mdp.features, h);
  const Vector flat = mdp.features * mdp.reward_weights[h] + p * next_values;
  Matrix q(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) q(s, a) = flat[static_cast<Eigen::Index>(s) * mdp.n_actions + a];
  }
  return q;
}

Matrix policy_features(const LinearMdp& mdp, const DeterministicPolicy& pi, int h) {
  Matrix rows(mdp.n_states, mdp.dim);
  for (int s = 0; s < mdp.n_states; ++s) rows.row(s) = mdp.feature(s, pi.action(s, h));
  return rows;
}

}  // namespace

void DeterministicPolicy::check(const LinearMdp& mdp) const {
  if (n_states_ != mdp.n_states || horizon_ != mdp.horizon) {
    throw std::invalid_argument("policy shape does not match the MDP");
  }
  for (int a : actions_) {
    if (a < 0 || a >= mdp.n_actions) throw std::invalid_argument("policy contains an invalid action");
  }
}

Matrix transition_rows(const LinearMdp& mdp, const Matrix& pair_features, int h) {
  Matrix p = pair_features * mdp.measures[h];
  for (Eigen::Index row = 0; row < p.rows(); ++row) {
    const double total = p.row(row).sum();
    const double deviation = std::abs(total - 1.0);
    if (deviation > kTransitionSumTolerance || !std::isfinite(total)) {
      std::ostringstream os;
      os << "transition row at step " << h << " sums to " << total;
      throw ValidationError(os.str());
    }
    if (deviation > kRenormalizeAbove) p.row(row) /= total;
  }
  return p;
}

ValueTables optimal_values(const LinearMdp& mdp) {
  ValueTables vt;
  vt.q_star.resize(mdp.horizon);
  vt.v_star.assign(mdp.horizon + 1, Vector::Zero(mdp.n_states));
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    vt.q_star[h] = bellman_backup(mdp, h, vt.v_star[h + 1]);
    vt.v_star[h] = vt.q_star[h].rowwise().maxCoeff();
  }
  return vt;
}

DeterministicPolicy greedy_policy(const ValueTables& vt) {
  const int horizon = static_cast<int>(vt.q_star.size());
  const int n_states = horizon > 0 ? static_cast<int>(vt.q_star[0].rows()) : 0;
  DeterministicPolicy pi(n_states, horizon);
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < n_states; ++s) {
      int best = 0;
      for (int a = 1; a < vt.q_star[h].cols(); ++a) {
        if (vt.q_star[h](s, a) > vt.q_star[h](s, best)) best = a;
      }
      pi.set(s, h, best);
    }
  }
  return pi;
}

std::vector<Vector> policy_value(const LinearMdp& mdp, const DeterministicPolicy& pi) {
  pi.check(mdp);
  std::vector<Vector> v(mdp.horizon + 1, Vector::Zero(mdp.n_states));
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    const Matrix rows = policy_features(mdp, pi, h);
    v[h] = rows * mdp.reward_weights[h] + transition_rows(mdp, rows, h) * v[h + 1];
  }
  return v;
}

std::vector<Matrix> policy_action_values(const LinearMdp& mdp, const DeterministicPolicy& pi) {
  const std::vector<Vector> v = policy_value(mdp, pi);
  std::vector<Matrix> q(mdp.horizon);
  for (int h = 0; h < mdp.horizon; ++h) q[h] = bellman_backup(mdp, h, v[h + 1]);
  return q;
}

std::vector<Vector> uniform_policy_value(const LinearMdp& mdp) {
  std::vector<Vector> v(mdp.horizon + 1, Vector::Zero(mdp.n_states));
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    v[h] = bellman_backup(mdp, h, v[h + 1]).rowwise().mean();
  }
  return v;
}

double episode_regret(const ValueTables& vt, const std::vector<Vector>& policy_values, int s1) {
  if (s1 < 0 || s1 >= vt.v_star[0].size()) throw std::out_of_range("initial state out of range");
  double gap = vt.v_star[0][s1] - policy_values[0][s1];
  if (gap < 0.0 && gap >= kRegretClampBelow) gap = 0.0;
  return gap;
}

double episode_regret(const LinearMdp& mdp, const ValueTables& vt, const DeterministicPolicy& pi, int s1) {
  return episode_regret(vt, policy_value(mdp, pi), s1);
}

}  // namespace lsvi
