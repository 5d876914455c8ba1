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

#include "lsvi/agents.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lsvi/errors.hpp"

namespace lsvi {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kBaseline: return "baseline";
    case Variant::kFixed: return "fixed";
    case Variant::kAdaptive: return "adaptive";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "baseline") return Variant::kBaseline;
  if (name == "fixed") return Variant::kFixed;
  if (name == "adaptive") return Variant::kAdaptive;
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected baseline|fixed|adaptive)");
}

void Hyperparameters::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("hyperparameters: " + msg); };
  if (episodes < 1) fail("K must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail("lambda must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta must be non-negative");
  if (!(rho > 0.0 && rho <= 1.0)) fail("rho must lie in (0, 1]");
  if (lookback < 0) fail("m must be non-negative");
  if (!(tau >= 0.0) || !std::isfinite(tau)) fail("tau must be non-negative");
  if (budget < 0) fail("Budget must be non-negative");
}

double default_beta(int dim, int horizon, int episodes, double c, double p) {
  const double total_steps = static_cast<double>(horizon) * episodes;
  return c * dim * horizon * std::sqrt(std::log(2.0 * dim * total_steps / p));
}

int phase_length(int episodes, double rho) {
  // The epsilon keeps exact powers such as 10000^0.5 from flooring to 99.
  const double raw = std::floor(std::pow(static_cast<double>(episodes), rho) + 1e-9);
  return std::max(1, static_cast<int>(raw));
}

PolicySnapshot fresh_snapshot(int dim, int horizon, double lambda, double beta, std::uint64_t refresh) {
  PolicySnapshot snap;
  snap.weights.assign(horizon, Vector::Zero(dim));
  snap.grams.assign(horizon, GramInverse(dim, lambda, refresh));
  snap.beta = beta;
  snap.cap = horizon;
  return snap;
}

double q_value(const PolicySnapshot& snap, int h, const Vector& phi) {
  const double m = snap.weights[h].dot(phi) + snap.beta * ellipsoid_bonus(phi, snap.grams[h]);
  return std::min(m, snap.cap);
}

double q_value(const PolicySnapshot& snap, int h, int s, int a, const LinearMdp& mdp) {
  mdp.check_indices(s, a, h);
  return q_value(snap, h, Vector(mdp.feature(s, a).transpose()));
}

void q_values(const PolicySnapshot& snap, int h, const Eigen::Ref<const Matrix>& features, Vector& out,
              Matrix& scratch) {
  const Matrix& inv = snap.grams[h].inverse();
  scratch.noalias() = features * inv;
  out.resize(features.rows());
  for (Eigen::Index a = 0; a < features.rows(); ++a) {
    const double quad = features.row(a).dot(scratch.row(a));
    if (quad < 0.0 || !std::isfinite(quad)) {
      throw NumericalFailure("negative quadratic form in UCB bonus; Gram inverse is corrupted");
    }
    const double m = features.row(a).dot(snap.weights[h]) + snap.beta * std::sqrt(quad);
    out[a] = std::min(m, snap.cap);
  }
}

namespace {

int argmax_lowest(const Vector& q) {
  int best = 0;
  for (int a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = a;
  }
  return best;
}

}  // namespace

int greedy_action(const PolicySnapshot& snap, int h, int s, const LinearMdp& mdp) {
  mdp.check_indices(s, 0, h);
  Vector q;
  Matrix scratch;
  q_values(snap, h, mdp.state_features(s), q, scratch);
  return argmax_lowest(q);
}

DeterministicPolicy greedy_policy(const PolicySnapshot& snap, const LinearMdp& mdp) {
  DeterministicPolicy pi(mdp.n_states, mdp.horizon);
  Vector q;
  Matrix scratch;
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.n_states; ++s) {
      q_values(snap, h, mdp.state_features(s), q, scratch);
      pi.set(s, h, argmax_lowest(q));
    }
  }
  return pi;
}

Vector regression_update(const StepLearnerState& state, const GramInverse& gram, std::span<const double> next_q_max) {
  if (next_q_max.size() != state.retained.size()) {
    throw std::invalid_argument("regression_update: one next-step value per retained episode is required");
  }
  Vector target = Vector::Zero(gram.dim());
  for (std::size_t i = 0; i < state.retained.size(); ++i) {
    const RetainedTransition& t = state.retained[i];
    target += t.feature * (t.reward + next_q_max[i]);
  }
  return gram.inverse() * target;
}

bool learn_condition(std::span<const Matrix> window, double tau) {
  if (window.size() < 2) return true;
  const auto rows = window.front().rows();
  const auto cols = window.front().cols();
  for (const Matrix& w : window) {
    if (w.rows() != rows || w.cols() != cols) throw std::invalid_argument("learn_condition: dimension mismatch");
  }
  for (std::size_t i = 0; i < window.size(); ++i) {
    for (std::size_t j = i + 1; j < window.size(); ++j) {
      if (frobenius_distance(window[i], window[j]) >= tau) return true;
    }
  }
  return false;
}

Agent::Agent(const LinearMdp& mdp, Hyperparameters hp)
    : hp_(hp),
      n_states_(mdp.n_states),
      n_actions_(mdp.n_actions),
      dim_(mdp.dim),
      horizon_(mdp.horizon),
      phase_(phase_length(hp.episodes, hp.rho)) {
  hp_.validate();
  snapshot_ = fresh_snapshot(dim_, horizon_, hp_.lambda, hp_.beta, hp_.gram_refresh_interval);
  steps_.resize(horizon_);
  if (hp_.variant == Variant::kAdaptive) {
    for (auto& st : steps_) st.full_gram = GramInverse(dim_, hp_.lambda, hp_.gram_refresh_interval);
  }
  staged_.resize(horizon_);
  staged_keep_.assign(horizon_, false);
  policy_ = DeterministicPolicy(n_states_, horizon_);

  const std::uint64_t d = dim_;
  const std::uint64_t H = horizon_;
  meter_.gram_inverses = H * d * d * (hp_.variant == Variant::kAdaptive ? 2 : 1);
  meter_.weights = H * d;
}

void Agent::commit_staged() {
  const std::uint64_t per_feature = static_cast<std::uint64_t>(dim_) * (1 + n_actions_);
  for (int h = 0; h < horizon_; ++h) {
    StepLearnerState& st = steps_[h];
    if (hp_.variant == Variant::kAdaptive) {
      if (episode_ > 0) st.full_gram.update(staged_[h].feature);
      st.window.push_back(st.full_gram.inverse());
      meter_.window_matrices += static_cast<std::uint64_t>(dim_) * dim_;
      while (st.window.size() > static_cast<std::size_t>(hp_.lookback) + 1) {
        st.window.erase(st.window.begin());
        meter_.window_matrices -= static_cast<std::uint64_t>(dim_) * dim_;
      }
    }
    if (staged_keep_[h]) {
      st.retained.push_back(std::move(staged_[h]));
      meter_.stored_features += per_feature;
      meter_.stored_rewards += 1;
      staged_keep_[h] = false;
    }
    staged_[h] = RetainedTransition{};
  }
}

void Agent::reset_step(int h) {
  StepLearnerState& st = steps_[h];
  const std::uint64_t n = st.retained.size();
  meter_.stored_features -= n * static_cast<std::uint64_t>(dim_) * (1 + n_actions_);
  meter_.stored_rewards -= n;
  st.retained.clear();
  st.retained.shrink_to_fit();
  st.gram_synced = 0;
  st.gram_stale = true;
  st.learn_its = 0;
  st.tot_its = 0;
}

std::vector<bool> Agent::decide(int k, int& resets) {
  std::vector<bool> learn(horizon_, false);
  resets = 0;
  switch (hp_.variant) {
    case Variant::kBaseline:
      std::fill(learn.begin(), learn.end(), true);
      break;
    case Variant::kFixed:
      // A phase at least as long as the run never resets.
      if (phase_ >= hp_.episodes || k < phase_start_ + phase_) {
        std::fill(learn.begin(), learn.end(), true);
      } else if (k == phase_start_ + phase_) {
        phase_start_ += phase_;
        for (int h = 0; h < horizon_; ++h) reset_step(h);
        resets = horizon_;
      }
      break;
    case Variant::kAdaptive:
      for (int h = horizon_ - 1; h >= 0; --h) {
        StepLearnerState& st = steps_[h];
        if (st.learn_its < hp_.budget && st.tot_its < phase_) {
          ++st.tot_its;
          if (learn_condition(st.window, hp_.tau)) {
            ++st.learn_its;
            learn[h] = true;
          }
        } else {
          reset_step(h);
          ++resets;
        }
      }
      break;
  }
  return learn;
}

void Agent::sync_gram(int h) {
  StepLearnerState& st = steps_[h];
  GramInverse& gram = snapshot_.grams[h];
  if (st.gram_stale) {
    gram.reset();
    st.gram_synced = 0;
    st.gram_stale = false;
  }
  for (; st.gram_synced < st.retained.size(); ++st.gram_synced) gram.update(st.retained[st.gram_synced].feature);
}

void Agent::backward_pass(const std::vector<bool>& learn) {
  std::vector<double> next_q;
  Vector q;
  Matrix scratch;
  for (int h = horizon_ - 1; h >= 0; --h) {
    if (!learn[h]) continue;
    sync_gram(h);
    const StepLearnerState& st = steps_[h];
    next_q.assign(st.retained.size(), 0.0);
    if (h + 1 < horizon_) {
      for (std::size_t i = 0; i < st.retained.size(); ++i) {
        q_values(snapshot_, h + 1, st.retained[i].next_features, q, scratch);
        next_q[i] = q.maxCoeff();
      }
    }
    snapshot_.weights[h] = regression_update(st, snapshot_.grams[h], next_q);
  }
}

EpisodeOutcome Agent::step_episode(const LinearMdp& mdp, const ValueTables& vt, int initial_state,
                                   const RandomStream& run_stream) {
  if (mdp.n_states != n_states_ || mdp.n_actions != n_actions_ || mdp.dim != dim_ || mdp.horizon != horizon_) {
    throw std::invalid_argument("step_episode: MDP shape differs from the one the agent was built for");
  }
  if (episode_ >= hp_.episodes) throw std::logic_error("step_episode: all K episodes already played");
  if (initial_state < 0 || initial_state >= n_states_) throw std::out_of_range("initial state out of range");

  commit_staged();
  const int k = ++episode_;

  EpisodeOutcome out;
  out.episode = k;
  const std::vector<bool> learn = decide(k, out.resets);
  backward_pass(learn);
  out.learn_events = static_cast<int>(std::count(learn.begin(), learn.end(), true));
  out.logical_space = meter_.total();

  policy_ = greedy_policy(snapshot_, mdp);

  out.initial_state = initial_state;
  out.states.reserve(horizon_ + 1);
  out.actions.reserve(horizon_);
  int s = initial_state;
  out.states.push_back(s);
  for (int h = 0; h < horizon_; ++h) {
    const int a = policy_.action(s, h);
    RandomStream step_rng = run_stream.derive({stream_tag::kRollout, static_cast<std::uint64_t>(k),
                                               static_cast<std::uint64_t>(h)});
    const int next = transition_sample(mdp, s, a, h, step_rng);

    RetainedTransition& t = staged_[h];
    t.episode = k;
    t.feature = mdp.feature(s, a).transpose();
    t.reward = reward(mdp, s, a, h);
    t.next_features = mdp.state_features(next);
    staged_keep_[h] = learn[h];

    out.actions.push_back(a);
    out.states.push_back(next);
    s = next;
  }

  out.regret = episode_regret(vt, policy_value(mdp, policy_), initial_state);
  return out;
}

SpaceMeter Agent::recount_space() const {
  SpaceMeter m;
  for (int h = 0; h < horizon_; ++h) {
    m.gram_inverses += static_cast<std::uint64_t>(snapshot_.grams[h].inverse().size());
    m.weights += static_cast<std::uint64_t>(snapshot_.weights[h].size());
    const StepLearnerState& st = steps_[h];
    if (hp_.variant == Variant::kAdaptive) m.gram_inverses += static_cast<std::uint64_t>(st.full_gram.inverse().size());
    for (const RetainedTransition& t : st.retained) {
      m.stored_features += static_cast<std::uint64_t>(t.feature.size() + t.next_features.size());
      m.stored_rewards += 1;
    }
    for (const Matrix& w : st.window) m.window_matrices += static_cast<std::uint64_t>(w.size());
  }
  return m;
}

}  // namespace lsvi
