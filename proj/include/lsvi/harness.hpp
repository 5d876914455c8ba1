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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsvi/agents.hpp"
#include "lsvi/config.hpp"
#include "lsvi/linear_mdp.hpp"

namespace lsvi {

enum class InitialStateMode { kFixed, kUniform };

// Policy driven through the episode loop instead of a learner.
enum class Replay { kNone, kOptimal, kUniform };

struct ExperimentConfig {
  // Environment: a serialized MDP when env_path is set, otherwise synthetic.
  std::optional<std::filesystem::path> env_path;
  SyntheticSpec synthetic;
  bool synthetic_seed_fixed = false;  // false: the synthetic seed follows the run seed

  Hyperparameters hp;
  std::optional<double> beta;  // unset: default_beta(d, H, K, beta_c, beta_p)
  double beta_c = 1.0;
  double beta_p = 0.01;
  std::optional<double> tau;   // unset: tau_c * d^2
  double tau_c = 0.1;
  std::optional<int> budget;   // unset: floor(K^budget_exponent)
  double budget_exponent = 0.5;

  std::vector<std::uint64_t> seeds{0};
  InitialStateMode initial_state_mode = InitialStateMode::kFixed;
  int initial_state = 0;
  bool record_snapshots = false;
  Replay replay = Replay::kNone;
  int audit_interval = 50;
  int threads = 0;  // 0: hardware concurrency
  std::string run_id;

  std::filesystem::path out_dir = ".";
  std::string csv_name = "records.csv";
  std::string json_name = "records.json";

  // The key-value document this config was built from (file + overrides).
  KeyValueConfig source;
};

// Every key the harness understands.
const std::vector<std::string>& known_config_keys();

// Builds and validates; throws ConfigError.
ExperimentConfig make_experiment_config(const KeyValueConfig& kv);

// Hyperparameters with beta, tau and Budget resolved against the MDP's sizes.
Hyperparameters resolve_hyperparameters(const ExperimentConfig& cfg, const LinearMdp& mdp);

// Loads or generates the MDP for one seed and validates it (ValidationError).
LinearMdp build_environment(const ExperimentConfig& cfg, std::uint64_t seed);

struct EpisodeRecord {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string variant;
  int episode = 0;
  double regret = 0.0;
  double cum_regret = 0.0;
  std::uint64_t logical_space = 0;
  double process_time_s = 0.0;
  int learn_events = 0;
  int resets = 0;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> records;
  std::vector<std::vector<int>> actions;              // per episode, a_0 .. a_{H-1}
  std::vector<std::vector<Vector>> weights;           // per episode, per step (record_snapshots only)
  std::vector<SpaceMeter> meters;                     // per episode (agent runs only)
};

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed);

// One RunResult per seed, in seed order; seeds run concurrently.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg);

// A grid point of `sweep`: overrides applied on top of the base config.
struct SweepPoint {
  std::string run_id;
  ExperimentConfig config;
};

// Cartesian product of sweep.rho, sweep.m, sweep.tau_c, sweep.budget_exponent.
std::vector<SweepPoint> expand_sweep(const KeyValueConfig& kv);

std::vector<EpisodeRecord> run_sweep(const std::vector<SweepPoint>& points, int threads);

inline constexpr const char* kCsvHeader =
    "run_id,seed,variant,episode,regret,cum_regret,logical_space,process_time_s,learn_events,resets";

std::string to_csv(std::span<const EpisodeRecord> records);
std::vector<EpisodeRecord> parse_csv(std::string_view text);
void emit_csv(std::span<const EpisodeRecord> records, const std::filesystem::path& path);

std::string to_json(std::span<const EpisodeRecord> records, const KeyValueConfig& config);
void emit_json(std::span<const EpisodeRecord> records, const KeyValueConfig& config, const std::filesystem::path& path);

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

struct SublinearityReport {
  int episodes = 0;
  double avg_quarter = 0.0;  // R(K/4) / (K/4)
  double avg_half = 0.0;
  double avg_full = 0.0;
  double decay_ratio = 0.0;  // avg_full / avg_quarter, 0 when both vanish
  double fit_a = 0.0;        // cum_regret ~ a sqrt(k) + b on k in [K/2, K]
  double fit_b = 0.0;
  double fit_relative_residual = 0.0;  // ||y - fit||_2 / ||y||_2
  bool zero_regret = false;
  bool sublinear = false;
};

inline constexpr double kSublinearDecayThreshold = 0.8;

// From a cumulative-regret curve indexed by k = 1..K. Throws std::invalid_argument when K < 100.
SublinearityReport sublinearity_report(std::span<const double> cum_regret);
SublinearityReport sublinearity_report(std::span<const EpisodeRecord> records);

// Pointwise mean of cum_regret over runs of equal length.
std::vector<double> mean_cumulative_regret(std::span<const RunResult> runs);

}  // namespace lsvi
