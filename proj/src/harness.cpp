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

#include "lsvi/harness.hpp"

#include <time.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "lsvi/errors.hpp"
#include "lsvi/oracle.hpp"

namespace lsvi {

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "env.path", "env.n_states", "env.n_actions", "env.dim", "env.horizon", "env.seed",
      "hp.variant", "hp.K", "hp.lambda", "hp.beta", "hp.beta_c", "hp.beta_p", "hp.rho", "hp.m",
      "hp.tau", "hp.tau_c", "hp.budget", "hp.budget_exponent", "hp.gram_refresh",
      "run.id", "run.seeds", "run.initial_state", "run.initial_state_index", "run.record_snapshots",
      "run.replay", "run.audit_interval", "run.threads",
      "out.dir", "out.csv", "out.json", "out.mdp",
      "sweep.rho", "sweep.m", "sweep.tau_c", "sweep.budget_exponent",
      "diag.d", "diag.n", "diag.trials", "diag.min_eig_k", "diag.ellipsoid_trials", "diag.ellipsoid_d",
      "diag.seed", "diag.step",
  };
  return keys;
}

namespace {

int positive_int(const KeyValueConfig& kv, const std::string& key, long long fallback, long long min_value = 1) {
  const long long v = kv.get_int(key, fallback);
  if (v < min_value || v > std::numeric_limits<int>::max()) {
    throw ConfigError("config key '" + key + "' must be an integer >= " + std::to_string(min_value));
  }
  return static_cast<int>(v);
}

bool csv_safe(const std::string& s) {
  return s.find_first_of(",\"\r\n") == std::string::npos;
}

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

ExperimentConfig make_experiment_config(const KeyValueConfig& kv) {
  kv.require_known(known_config_keys());
  ExperimentConfig cfg;
  cfg.source = kv;

  if (const auto path = kv.find("env.path"); path && !path->empty()) cfg.env_path = *path;
  cfg.synthetic.n_states = static_cast<std::uint64_t>(positive_int(kv, "env.n_states", 50));
  cfg.synthetic.n_actions = static_cast<std::uint64_t>(positive_int(kv, "env.n_actions", 5));
  cfg.synthetic.dim = static_cast<std::uint64_t>(positive_int(kv, "env.dim", 8));
  cfg.synthetic.horizon = static_cast<std::uint64_t>(positive_int(kv, "env.horizon", 10));
  cfg.synthetic_seed_fixed = kv.has("env.seed");
  cfg.synthetic.seed = kv.get_u64("env.seed", 0);

  cfg.hp.variant = parse_variant(kv.get_string("hp.variant", "baseline"));
  cfg.hp.episodes = positive_int(kv, "hp.K", 1000);
  cfg.hp.lambda = kv.get_double("hp.lambda", 1.0);
  cfg.beta = kv.get_optional_double("hp.beta");
  cfg.beta_c = kv.get_double("hp.beta_c", 1.0);
  cfg.beta_p = kv.get_double("hp.beta_p", 0.01);
  cfg.hp.rho = kv.get_double("hp.rho", 0.75);
  cfg.hp.lookback = positive_int(kv, "hp.m", 10, 0);
  cfg.tau = kv.get_optional_double("hp.tau");
  cfg.tau_c = kv.get_double("hp.tau_c", 0.1);
  if (kv.has("hp.budget")) cfg.budget = positive_int(kv, "hp.budget", 0, 0);
  cfg.budget_exponent = kv.get_double("hp.budget_exponent", 0.5);
  cfg.hp.gram_refresh_interval = kv.get_u64("hp.gram_refresh", 0);
  if (!(cfg.beta_c > 0.0) || !(cfg.beta_p > 0.0 && cfg.beta_p < 1.0)) {
    throw ConfigError("hp.beta_c must be positive and hp.beta_p in (0, 1)");
  }
  if (!(cfg.tau_c >= 0.0)) throw ConfigError("hp.tau_c must be non-negative");
  if (!(cfg.budget_exponent > 0.0 && cfg.budget_exponent <= 1.0)) {
    throw ConfigError("hp.budget_exponent must lie in (0, 1]");
  }

  cfg.seeds = kv.get_u64_list("run.seeds");
  if (!kv.has("run.seeds")) cfg.seeds = {0};
  if (cfg.seeds.empty()) throw ConfigError("run.seeds must list at least one seed");

  const std::string mode = kv.get_string("run.initial_state", "fixed");
  if (mode == "fixed") {
    cfg.initial_state_mode = InitialStateMode::kFixed;
  } else if (mode == "uniform") {
    cfg.initial_state_mode = InitialStateMode::kUniform;
  } else {
    throw ConfigError("run.initial_state must be fixed or uniform");
  }
  cfg.initial_state = positive_int(kv, "run.initial_state_index", 0, 0);
  cfg.record_snapshots = kv.get_bool("run.record_snapshots", false);
  const std::string replay = kv.get_string("run.replay", "none");
  if (replay == "none") {
    cfg.replay = Replay::kNone;
  } else if (replay == "optimal") {
    cfg.replay = Replay::kOptimal;
  } else if (replay == "uniform") {
    cfg.replay = Replay::kUniform;
  } else {
    throw ConfigError("run.replay must be none, optimal or uniform");
  }
  cfg.audit_interval = positive_int(kv, "run.audit_interval", 50, 0);
  cfg.threads = positive_int(kv, "run.threads", 0, 0);

  const std::string label = cfg.replay == Replay::kNone ? std::string(to_string(cfg.hp.variant)) : replay;
  cfg.run_id = kv.get_string("run.id", label);
  if (!csv_safe(cfg.run_id)) throw ConfigError("run.id must not contain commas, quotes or newlines");

  cfg.out_dir = kv.get_string("out.dir", ".");
  cfg.csv_name = kv.get_string("out.csv", "records.csv");
  cfg.json_name = kv.get_string("out.json", "records.json");

  // Size-dependent values are resolved per MDP; check the rest now.
  Hyperparameters probe = cfg.hp;
  probe.beta = cfg.beta.value_or(1.0);
  probe.tau = cfg.tau.value_or(0.0);
  probe.budget = cfg.budget.value_or(0);
  probe.validate();
  if (!cfg.env_path && cfg.initial_state >= static_cast<int>(cfg.synthetic.n_states)) {
    throw ConfigError("run.initial_state_index out of range");
  }
  return cfg;
}

Hyperparameters resolve_hyperparameters(const ExperimentConfig& cfg, const LinearMdp& mdp) {
  Hyperparameters hp = cfg.hp;
  hp.beta = cfg.beta.value_or(default_beta(mdp.dim, mdp.horizon, hp.episodes, cfg.beta_c, cfg.beta_p));
  hp.tau = cfg.tau.value_or(cfg.tau_c * mdp.dim * mdp.dim);
  hp.budget = cfg.budget.value_or(phase_length(hp.episodes, cfg.budget_exponent));
  hp.validate();
  return hp;
}

LinearMdp build_environment(const ExperimentConfig& cfg, std::uint64_t seed) {
  LinearMdp mdp;
  if (cfg.env_path) {
    mdp = load_mdp(*cfg.env_path);
  } else {
    SyntheticSpec spec = cfg.synthetic;
    if (!cfg.synthetic_seed_fixed) spec.seed = seed;
    mdp = generate_synthetic(spec);
  }
  const ValidationReport report = validate(mdp);
  if (!report.ok()) {
    throw ValidationError("environment failed validation (" + std::to_string(report.violations.size()) +
                          " violations), first: " + report.violations.front().describe());
  }
  if (cfg.initial_state >= mdp.n_states) throw ConfigError("run.initial_state_index out of range for the MDP");
  return mdp;
}

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
  const LinearMdp mdp = build_environment(cfg, seed);
  const ValueTables vt = optimal_values(mdp);
  const Hyperparameters hp = resolve_hyperparameters(cfg, mdp);
  const RandomStream run_stream(seed);

  RunResult result;
  result.seed = seed;
  result.records.reserve(hp.episodes);

  auto initial_state = [&](int k) {
    if (cfg.initial_state_mode == InitialStateMode::kFixed) return cfg.initial_state;
    RandomStream rng = run_stream.derive({stream_tag::kInitialState, static_cast<std::uint64_t>(k)});
    return static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(mdp.n_states)));
  };

  const double start = thread_cpu_seconds();
  double cumulative = 0.0;
  auto push = [&](int k, double regret, std::uint64_t space, int learn_events, int resets) {
    cumulative += regret;
    EpisodeRecord r;
    r.run_id = cfg.run_id;
    r.seed = seed;
    r.variant = cfg.replay == Replay::kNone ? std::string(to_string(hp.variant))
                                            : (cfg.replay == Replay::kOptimal ? "optimal" : "uniform");
    r.episode = k;
    r.regret = regret;
    r.cum_regret = cumulative;
    r.logical_space = space;
    r.process_time_s = thread_cpu_seconds() - start;
    r.learn_events = learn_events;
    r.resets = resets;
    result.records.push_back(std::move(r));
  };

  if (cfg.replay != Replay::kNone) {
    std::vector<Vector> values;
    std::vector<int> actions;
    if (cfg.replay == Replay::kOptimal) {
      const DeterministicPolicy pi = greedy_policy(vt);
      values = policy_value(mdp, pi);
    } else {
      values = uniform_policy_value(mdp);
    }
    for (int k = 1; k <= hp.episodes; ++k) {
      push(k, episode_regret(vt, values, initial_state(k)), 0, 0, 0);
      result.actions.emplace_back();
    }
    return result;
  }

  Agent agent(mdp, hp);
  for (int k = 1; k <= hp.episodes; ++k) {
    const EpisodeOutcome out = agent.step_episode(mdp, vt, initial_state(k), run_stream);
    if (cfg.audit_interval > 0 && k % cfg.audit_interval == 0 && !(agent.space() == agent.recount_space())) {
      throw std::logic_error("space meter audit failed at episode " + std::to_string(k));
    }
    push(k, out.regret, out.logical_space, out.learn_events, out.resets);
    result.actions.push_back(out.actions);
    result.meters.push_back(agent.space());
    if (cfg.record_snapshots) result.weights.push_back(agent.snapshot().weights);
  }
  return result;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
  std::vector<RunResult> results(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.threads, [&](std::size_t i) { results[i] = run_single(cfg, cfg.seeds[i]); });
  return results;
}

std::vector<SweepPoint> expand_sweep(const KeyValueConfig& kv) {
  auto axis = [&kv](const std::string& key, const std::string& base_key, double fallback) {
    std::vector<double> values = kv.get_double_list(key);
    if (values.empty()) values.push_back(kv.get_double(base_key, fallback));
    return values;
  };
  const auto rhos = axis("sweep.rho", "hp.rho", 0.75);
  const auto ms = axis("sweep.m", "hp.m", 10);
  const auto tau_cs = axis("sweep.tau_c", "hp.tau_c", 0.1);
  const auto budget_exps = axis("sweep.budget_exponent", "hp.budget_exponent", 0.5);

  std::vector<SweepPoint> points;
  for (double rho : rhos) {
    for (double m : ms) {
      for (double tau_c : tau_cs) {
        for (double bexp : budget_exps) {
          if (m < 0 || m != std::floor(m)) throw ConfigError("sweep.m values must be non-negative integers");
          KeyValueConfig point = kv;
          point.set("hp.rho", format_double(rho));
          point.set("hp.m", std::to_string(static_cast<long long>(m)));
          point.set("hp.tau_c", format_double(tau_c));
          point.set("hp.budget_exponent", format_double(bexp));
          const std::string id = "rho" + format_double(rho) + "-m" + std::to_string(static_cast<long long>(m)) +
                                 "-tauc" + format_double(tau_c) + "-bexp" + format_double(bexp);
          point.set("run.id", id);
          points.push_back({id, make_experiment_config(point)});
        }
      }
    }
  }
  return points;
}

std::vector<EpisodeRecord> run_sweep(const std::vector<SweepPoint>& points, int threads) {
  struct Job {
    std::size_t point;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::uint64_t seed : points[p].config.seeds) jobs.push_back({p, seed});
  }
  std::vector<RunResult> results(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    results[i] = run_single(points[jobs[i].point].config, jobs[i].seed);
  });
  std::vector<EpisodeRecord> records;
  for (auto& r : results) records.insert(records.end(), r.records.begin(), r.records.end());
  return records;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::string to_csv(std::span<const EpisodeRecord> records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const EpisodeRecord& r : records) {
    if (!csv_safe(r.run_id) || !csv_safe(r.variant)) throw std::invalid_argument("record label is not CSV-safe");
    out += r.run_id;
    out += ',' + std::to_string(r.seed);
    out += ',' + r.variant;
    out += ',' + std::to_string(r.episode);
    out += ',' + format_double(r.regret);
    out += ',' + format_double(r.cum_regret);
    out += ',' + std::to_string(r.logical_space);
    out += ',' + format_double(r.process_time_s);
    out += ',' + std::to_string(r.learn_events);
    out += ',' + std::to_string(r.resets);
    out += '\n';
  }
  return out;
}

namespace {

template <typename T>
T parse_field(std::string_view field, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw std::invalid_argument("CSV line " + std::to_string(line) + ": bad field '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::vector<EpisodeRecord> parse_csv(std::string_view text) {
  std::vector<EpisodeRecord> records;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != kCsvHeader) throw std::invalid_argument("CSV header does not match the record schema");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (f.size() != 10) throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": expected 10 fields");
    EpisodeRecord r;
    r.run_id = std::string(f[0]);
    r.seed = parse_field<std::uint64_t>(f[1], line_no);
    r.variant = std::string(f[2]);
    r.episode = parse_field<int>(f[3], line_no);
    r.regret = parse_field<double>(f[4], line_no);
    r.cum_regret = parse_field<double>(f[5], line_no);
    r.logical_space = parse_field<std::uint64_t>(f[6], line_no);
    r.process_time_s = parse_field<double>(f[7], line_no);
    r.learn_events = parse_field<int>(f[8], line_no);
    r.resets = parse_field<int>(f[9], line_no);
    records.push_back(std::move(r));
  }
  if (line_no == 0) throw std::invalid_argument("CSV is empty");
  return records;
}

void emit_csv(std::span<const EpisodeRecord> records, const std::filesystem::path& path) {
  if (records.empty()) throw std::invalid_argument("emit_csv: no records");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << to_csv(records);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string to_json(std::span<const EpisodeRecord> records, const KeyValueConfig& config) {
  nlohmann::json doc;
  doc["config"] = nlohmann::json::object();
  for (const auto& [key, value] : config.values()) doc["config"][key] = value;
  doc["records"] = nlohmann::json::array();
  for (const EpisodeRecord& r : records) {
    doc["records"].push_back({{"run_id", r.run_id},
                              {"seed", r.seed},
                              {"variant", r.variant},
                              {"episode", r.episode},
                              {"regret", r.regret},
                              {"cum_regret", r.cum_regret},
                              {"logical_space", r.logical_space},
                              {"process_time_s", r.process_time_s},
                              {"learn_events", r.learn_events},
                              {"resets", r.resets}});
  }
  return doc.dump(1);
}

void emit_json(std::span<const EpisodeRecord> records, const KeyValueConfig& config, const std::filesystem::path& path) {
  if (records.empty()) throw std::invalid_argument("emit_json: no records");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << to_json(records, config) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SublinearityReport sublinearity_report(std::span<const double> cum_regret) {
  const int K = static_cast<int>(cum_regret.size());
  if (K < 100) throw std::invalid_argument("sublinearity_report: at least 100 episodes are required");
  SublinearityReport rep;
  rep.episodes = K;
  const int quarter = K / 4;
  const int half = K / 2;
  auto avg = [&](int k) { return cum_regret[k - 1] / k; };
  rep.avg_quarter = avg(quarter);
  rep.avg_half = avg(half);
  rep.avg_full = avg(K);

  if (rep.avg_quarter == 0.0 && rep.avg_full == 0.0) {
    rep.zero_regret = std::all_of(cum_regret.begin(), cum_regret.end(), [](double v) { return v == 0.0; });
    rep.decay_ratio = 0.0;
  } else if (rep.avg_quarter == 0.0) {
    rep.decay_ratio = std::numeric_limits<double>::infinity();
  } else {
    rep.decay_ratio = rep.avg_full / rep.avg_quarter;
  }

  // Least squares of y = a sqrt(k) + b over the second half.
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int k = half; k <= K; ++k) {
    const double x = std::sqrt(static_cast<double>(k));
    const double y = cum_regret[k - 1];
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double det = n * sxx - sx * sx;
  rep.fit_a = (n * sxy - sx * sy) / det;
  rep.fit_b = (sy - rep.fit_a * sx) / n;
  double rss = 0.0;
  for (int k = half; k <= K; ++k) {
    const double e = cum_regret[k - 1] - (rep.fit_a * std::sqrt(static_cast<double>(k)) + rep.fit_b);
    rss += e * e;
  }
  rep.fit_relative_residual = syy > 0.0 ? std::sqrt(rss / syy) : 0.0;
  rep.sublinear = !rep.zero_regret && rep.decay_ratio <= kSublinearDecayThreshold;
  return rep;
}

SublinearityReport sublinearity_report(std::span<const EpisodeRecord> records) {
  std::vector<double> curve;
  curve.reserve(records.size());
  for (const EpisodeRecord& r : records) curve.push_back(r.cum_regret);
  return sublinearity_report(curve);
}

std::vector<double> mean_cumulative_regret(std::span<const RunResult> runs) {
  if (runs.empty()) throw std::invalid_argument("mean_cumulative_regret: no runs");
  std::vector<double> mean(runs.front().records.size(), 0.0);
  for (const RunResult& run : runs) {
    if (run.records.size() != mean.size()) throw std::invalid_argument("mean_cumulative_regret: unequal run lengths");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += run.records[i].cum_regret;
  }
  for (double& v : mean) v /= static_cast<double>(runs.size());
  return mean;
}

}  // namespace lsvi
