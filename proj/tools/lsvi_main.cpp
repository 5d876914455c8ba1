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

// lsvi: generate / run / sweep / diagnose / report.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lsvi/diagnostics.hpp"
#include "lsvi/errors.hpp"
#include "lsvi/harness.hpp"
#include "lsvi/linear_mdp.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string seeds;
  std::string variant;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "Key-value config file");
  cmd->add_option("--set", opt.overrides, "Override a config key (dotted.key=value), repeatable");
  cmd->add_option("--out", opt.out_dir, "Output directory");
  cmd->add_option("--seeds", opt.seeds, "Comma-separated list of seeds");
  cmd->add_option("--variant", opt.variant, "baseline|fixed|adaptive")
      ->check(CLI::IsMember({"baseline", "fixed", "adaptive"}));
  cmd->add_flag("--quiet", opt.quiet, "Suppress progress output");
}

lsvi::KeyValueConfig assemble(const CommonOptions& opt) {
  lsvi::KeyValueConfig kv;
  if (!opt.config_path.empty()) kv = lsvi::KeyValueConfig::load(opt.config_path);
  for (const auto& o : opt.overrides) kv.apply_override(o);
  if (!opt.out_dir.empty()) kv.set("out.dir", opt.out_dir);
  if (!opt.seeds.empty()) kv.set("run.seeds", opt.seeds);
  if (!opt.variant.empty()) kv.set("hp.variant", opt.variant);
  return kv;
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

int cmd_generate(const CommonOptions& opt) {
  const auto kv = assemble(opt);
  const auto cfg = lsvi::make_experiment_config(kv);
  const auto out = ensure_dir(cfg.out_dir.string()) / kv.get_string("out.mdp", "mdp.lmdp");
  const auto mdp = lsvi::build_environment(cfg, cfg.seeds.front());
  lsvi::save_mdp(mdp, out);
  if (!opt.quiet) {
    std::cerr << "wrote " << out.string() << " (|S|=" << mdp.n_states << ", |A|=" << mdp.n_actions
              << ", d=" << mdp.dim << ", H=" << mdp.horizon << ", seed=" << mdp.seed << ")\n";
  }
  return 0;
}

void write_outputs(const lsvi::ExperimentConfig& cfg, const std::vector<lsvi::EpisodeRecord>& records, bool quiet) {
  const auto dir = ensure_dir(cfg.out_dir.string());
  lsvi::emit_csv(records, dir / cfg.csv_name);
  lsvi::emit_json(records, cfg.source, dir / cfg.json_name);
  if (!quiet) std::cerr << "wrote " << records.size() << " records to " << (dir / cfg.csv_name).string() << "\n";
}

int cmd_run(const CommonOptions& opt) {
  const auto cfg = lsvi::make_experiment_config(assemble(opt));
  if (!opt.quiet) {
    std::cerr << "running " << cfg.run_id << " for K=" << cfg.hp.episodes << " over " << cfg.seeds.size()
              << " seed(s)\n";
  }
  const auto runs = lsvi::run_experiment(cfg);
  std::vector<lsvi::EpisodeRecord> records;
  for (const auto& r : runs) records.insert(records.end(), r.records.begin(), r.records.end());
  write_outputs(cfg, records, opt.quiet);
  if (!opt.quiet) {
    for (const auto& r : runs) {
      std::cerr << "seed " << r.seed << ": cumulative regret " << r.records.back().cum_regret
                << ", final logical space " << r.records.back().logical_space << "\n";
    }
  }
  return 0;
}

int cmd_sweep(const CommonOptions& opt) {
  const auto kv = assemble(opt);
  const auto base = lsvi::make_experiment_config(kv);
  const auto points = lsvi::expand_sweep(kv);
  if (!opt.quiet) std::cerr << "sweeping " << points.size() << " grid point(s)\n";
  const auto records = lsvi::run_sweep(points, base.threads);
  write_outputs(base, records, opt.quiet);
  return 0;
}

void append_series(std::vector<lsvi::EpisodeRecord>& out, const lsvi::DecaySeries& s, std::uint64_t seed) {
  double running = 0.0;
  for (std::size_t i = 0; i < s.index.size(); ++i) {
    running += s.values[i];
    lsvi::EpisodeRecord r;
    r.run_id = s.label;
    r.seed = seed;
    r.variant = "diagnostic";
    r.episode = s.index[i];
    r.regret = s.values[i];
    r.cum_regret = running;
    out.push_back(std::move(r));
  }
}

int cmd_diagnose(const CommonOptions& opt) {
  const auto kv = assemble(opt);
  const auto cfg = lsvi::make_experiment_config(kv);
  const int d = static_cast<int>(kv.get_int("diag.d", 8));
  const int n = static_cast<int>(kv.get_int("diag.n", 2000));
  const int trials = static_cast<int>(kv.get_int("diag.trials", 100));
  const int min_eig_k = static_cast<int>(kv.get_int("diag.min_eig_k", 512));
  const int ell_trials = static_cast<int>(kv.get_int("diag.ellipsoid_trials", 10000));
  const int ell_d = static_cast<int>(kv.get_int("diag.ellipsoid_d", 6));
  const auto seed = kv.get_u64("diag.seed", 0);
  if (d < 1 || n < 20 || trials < 1 || min_eig_k < 1 || ell_trials < 1 || ell_d < 1) {
    throw lsvi::ConfigError("diag.* values out of range (diag.n must be >= 20)");
  }

  std::vector<lsvi::EpisodeRecord> records;
  bool all_pass = true;

  const auto ell = lsvi::ellipsoid_inequality_check(ell_trials, ell_d, seed);
  all_pass &= ell.passed();
  std::cout << (ell.passed() ? "PASS" : "FAIL") << " ellipsoid inequality: " << ell.violations.size()
            << " violations in " << ell.trials << " trials at d=" << ell_d << "\n";

  const int passing = lsvi::min_eigenvalue_trials_passing(d, min_eig_k, trials, seed);
  const bool eig_ok = passing * 100 >= 95 * trials;
  all_pass &= eig_ok;
  std::cout << (eig_ok ? "PASS" : "FAIL") << " min eigenvalue >= k/100: " << passing << "/" << trials
            << " trials at d=" << d << ", k=" << min_eig_k << "\n";
  append_series(records, lsvi::min_eigenvalue_series(lsvi::GaussianFeatureSpec::isotropic(d, n, seed)), seed);

  const auto lambda_series = lsvi::lambda_step_norm_series(lsvi::GaussianFeatureSpec::isotropic(d, n, seed));
  const double ratio = lsvi::scaled_median_ratio(lambda_series, 2.0, n / 20, n / 5, n / 4, n);
  const bool ratio_ok = ratio >= 1.0 / 20.0 && ratio <= 20.0;
  all_pass &= ratio_ok;
  std::cout << (ratio_ok ? "PASS" : "FAIL") << " lambda step norm k^2-scaled median ratio (late/early): " << ratio
            << "\n";
  append_series(records, lambda_series, seed);

  // Weight-step series on a baseline agent run uses simplex features, so it is reported only.
  auto agent_cfg = cfg;
  agent_cfg.record_snapshots = true;
  agent_cfg.replay = lsvi::Replay::kNone;
  const auto run = lsvi::run_single(agent_cfg, cfg.seeds.front());
  const int step = static_cast<int>(kv.get_int("diag.step", 0));
  if (step < 0 || run.weights.empty() || step >= static_cast<int>(run.weights.front().size())) {
    throw lsvi::ConfigError("diag.step out of range");
  }
  std::vector<lsvi::Vector> w;
  for (const auto& per_episode : run.weights) w.push_back(per_episode[step]);
  const auto weight_series = lsvi::weight_step_norm_series(w);
  append_series(records, weight_series, cfg.seeds.front());
  if (weight_series.index.size() >= 20) {
    const int K = static_cast<int>(w.size());
    std::cout << "INFO weight step norm k-scaled median ratio (exploratory, simplex features): "
              << lsvi::scaled_median_ratio(weight_series, 1.0, K / 20, K / 5, K / 4, K - 1) << "\n";
  }

  const auto dir = ensure_dir(cfg.out_dir.string());
  lsvi::emit_csv(records, dir / "diagnostics.csv");
  if (!opt.quiet) std::cerr << "wrote " << (dir / "diagnostics.csv").string() << "\n";
  return all_pass ? 0 : 1;
}

int cmd_report(const std::string& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw lsvi::ConfigError("cannot read " + csv_path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto records = lsvi::parse_csv(buf.str());

  // (run_id, variant) -> seed -> curve
  std::map<std::pair<std::string, std::string>, std::map<std::uint64_t, std::vector<const lsvi::EpisodeRecord*>>> groups;
  for (const auto& r : records) groups[{r.run_id, r.variant}][r.seed].push_back(&r);

  nlohmann::json out = nlohmann::json::array();
  for (const auto& [key, by_seed] : groups) {
    nlohmann::json entry = {{"run_id", key.first}, {"variant", key.second}, {"seeds", by_seed.size()}};
    std::size_t length = by_seed.begin()->second.size();
    std::vector<double> mean(length, 0.0);
    std::uint64_t max_space = 0;
    bool equal_lengths = true;
    for (const auto& [seed, rows] : by_seed) {
      if (rows.size() != length) {
        equal_lengths = false;
        break;
      }
      for (std::size_t i = 0; i < length; ++i) {
        mean[i] += rows[i]->cum_regret / static_cast<double>(by_seed.size());
        max_space = std::max(max_space, rows[i]->logical_space);
      }
    }
    entry["max_logical_space"] = max_space;
    if (equal_lengths && length >= 100 && key.second != "diagnostic") {
      const auto rep = lsvi::sublinearity_report(mean);
      entry["sublinearity"] = {{"K", rep.episodes},
                               {"avg_regret_quarter", rep.avg_quarter},
                               {"avg_regret_half", rep.avg_half},
                               {"avg_regret_full", rep.avg_full},
                               {"decay_ratio", rep.decay_ratio},
                               {"fit_a", rep.fit_a},
                               {"fit_b", rep.fit_b},
                               {"fit_relative_residual", rep.fit_relative_residual},
                               {"zero_regret", rep.zero_regret},
                               {"sublinear", rep.sublinear}};
    }
    out.push_back(entry);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LSVI-UCB and space-efficient reset variants on finite linear MDPs"};
  app.require_subcommand(1);

  CommonOptions gen_opt, run_opt, sweep_opt, diag_opt;
  auto* gen = app.add_subcommand("generate", "Generate a synthetic linear MDP and write it in LMDPv001 format");
  add_common(gen, gen_opt);
  auto* run = app.add_subcommand("run", "Run one experiment and emit per-episode records");
  add_common(run, run_opt);
  auto* sweep = app.add_subcommand("sweep", "Run a grid over sweep.rho / sweep.m / sweep.tau_c / sweep.budget_exponent");
  add_common(sweep, sweep_opt);
  auto* diag = app.add_subcommand("diagnose", "Run the convergence diagnostics");
  add_common(diag, diag_opt);
  std::string report_csv;
  auto* report = app.add_subcommand("report", "Summarize a records CSV (sublinearity, space)");
  report->add_option("csv", report_csv, "Records CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(gen_opt);
    if (*run) return cmd_run(run_opt);
    if (*sweep) return cmd_sweep(sweep_opt);
    if (*diag) return cmd_diagnose(diag_opt);
    if (*report) return cmd_report(report_csv);
  } catch (const lsvi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const lsvi::ValidationError& e) {
    std::cerr << "environment validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const lsvi::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
