// Copyright 2026 The safenav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line driver: train, train-ensemble, eval, sweep, safe-eval, plot.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "safenav/config.hpp"
#include "safenav/harness.hpp"
#include "safenav/outputs.hpp"
#include "safenav/trainer.hpp"

namespace fs = std::filesystem;
using namespace safenav;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out{"results"};
  std::string uncertainty{"dropout"};
  bool paper_scale{false};
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Seed (replaces the configured seed list)");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--uncertainty", c.uncertainty, "Uncertainty estimator")
      ->check(CLI::IsMember({"dropout", "ensemble"}));
  app->add_flag("--paper-scale", c.paper_scale, "15 seeds, 200 episodes, 20 ensemble members");
}

HarnessConfig resolve(const Common& c) {
  HarnessConfig config = c.config_path.empty() ? HarnessConfig{} : load_config(c.config_path);
  if (c.paper_scale) {
    config.apply_paper_scale();
  }
  if (c.seed) {
    config.eval.seeds = {*c.seed};
    config.train.seed = *c.seed;
  }
  config.validate();
  return config;
}

fs::path recovery_path(const std::string& hash) {
  return fs::temp_directory_path() / ("safenav_recovery_" + hash + ".json");
}

void finish(OutputSet files, const HarnessConfig& config, const std::string& out) {
  const std::string hash = config_hash(config);
  files["config_" + hash + ".json"] = config_to_json(config);
  emit_outputs(files, out, recovery_path(hash));
  for (const auto& [name, content] : files) {
    std::cout << "wrote " << (fs::path(out) / name).string() << "\n";
  }
}

std::vector<Checkpoint> load_all(const std::vector<std::string>& paths) {
  std::vector<Checkpoint> checkpoints;
  for (const auto& p : paths) {
    checkpoints.push_back(load_checkpoint(p));
  }
  return checkpoints;
}

EpisodeOptions episode_options(const HarnessConfig& config, UncertaintyMode mode) {
  EpisodeOptions o;
  o.uncertainty = mode;
  o.mc_samples = config.eval.mc_samples;
  o.rate_test = config.eval.rate_test;
  o.thresholds = config.poc;
  o.approach_rule = config.eval.approach_rule;
  o.fallback_uses_true_state = config.eval.fallback_uses_true_state;
  return o;
}

std::vector<std::uint64_t> episode_seeds(const HarnessConfig& config) {
  std::vector<std::uint64_t> seeds;
  for (const auto s : config.eval.seeds) {
    const auto group = evaluation_seeds(s, config.eval.episodes);
    seeds.insert(seeds.end(), group.begin(), group.end());
  }
  return seeds;
}

void progress(std::uint64_t seed, const CurvePoint& p) {
  std::fprintf(stderr, "[seed %llu] %lld steps  return %.3f  goal %.2f  collision %.2f\n",
               static_cast<unsigned long long>(seed), static_cast<long long>(p.timestep), p.mean_return,
               p.goal_rate, p.collision_rate);
}

int cmd_train(const Common& c) {
  HarnessConfig config = resolve(c);
  const std::string hash = config_hash(config);
  OutputSet files;
  for (const auto seed : config.eval.seeds) {
    TrainConfig tc = config.train;
    tc.seed = seed;
    Trainer trainer(tc, config.scenario, {}, config.env);
    int updates = 0;
    const TrainResult result = trainer.train(fs::path(c.out) / ("seed_" + std::to_string(seed)),
                                             [&](const CurvePoint& p) {
                                               if (++updates % 25 == 0) progress(seed, p);
                                             });
    const std::vector<std::uint64_t> one{seed};
    files[output_name("training_curve", hash, one, ".csv")] = training_curve_csv(result.curve);
  }
  finish(std::move(files), config, c.out);
  return 0;
}

int cmd_train_ensemble(const Common& c, std::optional<int> members) {
  HarnessConfig config = resolve(c);
  if (members) {
    config.eval.ensemble_members = *members;
  }
  config.validate();
  const std::string hash = config_hash(config);
  const auto seeds = ensemble_seed_pairs(config.train, config.eval.ensemble_members);
  const EnsembleResult result = train_ensemble(config.train, config.scenario, seeds, fs::path(c.out), config.env);
  for (const auto& f : result.failures) {
    std::cerr << "ensemble member failed: " << f << "\n";
  }
  if (!result.usable()) {
    std::cerr << "ensemble is not usable\n";
    return 1;
  }
  OutputSet files;
  for (std::size_t k = 0; k < result.members.size(); ++k) {
    const std::vector<std::uint64_t> one{seeds[k].init_seed};
    files[output_name("training_curve_member" + std::to_string(k), hash, one, ".csv")] =
        training_curve_csv(result.members[k].curve);
  }
  finish(std::move(files), config, c.out);
  return 0;
}

int cmd_eval(const Common& c, const std::vector<std::string>& checkpoints, bool traces) {
  const HarnessConfig config = resolve(c);
  const std::string hash = config_hash(config);
  std::vector<LabeledSummary> rows;
  std::vector<EpisodeMetrics> pooled;
  std::string records;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const PolicyBundle bundle = PolicyBundle::single(load_checkpoint(checkpoints[i]));
    std::vector<EpisodeMetrics> episodes;
    const auto summary =
        run_evaluation(bundle, config.scenario, config.env, config.eval.episodes, config.eval.seeds, &episodes);
    const std::string label = fs::path(checkpoints[i]).parent_path().filename().string();
    rows.push_back({label.empty() ? "policy" + std::to_string(i) : label, summary});
    pooled.insert(pooled.end(), episodes.begin(), episodes.end());
    if (traces) {
      records += episode_records_jsonl(episodes, rows.back().label);
    }
  }
  if (checkpoints.size() > 1) {
    rows.push_back({"all", summarize(pooled)});
  }
  for (const auto& r : rows) {
    std::printf("%-12s goal %6.2f%%  collision %6.2f%%  timeout %6.2f%%  PV %d  return %.3f +- %.3f\n",
                r.label.c_str(), r.summary.goal_pct, r.summary.collision_pct, r.summary.timeout_pct,
                r.summary.proxemic_violations_total, r.summary.return_mean, r.summary.return_std);
  }
  OutputSet files;
  files[output_name("evaluation", hash, config.eval.seeds, ".csv")] = evaluation_csv(rows);
  if (traces) {
    files[output_name("episodes", hash, config.eval.seeds, ".jsonl")] = records;
  }
  finish(std::move(files), config, c.out);
  return 0;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    grid.push_back(std::stod(cell));
  }
  return grid;
}

void add_sweep_files(OutputSet& files, const SweepResult& sweep, const std::string& hash,
                     const std::vector<std::uint64_t>& seeds) {
  const std::string stem = "sweep_" + std::string(to_string(sweep.axis)) + "_" +
                           std::string(to_string(sweep.uncertainty));
  files[output_name(stem, hash, seeds, ".csv")] = sweep_csv(sweep);
  for (int k = 0; k < kUncertaintyKinds; ++k) {
    files[output_name(stem + "_" + std::string(uncertainty_kind_name(k)), hash, seeds, ".svg")] =
        sweep_plot(sweep, k);
  }
  files[output_name(stem + "_collisions", hash, seeds, ".svg")] = sweep_collision_plot(sweep);
}

int cmd_sweep(const Common& c, const std::vector<std::string>& checkpoints, const std::string& axis_name,
              const std::string& grid_text) {
  const HarnessConfig config = resolve(c);
  const std::string hash = config_hash(config);
  const UncertaintyMode mode = uncertainty_mode_from_string(c.uncertainty);
  const auto loaded = load_all(checkpoints);
  const auto seeds = episode_seeds(config);
  const EpisodeOptions options = episode_options(config, mode);

  std::vector<SweepAxis> axes;
  if (axis_name == "all") {
    axes = {SweepAxis::obs_noise, SweepAxis::action_noise, SweepAxis::velocity_scale, SweepAxis::human_count};
  } else {
    axes = {sweep_axis_from_string(axis_name)};
  }
  OutputSet files;
  std::vector<SweepResult> results;
  for (const SweepAxis axis : axes) {
    const std::vector<double> grid = grid_text.empty() ? default_grid(axis) : parse_grid(grid_text);
    SweepResult sweep;
    if (mode == UncertaintyMode::ensemble) {
      sweep = perturbation_sweep(PolicyBundle::ensemble(loaded), config.scenario, config.env, axis, grid,
                                 seeds, options);
    } else {
      std::vector<SweepResult> per_policy;
      for (const auto& cp : loaded) {
        per_policy.push_back(perturbation_sweep(PolicyBundle::single(cp), config.scenario, config.env, axis,
                                                grid, seeds, options));
      }
      sweep = merge_sweeps(per_policy);
    }
    add_sweep_files(files, sweep, hash, config.eval.seeds);
    results.push_back(sweep);
    std::cout << sweep_csv(sweep);
  }
  files[output_name("rates_" + std::string(to_string(mode)), hash, config.eval.seeds, ".csv")] =
      rates_csv(results);
  finish(std::move(files), config, c.out);
  return 0;
}

int cmd_safe_eval(const Common& c, const std::vector<std::string>& checkpoints, bool traces) {
  const HarnessConfig config = resolve(c);
  const std::string hash = config_hash(config);
  const UncertaintyMode mode = uncertainty_mode_from_string(c.uncertainty);
  const auto loaded = load_all(checkpoints);
  const PolicyBundle bundle =
      mode == UncertaintyMode::ensemble ? PolicyBundle::ensemble(loaded) : PolicyBundle::single(loaded.front());
  EpisodeOptions options = episode_options(config, mode);
  options.gate = true;
  const auto cmp = safe_action_comparison(bundle, config.scenario, config.perturbation, config.env,
                                          config.eval.episodes, config.eval.seeds, options);
  std::printf("collisions without gate %d, with gate %d, prevented %s%%\n", cmp.collisions_off,
              cmp.collisions_on,
              cmp.prevented_mean ? (format_double(*cmp.prevented_mean) + " +- " + format_double(cmp.prevented_std)).c_str()
                                 : "NA");
  OutputSet files;
  files[output_name("safe_action_" + std::string(to_string(mode)), hash, config.eval.seeds, ".csv")] =
      safe_action_csv(cmp);
  if (traces) {
    options.record_trace = true;
    const auto episodes = run_episodes(bundle, config.scenario, config.perturbation, config.env,
                                       episode_seeds(config), options);
    files[output_name("safe_action_episodes", hash, config.eval.seeds, ".jsonl")] =
        episode_records_jsonl(episodes, "gated");
  }
  finish(std::move(files), config, c.out);
  return 0;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out) {
  OutputSet files;
  for (const auto& input : inputs) {
    std::ifstream in(input);
    if (!in) {
      throw std::runtime_error("cannot open " + input);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const SweepResult sweep = parse_sweep_csv(buffer.str());
    const std::string stem = fs::path(input).stem().string();
    for (int k = 0; k < kUncertaintyKinds; ++k) {
      files[stem + "_" + std::string(uncertainty_kind_name(k)) + ".svg"] = sweep_plot(sweep, k);
    }
    files[stem + "_collisions.svg"] = sweep_collision_plot(sweep);
  }
  emit_outputs(files, out, fs::temp_directory_path() / "safenav_recovery_plot.json");
  for (const auto& [name, content] : files) {
    std::cout << "wrote " << (fs::path(out) / name).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowd navigation with uncertainty-aware safe action selection"};
  app.require_subcommand(1);

  Common train_c, ens_c, eval_c, sweep_c, safe_c;
  std::optional<int> members;
  std::vector<std::string> eval_cps, sweep_cps, safe_cps, plot_inputs;
  std::string axis{"all"}, grid, plot_out{"results"};
  bool eval_traces = false, safe_traces = false;

  auto* train = app.add_subcommand("train", "Train one policy per seed");
  add_common(train, train_c);
  auto* ens = app.add_subcommand("train-ensemble", "Train an ensemble with distinct seed pairs");
  add_common(ens, ens_c);
  ens->add_option("--members", members, "Ensemble size")->check(CLI::Range(2, 1000));
  auto* eval = app.add_subcommand("eval", "Evaluate checkpoints with deterministic actions");
  add_common(eval, eval_c);
  eval->add_option("--checkpoint", eval_cps, "Checkpoint files")->required()->check(CLI::ExistingFile);
  eval->add_flag("--traces", eval_traces, "Write per-episode records");
  auto* sweep = app.add_subcommand("sweep", "Uncertainty under increasing perturbation");
  add_common(sweep, sweep_c);
  sweep->add_option("--checkpoint", sweep_cps, "Checkpoint files")->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis, "obs_noise, action_noise, velocity_scale, human_count or all");
  sweep->add_option("--grid", grid, "Comma-separated strengths (default grid of the axis)");
  auto* safe = app.add_subcommand("safe-eval", "Matched-seed comparison with and without the gate");
  add_common(safe, safe_c);
  safe->add_option("--checkpoint", safe_cps, "Checkpoint files")->required()->check(CLI::ExistingFile);
  safe->add_flag("--traces", safe_traces, "Write per-step records of the gated arm");
  auto* plot = app.add_subcommand("plot", "Redraw figures from sweep CSV files");
  plot->add_option("--input", plot_inputs, "Sweep CSV files")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(train_c);
    if (*ens) return cmd_train_ensemble(ens_c, members);
    if (*eval) return cmd_eval(eval_c, eval_cps, eval_traces);
    if (*sweep) return cmd_sweep(sweep_c, sweep_cps, axis, grid);
    if (*safe) return cmd_safe_eval(safe_c, safe_cps, safe_traces);
    if (*plot) return cmd_plot(plot_inputs, plot_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
