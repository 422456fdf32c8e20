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

// Serial reference vs OpenMP episode evaluation.

#include <benchmark/benchmark.h>

#include <vector>

#include "safenav/checkpoint.hpp"
#include "safenav/harness.hpp"

using namespace safenav;

namespace {

Checkpoint random_checkpoint(std::uint64_t seed) {
  const EnvConfig env;
  PolicyArchitecture arch;
  arch.input_size = observation_size(env);
  Checkpoint c;
  c.policy = Policy(arch, seed);
  c.policy.set_input_scale(default_input_scale(env));
  c.feature_bounds.min = Eigen::VectorXd::Constant(arch.hidden_size, -1.0);
  c.feature_bounds.max = Eigen::VectorXd::Constant(arch.hidden_size, 1.0);
  c.init_seed = seed;
  return c;
}

EpisodeOptions options_for(UncertaintyMode mode) {
  EpisodeOptions o;
  o.uncertainty = mode;
  o.mc_samples = 20;
  return o;
}

void run(benchmark::State& state, Execution execution, UncertaintyMode mode) {
  std::vector<Checkpoint> members;
  for (std::uint64_t k = 1; k <= 5; ++k) members.push_back(random_checkpoint(k));
  const PolicyBundle bundle = mode == UncertaintyMode::ensemble ? PolicyBundle::ensemble(members)
                                                                 : PolicyBundle::single(members.front());
  const auto seeds = evaluation_seeds(17, static_cast<int>(state.range(0)));
  const EpisodeOptions o = options_for(mode);
  for (auto _ : state) {
    auto records = run_episodes(bundle, ScenarioSpec::position_swap(), {}, {}, seeds, o, execution);
    benchmark::DoNotOptimize(records.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EpisodesSerial(benchmark::State& s) { run(s, Execution::serial, UncertaintyMode::none); }
void BM_EpisodesParallel(benchmark::State& s) { run(s, Execution::parallel, UncertaintyMode::none); }
void BM_DropoutSerial(benchmark::State& s) { run(s, Execution::serial, UncertaintyMode::dropout); }
void BM_DropoutParallel(benchmark::State& s) { run(s, Execution::parallel, UncertaintyMode::dropout); }
void BM_EnsembleSerial(benchmark::State& s) { run(s, Execution::serial, UncertaintyMode::ensemble); }
void BM_EnsembleParallel(benchmark::State& s) { run(s, Execution::parallel, UncertaintyMode::ensemble); }

}  // namespace

BENCHMARK(BM_EpisodesSerial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EpisodesParallel)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DropoutSerial)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DropoutParallel)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleSerial)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
