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


#ifndef SAFENAV_CONFIG_HPP
#define SAFENAV_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "safenav/crowd_sim.hpp"
#include "safenav/harness.hpp"
#include "safenav/safe_action.hpp"
#include "safenav/trainer.hpp"

namespace safenav {

struct EvalConfig {
  int episodes{50};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int ensemble_members{5};
  int mc_samples{20};
  double rate_test{0.5};
  ApproachRule approach_rule{ApproachRule::closing};
  bool fallback_uses_true_state{true};
};

/// Everything a CLI run depends on. The JSON file has one object per section: "train",
/// "scenario", "perturbation", "poc", "env", "eval". Missing keys keep their defaults; unknown
/// keys are rejected.
struct HarnessConfig {
  TrainConfig train{};
  ScenarioSpec scenario{ScenarioSpec::position_swap()};
  PerturbationSpec perturbation{};
  PocThresholds poc{};
  EnvConfig env{};
  EvalConfig eval{};

  /// 15 seeds, 200 evaluation episodes and 20 ensemble members.
  void apply_paper_scale();
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

HarnessConfig parse_config(const std::string& text);
HarnessConfig load_config(const std::filesystem::path& path);

/// Canonical JSON rendering with every field written out.
std::string config_to_json(const HarnessConfig& config);

/// 16 hex digits of the FNV-1a hash of the canonical rendering.
std::string config_hash(const HarnessConfig& config);

}  // namespace safenav

#endif  // SAFENAV_CONFIG_HPP
