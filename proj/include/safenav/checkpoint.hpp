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

#ifndef SAFENAV_CHECKPOINT_HPP
#define SAFENAV_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "safenav/feature_bounds.hpp"
#include "safenav/policy.hpp"

namespace safenav {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  Policy policy;
  FeatureBounds feature_bounds;
  std::int64_t timesteps{0};
  std::uint64_t init_seed{0};
  std::uint64_t env_seed{0};
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(const std::string& text);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace safenav

#endif  // SAFENAV_CHECKPOINT_HPP
