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

#include "safenav/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace safenav {

namespace {

using nlohmann::json;

json to_json_vector(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd from_json_vector(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  const Policy& policy = checkpoint.policy;
  const PolicyArchitecture& arch = policy.architecture();
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["architecture"] = {{"input_size", arch.input_size},
                       {"hidden_size", arch.hidden_size},
                       {"actor_hidden", arch.actor_hidden},
                       {"critic_hidden", arch.critic_hidden},
                       {"extractor", "lstm2"},
                       {"action_size", kActionSize}};
  j["clamp"] = {{"min", policy.clamp_bounds().min}, {"max", policy.clamp_bounds().max}};
  j["timesteps"] = checkpoint.timesteps;
  j["init_seed"] = checkpoint.init_seed;
  j["env_seed"] = checkpoint.env_seed;
  j["input_scale"] = to_json_vector(policy.input_scale());
  j["parameters"] = to_json_vector(policy.parameters());
  if (!checkpoint.feature_bounds.empty()) {
    j["feature_bounds"] = {{"min", to_json_vector(checkpoint.feature_bounds.min)},
                           {"max", to_json_vector(checkpoint.feature_bounds.max)}};
  }
  return j.dump();
}

Checkpoint deserialize_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw CheckpointError("unsupported checkpoint format version " + std::to_string(version));
    }
    const json& a = j.at("architecture");
    if (a.at("extractor").get<std::string>() != "lstm2" || a.at("action_size").get<int>() != kActionSize) {
      throw CheckpointError("checkpoint architecture is not supported");
    }
    PolicyArchitecture arch;
    arch.input_size = a.at("input_size").get<int>();
    arch.hidden_size = a.at("hidden_size").get<int>();
    arch.actor_hidden = a.at("actor_hidden").get<int>();
    arch.critic_hidden = a.at("critic_hidden").get<int>();

    Checkpoint checkpoint;
    checkpoint.policy = Policy(arch, 0);
    const Eigen::VectorXd params = from_json_vector(j.at("parameters"));
    if (params.size() != checkpoint.policy.parameter_count()) {
      throw CheckpointError("parameter count does not match the architecture descriptor");
    }
    checkpoint.policy.parameters() = params;
    checkpoint.policy.set_input_scale(from_json_vector(j.at("input_scale")));
    checkpoint.policy.set_clamp_bounds({j.at("clamp").at("min").get<double>(),
                                        j.at("clamp").at("max").get<double>()});
    checkpoint.timesteps = j.at("timesteps").get<std::int64_t>();
    checkpoint.init_seed = j.at("init_seed").get<std::uint64_t>();
    checkpoint.env_seed = j.at("env_seed").get<std::uint64_t>();
    if (j.contains("feature_bounds")) {
      checkpoint.feature_bounds.min = from_json_vector(j["feature_bounds"].at("min"));
      checkpoint.feature_bounds.max = from_json_vector(j["feature_bounds"].at("max"));
      if (checkpoint.feature_bounds.min.size() != arch.hidden_size ||
          checkpoint.feature_bounds.max.size() != arch.hidden_size) {
        throw CheckpointError("feature bounds do not match the feature dimension");
      }
    }
    return checkpoint;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("incomplete checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("inconsistent checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw CheckpointError("cannot write checkpoint to " + tmp.string());
    }
    out << serialize_checkpoint(checkpoint);
    if (!out) {
      throw CheckpointError("failed while writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError("cannot open checkpoint " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_checkpoint(buffer.str());
}

}  // namespace safenav
