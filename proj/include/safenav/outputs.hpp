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


#ifndef SAFENAV_OUTPUTS_HPP
#define SAFENAV_OUTPUTS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "safenav/harness.hpp"
#include "safenav/trainer.hpp"

namespace safenav {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// `<stem>_<hash>_s<seed>-<seed>...<extension>`
std::string output_name(const std::string& stem, const std::string& hash,
                        std::span<const std::uint64_t> seeds, const std::string& extension);

std::string training_curve_csv(std::span<const CurvePoint> curve);

struct LabeledSummary {
  std::string label;
  EvaluationSummary summary;
};
std::string evaluation_csv(std::span<const LabeledSummary> rows);

std::string sweep_csv(const SweepResult& sweep);
std::string rates_csv(std::span<const SweepResult> sweeps);
std::string safe_action_csv(const SafeActionComparison& comparison);

/// One JSON object per episode and one per recorded step.
std::string episode_records_jsonl(std::span<const EpisodeMetrics> episodes, const std::string& label);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, std::span<const PlotSeries> series);

/// Mean uncertainty of one kind against strength, normalized by its value at the first point
/// when that value is positive.
std::string sweep_plot(const SweepResult& sweep, int kind);
std::string sweep_collision_plot(const SweepResult& sweep);

/// Parses a file produced by sweep_csv back into a sweep result.
SweepResult parse_sweep_csv(const std::string& text);

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named file contents, written together.
using OutputSet = std::map<std::string, std::string>;

/// Saves every file into `out_dir`. The set is first stored as JSON at `recovery`; that copy is
/// removed after a complete write and kept (and named in the thrown OutputError) otherwise.
void emit_outputs(const OutputSet& files, const std::filesystem::path& out_dir,
                  const std::filesystem::path& recovery);

}  // namespace safenav

#endif  // SAFENAV_OUTPUTS_HPP
