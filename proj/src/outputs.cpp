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


#include "safenav/outputs.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace safenav {

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) {
    parts.push_back(cell);
  }
  return parts;
}

constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c",
                                             "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

std::string output_name(const std::string& stem, const std::string& hash,
                        std::span<const std::uint64_t> seeds, const std::string& extension) {
  std::string name = stem + "_" + hash + "_s";
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    name += (i ? "-" : "") + std::to_string(seeds[i]);
  }
  return name + extension;
}

std::string training_curve_csv(std::span<const CurvePoint> curve) {
  std::ostringstream out;
  out << "timestep,mean_return,goal_rate,collision_rate,timeout_rate,episodes\n";
  for (const auto& p : curve) {
    out << p.timestep << ',' << format_double(p.mean_return) << ',' << format_double(p.goal_rate) << ','
        << format_double(p.collision_rate) << ',' << format_double(p.timeout_rate) << ',' << p.episodes
        << '\n';
  }
  return out.str();
}

std::string evaluation_csv(std::span<const LabeledSummary> rows) {
  std::ostringstream out;
  out << "label,episodes,goal_pct,collision_pct,timeout_pct,pv_total,pv_mean,return_mean,return_std,"
         "min_distance_mean\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out << r.label << ',' << s.episodes << ',' << format_double(s.goal_pct) << ','
        << format_double(s.collision_pct) << ',' << format_double(s.timeout_pct) << ','
        << s.proxemic_violations_total << ',' << format_double(s.proxemic_violations_mean) << ','
        << format_double(s.return_mean) << ',' << format_double(s.return_std) << ','
        << format_double(s.min_distance_mean) << '\n';
  }
  return out.str();
}

std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "axis,uncertainty,strength,episodes,steps,goals,collisions";
  for (int k = 0; k < kUncertaintyKinds; ++k) {
    out << ',' << uncertainty_kind_name(k);
  }
  out << '\n';
  for (const auto& p : sweep.points) {
    out << to_string(sweep.axis) << ',' << to_string(sweep.uncertainty) << ','
        << format_double(p.strength) << ',' << p.episodes << ',' << p.steps << ',' << p.goals << ','
        << p.collisions;
    for (double u : p.mean_uncertainty) {
      out << ',' << format_double(u);
    }
    out << '\n';
  }
  return out.str();
}

SweepResult parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("axis,uncertainty,strength", 0) != 0) {
    throw std::invalid_argument("not a sweep CSV");
  }
  SweepResult sweep;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 7 + kUncertaintyKinds) {
      throw std::invalid_argument("sweep CSV row has " + std::to_string(cells.size()) + " cells");
    }
    if (first) {
      sweep.axis = sweep_axis_from_string(cells[0]);
      sweep.uncertainty = uncertainty_mode_from_string(cells[1]);
      first = false;
    }
    SweepPoint p;
    p.strength = std::stod(cells[2]);
    p.episodes = std::stoi(cells[3]);
    p.steps = std::stoi(cells[4]);
    p.goals = std::stoi(cells[5]);
    p.collisions = std::stoi(cells[6]);
    for (int k = 0; k < kUncertaintyKinds; ++k) {
      p.mean_uncertainty[k] = std::stod(cells[7 + k]);
    }
    sweep.points.push_back(p);
  }
  return sweep;
}

std::string rates_csv(std::span<const SweepResult> sweeps) {
  std::ostringstream out;
  out << "axis,uncertainty";
  for (int k = 0; k < kUncertaintyKinds; ++k) {
    out << ',' << uncertainty_kind_name(k);
  }
  out << '\n';
  for (const auto& s : sweeps) {
    const auto rates = sweep_rates(s);
    out << to_string(s.axis) << ',' << to_string(s.uncertainty);
    for (const auto& r : rates) {
      out << ',' << opt(r);
    }
    out << '\n';
  }
  return out.str();
}

std::string safe_action_csv(const SafeActionComparison& c) {
  std::ostringstream out;
  out << "group,episodes,collisions_off,collisions_on,cautious_steps,prevented_pct,prevented_std\n";
  int episodes = 0;
  for (const auto& g : c.groups) {
    out << g.seed << ',' << g.episodes << ',' << g.collisions_off << ',' << g.collisions_on << ','
        << g.cautious_steps << ',' << opt(g.prevented_pct) << ",\n";
    episodes += g.episodes;
  }
  out << "all," << episodes << ',' << c.collisions_off << ',' << c.collisions_on << ",,"
      << opt(c.prevented_mean) << ',' << format_double(c.prevented_std) << '\n';
  return out.str();
}

std::string episode_records_jsonl(std::span<const EpisodeMetrics> episodes, const std::string& label) {
  using nlohmann::json;
  std::ostringstream out;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const auto& e = episodes[i];
    json ep = {{"type", "episode"},
               {"label", label},
               {"episode", i},
               {"seed", e.seed},
               {"outcome", std::string(to_string(e.outcome))},
               {"return", e.episode_return},
               {"proxemic_violations", e.proxemic_violations},
               {"min_human_distance", e.min_human_distance},
               {"steps", e.steps},
               {"cautious_steps", e.cautious_steps}};
    out << ep.dump() << '\n';
    for (const auto& r : e.trace) {
      json step = {{"type", "step"},
                   {"label", label},
                   {"episode", i},
                   {"t", r.t},
                   {"time", r.time},
                   {"action", {r.action.speed, r.action.delta_heading}},
                   {"epistemic", {r.estimate.epistemic[0], r.estimate.epistemic[1]}},
                   {"aleatoric", {r.estimate.aleatoric[0], r.estimate.aleatoric[1]}},
                   {"feature", r.estimate.feature_uncertainty},
                   {"epistemic_w", {r.windowed.epistemic[0], r.windowed.epistemic[1]}},
                   {"aleatoric_w", {r.windowed.aleatoric[0], r.windowed.aleatoric[1]}},
                   {"feature_w", r.windowed.feature_uncertainty},
                   {"c_ep", r.conditions.epistemic},
                   {"c_feat", r.conditions.feature},
                   {"c_prox", r.conditions.proximity},
                   {"c_ap", r.conditions.approach},
                   {"poc", r.conditions.poc},
                   {"mode", r.mode == ControlMode::cautious ? "cautious" : "learned"},
                   {"nearest_distance", r.nearest_distance},
                   {"reward", r.reward}};
      json agents = json::array();
      for (const auto& a : r.agents) {
        agents.push_back({{"position", {a.position.x(), a.position.y()}},
                          {"velocity", {a.velocity.x(), a.velocity.y()}},
                          {"radius", a.radius}});
      }
      step["agents"] = std::move(agents);
      out << step.dump() << '\n';
    }
  }
  return out.str();
}

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, std::span<const PlotSeries> series) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 60;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.x) { x0 = std::min(x0, v); x1 = std::max(x1, v); }
    for (double v : s.y) {
      if (std::isfinite(v)) { y0 = std::min(y0, v); y1 = std::max(y1, v); }
    }
  }
  if (!(x1 > x0)) { x0 = std::isfinite(x0) ? x0 - 1 : 0; x1 = x0 + 2; }
  if (!(y1 > y0)) { y0 = std::isfinite(y0) ? y0 - 1 : 0; y1 = y0 + 2; }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape_xml(title) << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
        << tick_label(xv) << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << tick_label(yv) << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
      << escape_xml(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % kColors.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
      if (std::isfinite(series[s].y[i])) {
        out << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
      }
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 14 * (s + 1) << "\" fill=\"" << color << "\">"
        << escape_xml(series[s].name) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string sweep_plot(const SweepResult& sweep, int kind) {
  PlotSeries s;
  s.name = std::string(to_string(sweep.uncertainty));
  const double base = sweep.points.empty() ? 0.0 : sweep.points.front().mean_uncertainty[kind];
  for (const auto& p : sweep.points) {
    s.x.push_back(p.strength);
    s.y.push_back(base > 0.0 ? p.mean_uncertainty[kind] / base : p.mean_uncertainty[kind]);
  }
  const std::vector<PlotSeries> series{s};
  return svg_line_plot(std::string(uncertainty_kind_name(kind)) + " vs " + std::string(to_string(sweep.axis)),
                       std::string(to_string(sweep.axis)),
                       base > 0.0 ? "mean uncertainty / value at first point" : "mean uncertainty", series);
}

std::string sweep_collision_plot(const SweepResult& sweep) {
  PlotSeries s;
  s.name = "collisions";
  for (const auto& p : sweep.points) {
    s.x.push_back(p.strength);
    s.y.push_back(p.collisions);
  }
  const std::vector<PlotSeries> series{s};
  return svg_line_plot("collisions vs " + std::string(to_string(sweep.axis)),
                       std::string(to_string(sweep.axis)), "collisions", series);
}

void emit_outputs(const OutputSet& files, const std::filesystem::path& out_dir,
                  const std::filesystem::path& recovery) {
  namespace fs = std::filesystem;
  {
    std::error_code ec;
    if (recovery.has_parent_path()) {
      fs::create_directories(recovery.parent_path(), ec);
    }
    std::ofstream rec(recovery, std::ios::binary | std::ios::trunc);
    if (!rec) {
      throw OutputError("cannot write recovery file " + recovery.string());
    }
    rec << nlohmann::json(files).dump();
  }
  auto fail = [&](const std::string& what) {
    throw OutputError(what + "; results kept in " + recovery.string());
  };
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    fail("cannot create output directory " + out_dir.string());
  }
  for (const auto& [name, content] : files) {
    const fs::path path = out_dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
      fail("cannot write " + path.string());
    }
    out << content;
    if (!out) {
      fail("failed while writing " + path.string());
    }
  }
  fs::remove(recovery, ec);
}

}  // namespace safenav
