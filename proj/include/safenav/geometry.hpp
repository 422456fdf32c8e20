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

#ifndef SAFENAV_GEOMETRY_HPP
#define SAFENAV_GEOMETRY_HPP

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace safenav {

using Vec2 = Eigen::Vector2d;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Wraps an angle into [-pi, pi).
inline double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(angle + std::numbers::pi, two_pi);
  if (wrapped < 0.0) {
    wrapped += two_pi;
  }
  return wrapped - std::numbers::pi;
}

inline Vec2 heading_vector(double heading) { return {std::cos(heading), std::sin(heading)}; }

/// Expresses a world-frame vector in a frame rotated by `heading`.
inline Vec2 to_frame(const Vec2& v, double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {c * v.x() + s * v.y(), -s * v.x() + c * v.y()};
}

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

}  // namespace safenav

#endif  // SAFENAV_GEOMETRY_HPP
