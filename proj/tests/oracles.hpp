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


// Brute-force reference implementations used by the tests. Written as plain loops over
// std::vector so they share no code with the library.

#ifndef SAFENAV_TESTS_ORACLES_HPP
#define SAFENAV_TESTS_ORACLES_HPP

#include <cmath>
#include <vector>

namespace oracle {

// Two-pass population variance.
inline double population_variance(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(x.size());
}

inline double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// sum_k (gamma * lambda)^k delta_{t+k}, with the product reset at episode ends.
inline std::vector<double> gae_direct(const std::vector<double>& r, const std::vector<double>& v,
                                      const std::vector<double>& done, double last_value,
                                      double gamma, double lambda) {
  const std::size_t n = r.size();
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double next = t + 1 < n ? v[t + 1] : last_value;
    delta[t] = r[t] + gamma * next * (1.0 - done[t]) - v[t];
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      adv[t] += weight * delta[k];
      if (done[k] > 0.5) break;
      weight *= gamma * lambda;
    }
  }
  return adv;
}

}  // namespace oracle

#endif  // SAFENAV_TESTS_ORACLES_HPP
