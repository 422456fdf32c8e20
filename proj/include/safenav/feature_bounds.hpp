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

#ifndef SAFENAV_FEATURE_BOUNDS_HPP
#define SAFENAV_FEATURE_BOUNDS_HPP

#include <Eigen/Core>

namespace safenav {

/// Running element-wise extrema of the feature vectors seen during training.
struct FeatureBounds {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  bool empty() const { return min.size() == 0; }
  Eigen::Index size() const { return min.size(); }

  void update(const Eigen::VectorXd& features) {
    if (empty()) {
      min = features;
      max = features;
      return;
    }
    min = min.cwiseMin(features);
    max = max.cwiseMax(features);
  }

  /// Updates from every column of a D x B matrix.
  void update_columns(const Eigen::MatrixXd& features) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      update(features.col(j));
    }
  }

  /// Variance of a uniform distribution spanning each element's range, (max - min)^2 / 12.
  Eigen::VectorXd variance_bound() const { return (max - min).array().square().matrix() / 12.0; }
};

}  // namespace safenav

#endif  // SAFENAV_FEATURE_BOUNDS_HPP
