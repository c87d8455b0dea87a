#pragma once

#include <Eigen/Dense>

namespace dclm {

// One channel of the last convolutional stage's output: the exact grid the
// fully connected stage consumes, and the grounding substrate for feature
// predicates. Entries are non-negative (post-ReLU).
struct FeatureMap {
  Eigen::ArrayXXd values;
  int channel = -1;

  FeatureMap() = default;
  FeatureMap(Eigen::ArrayXXd v, int c) : values(std::move(v)), channel(c) {}

  bool empty() const { return (values == 0.0).all(); }
};

}  // namespace dclm
