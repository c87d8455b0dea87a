#pragma once

#include <Eigen/Dense>

#include "dclm/feature_map.hpp"

namespace dclm {

// A feature map turned into a probability distribution over its cells.
struct Distribution {
  Eigen::ArrayXd probs;
  bool empty_source = false;  // true when the source map was all-zero
};

// p_i = (tau_i + eps) / sum_j (tau_j + eps). An all-zero map normalizes to the
// uniform distribution and is flagged empty so it is never used as a template.
Distribution normalize_feature_map(const Eigen::ArrayXXd& values, double eps_smooth = 1e-9);
Distribution normalize_feature_map(const FeatureMap& map, double eps_smooth = 1e-9);

// KL divergence in bits, with 0*log(0/q) = 0. Requires q_i > 0 wherever p_i > 0.
double kl(const Distribution& p, const Distribution& q);

// Jensen-Shannon divergence between two distributions, log base 2 so the
// range is exactly [0,1]:
//   JS(t||v) = 1/2 KL(v || (v+t)/2) + 1/2 KL(t || (v+t)/2)
double js(const Distribution& t, const Distribution& v);

// JS between two feature maps of the same grid shape (normalizes both first).
double js(const FeatureMap& t, const FeatureMap& v, double eps_smooth = 1e-9);

}  // namespace dclm
