#include "dclm/divergence.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dclm {

Distribution normalize_feature_map(const Eigen::ArrayXXd& values, double eps_smooth) {
  if (!(eps_smooth > 0.0)) {
    throw std::invalid_argument("eps_smooth must be positive");
  }
  if ((values < 0.0).any()) {
    throw std::invalid_argument("feature map has a negative entry; post-ReLU maps are non-negative");
  }
  Distribution d;
  d.empty_source = (values == 0.0).all();
  Eigen::ArrayXd flat(values.size());
  // Row-major flattening, matching tensor serialization order.
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      flat[pos++] = values(i, j) + eps_smooth;
    }
  }
  d.probs = flat / flat.sum();
  return d;
}

Distribution normalize_feature_map(const FeatureMap& map, double eps_smooth) {
  return normalize_feature_map(map.values, eps_smooth);
}

double kl(const Distribution& p, const Distribution& q) {
  if (p.probs.size() != q.probs.size()) {
    throw std::invalid_argument("kl: length mismatch: " + std::to_string(p.probs.size()) + " vs " +
                                std::to_string(q.probs.size()));
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.probs.size(); ++i) {
    const double pi = p.probs[i];
    if (pi > 0.0) {
      sum += pi * std::log2(pi / q.probs[i]);
    }
  }
  return sum;
}

double js(const Distribution& t, const Distribution& v) {
  if (t.probs.size() != v.probs.size()) {
    throw std::invalid_argument("js: length mismatch: " + std::to_string(t.probs.size()) + " vs " +
                                std::to_string(v.probs.size()));
  }
  Distribution mid;
  mid.probs = 0.5 * (v.probs + t.probs);
  return 0.5 * kl(v, mid) + 0.5 * kl(t, mid);
}

double js(const FeatureMap& t, const FeatureMap& v, double eps_smooth) {
  if (t.values.rows() != v.values.rows() || t.values.cols() != v.values.cols()) {
    throw std::invalid_argument("js: grid shape mismatch: [" + std::to_string(t.values.rows()) + "x" +
                                std::to_string(t.values.cols()) + "] vs [" +
                                std::to_string(v.values.rows()) + "x" +
                                std::to_string(v.values.cols()) + "]");
  }
  return js(normalize_feature_map(t, eps_smooth), normalize_feature_map(v, eps_smooth));
}

}  // namespace dclm
