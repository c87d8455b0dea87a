#pragma once

#include <Eigen/Dense>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dclm {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixMap = Eigen::Map<RowMatrix>;
using ConstRowMatrixMap = Eigen::Map<const RowMatrix>;

inline std::string shape_to_string(const std::vector<Eigen::Index>& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

// Dense n-dimensional array: a shape plus flat row-major storage. Eigen maps
// expose 2-D slices for the actual arithmetic.
struct Tensor {
  std::vector<Eigen::Index> shape;
  Eigen::ArrayXd data;

  Tensor() = default;
  Tensor(std::initializer_list<Eigen::Index> s) : shape(s) { data = Eigen::ArrayXd::Zero(count(shape)); }
  explicit Tensor(std::vector<Eigen::Index> s) : shape(std::move(s)) { data = Eigen::ArrayXd::Zero(count(shape)); }

  static Eigen::Index count(const std::vector<Eigen::Index>& s) {
    return std::accumulate(s.begin(), s.end(), Eigen::Index{1}, std::multiplies<>());
  }

  Eigen::Index size() const { return data.size(); }
  Eigen::Index dim(std::size_t i) const { return shape.at(i); }
  int rank() const { return static_cast<int>(shape.size()); }

  double& at(Eigen::Index i) { return data[i]; }
  double at(Eigen::Index i) const { return data[i]; }
  double& at(Eigen::Index i, Eigen::Index j) { return data[i * shape[1] + j]; }
  double at(Eigen::Index i, Eigen::Index j) const { return data[i * shape[1] + j]; }
  double& at(Eigen::Index c, Eigen::Index i, Eigen::Index j) {
    return data[(c * shape[1] + i) * shape[2] + j];
  }
  double at(Eigen::Index c, Eigen::Index i, Eigen::Index j) const {
    return data[(c * shape[1] + i) * shape[2] + j];
  }

  bool all_finite() const { return data.isFinite().all(); }

  // Channel c of a [C,H,W] tensor as an H x W matrix view.
  RowMatrixMap channel(Eigen::Index c) {
    return RowMatrixMap(data.data() + c * shape[1] * shape[2], shape[1], shape[2]);
  }
  ConstRowMatrixMap channel(Eigen::Index c) const {
    return ConstRowMatrixMap(data.data() + c * shape[1] * shape[2], shape[1], shape[2]);
  }

  // Kernel (o, i) of a [C_out,C_in,k,k] tensor as a k x k matrix view.
  ConstRowMatrixMap kernel(Eigen::Index o, Eigen::Index i) const {
    const Eigen::Index k = shape[2];
    return ConstRowMatrixMap(data.data() + ((o * shape[1]) + i) * k * k, k, k);
  }

  // Whole tensor as a rows x cols matrix view; product of dims must match.
  RowMatrixMap as_matrix(Eigen::Index rows, Eigen::Index cols) {
    return RowMatrixMap(data.data(), rows, cols);
  }
  ConstRowMatrixMap as_matrix(Eigen::Index rows, Eigen::Index cols) const {
    return ConstRowMatrixMap(data.data(), rows, cols);
  }
};

inline void require_shape(const Tensor& t, const std::vector<Eigen::Index>& expected,
                          const char* what) {
  if (t.shape != expected) {
    throw std::invalid_argument(std::string(what) + ": expected shape " + shape_to_string(expected) +
                                ", got " + shape_to_string(t.shape));
  }
}

}  // namespace dclm
