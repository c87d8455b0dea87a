#pragma once

#include <vector>

#include "dclm/tensor.hpp"

namespace dclm {
namespace nn {

// Valid (no-padding) stride-1 cross-correlation.
//   input   [C_in, H, W]
//   kernels [C_out, C_in, k, k]
//   bias    [C_out]
// -> output [C_out, H-k+1, W-k+1]
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Eigen::VectorXd& bias);

// Patch matrix for the convolution above: rows C_in*k*k, cols out_h*out_w.
RowMatrix im2col(const Tensor& input, Eigen::Index k);

struct ConvGrads {
  Tensor kernels;
  Eigen::VectorXd bias;
  Tensor input;
};
ConvGrads conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_output);

struct PoolResult {
  Tensor output;                 // [C, H/2, W/2]
  std::vector<Eigen::Index> argmax;  // flat input index per output cell, routes gradients
};
PoolResult max_pool2x2(const Tensor& input);
Tensor max_pool2x2_backward(const PoolResult& pooled, const std::vector<Eigen::Index>& input_shape,
                            const Tensor& grad_output);

// Affine map W*x + b with W [m,n]; no squashing on the output.
Eigen::VectorXd dense(const Eigen::VectorXd& input, const Tensor& weights, const Eigen::VectorXd& bias);

struct DenseGrads {
  Tensor weights;
  Eigen::VectorXd bias;
  Eigen::VectorXd input;
};
DenseGrads dense_backward(const Eigen::VectorXd& input, const Tensor& weights,
                          const Eigen::VectorXd& grad_output);

inline void relu_inplace(Tensor& t) { t.data = t.data.max(0.0); }

// Subgradient 0 at inactive units (preact <= 0).
inline Tensor relu_backward(const Tensor& preact, const Tensor& grad_output) {
  Tensor g = grad_output;
  g.data *= (preact.data > 0.0).cast<double>();
  return g;
}

// theta <- theta - mu * grad, in place. Rejects non-finite gradients,
// naming the offending parameter.
void sgd_step(std::vector<Tensor*> params, const std::vector<const Tensor*>& grads,
              const std::vector<std::string>& names, double mu);

}  // namespace nn
}  // namespace dclm
