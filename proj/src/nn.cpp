#include "dclm/nn.hpp"

#include <stdexcept>
#include <string>

namespace dclm {
namespace nn {

RowMatrix im2col(const Tensor& input, Eigen::Index k) {
  const Eigen::Index c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  const Eigen::Index oh = h - k + 1, ow = w - k + 1;
  RowMatrix patches(c_in * k * k, oh * ow);
  for (Eigen::Index c = 0; c < c_in; ++c) {
    const auto plane = input.channel(c);
    for (Eigen::Index di = 0; di < k; ++di) {
      for (Eigen::Index dj = 0; dj < k; ++dj) {
        const Eigen::Index row = (c * k + di) * k + dj;
        for (Eigen::Index y = 0; y < oh; ++y) {
          for (Eigen::Index x = 0; x < ow; ++x) {
            patches(row, y * ow + x) = plane(y + di, x + dj);
          }
        }
      }
    }
  }
  return patches;
}

Tensor conv2d(const Tensor& input, const Tensor& kernels, const Eigen::VectorXd& bias) {
  if (input.rank() != 3 || kernels.rank() != 4) {
    throw std::invalid_argument("conv2d: input must be [C,H,W] (got " + shape_to_string(input.shape) +
                                ") and kernels [C_out,C_in,k,k] (got " +
                                shape_to_string(kernels.shape) + ")");
  }
  const Eigen::Index c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  const Eigen::Index c_out = kernels.dim(0), k = kernels.dim(2);
  if (kernels.dim(1) != c_in || kernels.dim(3) != k) {
    throw std::invalid_argument("conv2d: kernel shape " + shape_to_string(kernels.shape) +
                                " does not match input shape " + shape_to_string(input.shape));
  }
  if (k > h || k > w) {
    throw std::invalid_argument("conv2d: kernel size " + std::to_string(k) +
                                " exceeds input extent " + shape_to_string(input.shape));
  }
  if (bias.size() != c_out) {
    throw std::invalid_argument("conv2d: bias length " + std::to_string(bias.size()) +
                                " does not match C_out " + std::to_string(c_out));
  }
  const Eigen::Index oh = h - k + 1, ow = w - k + 1;

  const RowMatrix patches = im2col(input, k);
  Tensor out({c_out, oh, ow});
  auto out_mat = out.as_matrix(c_out, oh * ow);
  out_mat.noalias() = kernels.as_matrix(c_out, c_in * k * k) * patches;
  out_mat.colwise() += bias;
  return out;
}

ConvGrads conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_output) {
  const Eigen::Index c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  const Eigen::Index c_out = kernels.dim(0), k = kernels.dim(2);
  const Eigen::Index oh = h - k + 1, ow = w - k + 1;
  require_shape(grad_output, {c_out, oh, ow}, "conv2d_backward: grad_output");

  const RowMatrix patches = im2col(input, k);
  const auto dout = grad_output.as_matrix(c_out, oh * ow);

  ConvGrads g;
  g.kernels = Tensor(kernels.shape);
  g.kernels.as_matrix(c_out, c_in * k * k).noalias() = dout * patches.transpose();
  g.bias = dout.rowwise().sum();

  // col2im: scatter-add patch gradients back onto the input grid.
  RowMatrix dpatches(c_in * k * k, oh * ow);
  dpatches.noalias() = kernels.as_matrix(c_out, c_in * k * k).transpose() * dout;
  g.input = Tensor(input.shape);
  for (Eigen::Index c = 0; c < c_in; ++c) {
    auto plane = g.input.channel(c);
    for (Eigen::Index di = 0; di < k; ++di) {
      for (Eigen::Index dj = 0; dj < k; ++dj) {
        const Eigen::Index row = (c * k + di) * k + dj;
        for (Eigen::Index y = 0; y < oh; ++y) {
          for (Eigen::Index x = 0; x < ow; ++x) {
            plane(y + di, x + dj) += dpatches(row, y * ow + x);
          }
        }
      }
    }
  }
  return g;
}

PoolResult max_pool2x2(const Tensor& input) {
  if (input.rank() != 3) {
    throw std::invalid_argument("max_pool2x2: input must be [C,H,W], got " +
                                shape_to_string(input.shape));
  }
  const Eigen::Index c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (h % 2 != 0 || w % 2 != 0) {
    throw std::invalid_argument("max_pool2x2: spatial dims must be even, got " +
                                shape_to_string(input.shape));
  }
  PoolResult res;
  res.output = Tensor({c, h / 2, w / 2});
  res.argmax.resize(res.output.size());
  Eigen::Index pos = 0;
  for (Eigen::Index ch = 0; ch < c; ++ch) {
    for (Eigen::Index y = 0; y < h; y += 2) {
      for (Eigen::Index x = 0; x < w; x += 2) {
        // First max wins among equals, scanning row-major in the window.
        Eigen::Index best = (ch * h + y) * w + x;
        double best_v = input.data[best];
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const Eigen::Index idx = (ch * h + y + dy) * w + (x + dx);
            if (input.data[idx] > best_v) {
              best_v = input.data[idx];
              best = idx;
            }
          }
        }
        res.output.data[pos] = best_v;
        res.argmax[pos] = best;
        ++pos;
      }
    }
  }
  return res;
}

Tensor max_pool2x2_backward(const PoolResult& pooled, const std::vector<Eigen::Index>& input_shape,
                            const Tensor& grad_output) {
  require_shape(grad_output, pooled.output.shape, "max_pool2x2_backward: grad_output");
  Tensor g(input_shape);
  for (Eigen::Index i = 0; i < grad_output.size(); ++i) {
    g.data[pooled.argmax[i]] += grad_output.data[i];
  }
  return g;
}

Eigen::VectorXd dense(const Eigen::VectorXd& input, const Tensor& weights, const Eigen::VectorXd& bias) {
  if (weights.rank() != 2 || weights.dim(1) != input.size()) {
    throw std::invalid_argument("dense: weights " + shape_to_string(weights.shape) +
                                " incompatible with input length " + std::to_string(input.size()));
  }
  if (bias.size() != weights.dim(0)) {
    throw std::invalid_argument("dense: bias length " + std::to_string(bias.size()) +
                                " does not match rows " + std::to_string(weights.dim(0)));
  }
  return weights.as_matrix(weights.dim(0), weights.dim(1)) * input + bias;
}

DenseGrads dense_backward(const Eigen::VectorXd& input, const Tensor& weights,
                          const Eigen::VectorXd& grad_output) {
  if (grad_output.size() != weights.dim(0)) {
    throw std::invalid_argument("dense_backward: grad length " + std::to_string(grad_output.size()) +
                                " does not match rows " + std::to_string(weights.dim(0)));
  }
  DenseGrads g;
  g.weights = Tensor(weights.shape);
  g.weights.as_matrix(weights.dim(0), weights.dim(1)).noalias() = grad_output * input.transpose();
  g.bias = grad_output;
  g.input = weights.as_matrix(weights.dim(0), weights.dim(1)).transpose() * grad_output;
  return g;
}

void sgd_step(std::vector<Tensor*> params, const std::vector<const Tensor*>& grads,
              const std::vector<std::string>& names, double mu) {
  if (!(mu > 0.0)) {
    throw std::invalid_argument("sgd_step: learning rate must be positive");
  }
  if (params.size() != grads.size()) {
    throw std::invalid_argument("sgd_step: parameter/gradient count mismatch");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i]->all_finite()) {
      throw std::runtime_error("sgd_step: non-finite gradient for parameter '" +
                               (i < names.size() ? names[i] : std::to_string(i)) + "'");
    }
    if (params[i]->shape != grads[i]->shape) {
      throw std::invalid_argument("sgd_step: gradient shape " + shape_to_string(grads[i]->shape) +
                                  " does not match parameter shape " +
                                  shape_to_string(params[i]->shape));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->data -= mu * grads[i]->data;
  }
}

}  // namespace nn
}  // namespace dclm
