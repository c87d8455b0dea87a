#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dclm/feature_map.hpp"
#include "dclm/nn.hpp"
#include "dclm/rng.hpp"
#include "dclm/tensor.hpp"

namespace dclm {

struct ConvSpec {
  Eigen::Index out_channels;
  Eigen::Index kernel;
  bool pool;
};

// The perception CNN in two stages: convolutional feature extraction ending in
// 32 feature maps, then a single fully connected decision layer.
struct Architecture {
  std::string id;
  std::vector<ConvSpec> blocks;
  Eigen::Index in_channels = 1;
  Eigen::Index input_h = 28;
  Eigen::Index input_w = 28;
  Eigen::Index num_classes = 10;

  // cnns-1: 2 conv blocks (16->32), cnns-2: 3 (16->24->32), cnns-3: 4 (8->16->24->32).
  // 5x5 kernels with 2x2 pooling on the first two blocks take 28x28 to 4x4;
  // later blocks convolve without pooling so the grid never degenerates.
  static Architecture preset(const std::string& id);

  Eigen::Index feature_channels() const { return blocks.back().out_channels; }
  // Spatial extent of the final feature maps.
  std::pair<Eigen::Index, Eigen::Index> feature_grid() const;
  Eigen::Index flat_features() const {
    auto [h, w] = feature_grid();
    return feature_channels() * h * w;
  }
};

struct PerceptionParams {
  struct ConvLayer {
    Tensor kernels;  // [C_out, C_in, k, k]
    Tensor bias;     // [C_out]
  };
  Architecture arch;
  std::vector<ConvLayer> conv;
  Tensor fc_weight;  // [M, flat_features]
  Tensor fc_bias;    // [M]
  std::uint64_t init_seed = 0;

  double squared_norm() const;
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  std::vector<std::string> tensor_names() const;
};

// Xavier-uniform initialization from the seeded generator; biases start at zero.
PerceptionParams init_params(const Architecture& arch, std::uint64_t seed);

// Gradients aligned one-to-one with PerceptionParams entries.
struct LayerGrad {
  std::vector<PerceptionParams::ConvLayer> conv;
  Tensor fc_weight;
  Tensor fc_bias;

  static LayerGrad zeros_like(const PerceptionParams& p);
  void accumulate(const LayerGrad& other, double scale);
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
};

struct ForwardRecord {
  std::vector<FeatureMap> features;  // the exact FC-stage inputs, channel order
  Eigen::VectorXd output;            // f_nn, linear (no squashing)

  struct BlockCache {
    Tensor input;
    Tensor preact;
    nn::PoolResult pool;  // only meaningful when the block pools
  };
  std::vector<BlockCache> blocks;
  Eigen::VectorXd fc_input;
  bool has_caches = false;
};

ForwardRecord forward(const PerceptionParams& params, const Tensor& image);

// Gradients of a scalar objective w.r.t. every parameter, given its gradient
// at the FC output. Requires the record's cached activations.
LayerGrad backprop(const PerceptionParams& params, const ForwardRecord& record,
                   const Eigen::VectorXd& grad_output);

// Forward pass with feature map `channel` zeroed before the FC stage.
Eigen::VectorXd ablate_feature_map(const PerceptionParams& params, const Tensor& image, int channel);

double accuracy(const PerceptionParams& params, const std::vector<Tensor>& images,
                const std::vector<int>& labels);

Eigen::VectorXd one_hot(int label, Eigen::Index num_classes);

// Deterministic epoch-shuffled minibatch scheduler shared by the baseline and
// game trainers (identical RNG usage keeps their trajectories comparable).
class BatchSampler {
 public:
  BatchSampler(int count, int batch_size, Rng& rng);
  std::vector<int> next();

 private:
  std::vector<int> order_;
  std::size_t pos_ = 0;
  int batch_size_;
  Rng* rng_;
};

// One minibatch SGD step on loss (1/B) sum_s 1/2|f - y|^2-style objectives:
// grad = alpha*w + (1/B) sum_s backprop(upstream_s). Both trainers funnel
// through here so a collapsed game step is bit-identical to a baseline step.
void apply_sgd_step(PerceptionParams& params, const std::vector<ForwardRecord>& records,
                    const std::vector<Eigen::VectorXd>& upstreams, double mu, double alpha);

struct TrainingDiverged : std::runtime_error {
  explicit TrainingDiverged(const std::string& msg, int at) : std::runtime_error(msg), at_step(at) {}
  int at_step;
};

struct BaselineOptions {
  int epochs = 30;
  int batch_size = 32;
  double mu = 0.01;
  double alpha = 1e-4;
  std::uint64_t seed = 1;
};

struct BaselineResult {
  std::vector<double> epoch_loss;  // mean 1/2|f-y|^2 + (alpha/2)|w|^2 per epoch
};

BaselineResult train_baseline(PerceptionParams& params, const std::vector<Tensor>& images,
                              const std::vector<Eigen::VectorXd>& targets,
                              const BaselineOptions& opts);

}  // namespace dclm
