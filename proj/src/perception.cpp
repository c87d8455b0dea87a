#include "dclm/perception.hpp"

#include <cmath>

namespace dclm {

Architecture Architecture::preset(const std::string& id) {
  Architecture a;
  a.id = id;
  if (id == "cnns-1") {
    a.blocks = {{16, 5, true}, {32, 5, true}};
  } else if (id == "cnns-2") {
    a.blocks = {{16, 5, true}, {24, 5, true}, {32, 3, false}};
  } else if (id == "cnns-3") {
    a.blocks = {{8, 5, true}, {16, 5, true}, {24, 2, false}, {32, 2, false}};
  } else {
    throw std::invalid_argument("unknown architecture id: " + id);
  }
  return a;
}

std::pair<Eigen::Index, Eigen::Index> Architecture::feature_grid() const {
  Eigen::Index h = input_h, w = input_w;
  for (const auto& b : blocks) {
    h = h - b.kernel + 1;
    w = w - b.kernel + 1;
    if (h <= 0 || w <= 0) throw std::invalid_argument("architecture degenerates spatially");
    if (b.pool) {
      if (h % 2 || w % 2) throw std::invalid_argument("architecture pools an odd extent");
      h /= 2;
      w /= 2;
    }
  }
  return {h, w};
}

double PerceptionParams::squared_norm() const {
  double s = 0.0;
  for (const Tensor* t : tensors()) s += t->data.square().sum();
  return s;
}

std::vector<Tensor*> PerceptionParams::tensors() {
  std::vector<Tensor*> out;
  for (auto& layer : conv) {
    out.push_back(&layer.kernels);
    out.push_back(&layer.bias);
  }
  out.push_back(&fc_weight);
  out.push_back(&fc_bias);
  return out;
}

std::vector<const Tensor*> PerceptionParams::tensors() const {
  std::vector<const Tensor*> out;
  for (const auto& layer : conv) {
    out.push_back(&layer.kernels);
    out.push_back(&layer.bias);
  }
  out.push_back(&fc_weight);
  out.push_back(&fc_bias);
  return out;
}

std::vector<std::string> PerceptionParams::tensor_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < conv.size(); ++i) {
    names.push_back("conv" + std::to_string(i) + ".kernels");
    names.push_back("conv" + std::to_string(i) + ".bias");
  }
  names.push_back("fc.weight");
  names.push_back("fc.bias");
  return names;
}

PerceptionParams init_params(const Architecture& arch, std::uint64_t seed) {
  PerceptionParams p;
  p.arch = arch;
  p.init_seed = seed;
  Rng rng(seed);
  Eigen::Index c_in = arch.in_channels;
  for (const auto& spec : arch.blocks) {
    PerceptionParams::ConvLayer layer;
    layer.kernels = Tensor({spec.out_channels, c_in, spec.kernel, spec.kernel});
    layer.bias = Tensor({spec.out_channels});
    const double fan_in = static_cast<double>(c_in * spec.kernel * spec.kernel);
    const double fan_out = static_cast<double>(spec.out_channels * spec.kernel * spec.kernel);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index i = 0; i < layer.kernels.size(); ++i) {
      layer.kernels.data[i] = rng.uniform(-limit, limit);
    }
    p.conv.push_back(std::move(layer));
    c_in = spec.out_channels;
  }
  const Eigen::Index flat = arch.flat_features();
  p.fc_weight = Tensor({arch.num_classes, flat});
  p.fc_bias = Tensor({arch.num_classes});
  const double limit = std::sqrt(6.0 / static_cast<double>(flat + arch.num_classes));
  for (Eigen::Index i = 0; i < p.fc_weight.size(); ++i) {
    p.fc_weight.data[i] = rng.uniform(-limit, limit);
  }
  return p;
}

LayerGrad LayerGrad::zeros_like(const PerceptionParams& p) {
  LayerGrad g;
  for (const auto& layer : p.conv) {
    g.conv.push_back({Tensor(layer.kernels.shape), Tensor(layer.bias.shape)});
  }
  g.fc_weight = Tensor(p.fc_weight.shape);
  g.fc_bias = Tensor(p.fc_bias.shape);
  return g;
}

void LayerGrad::accumulate(const LayerGrad& other, double scale) {
  for (std::size_t i = 0; i < conv.size(); ++i) {
    conv[i].kernels.data += scale * other.conv[i].kernels.data;
    conv[i].bias.data += scale * other.conv[i].bias.data;
  }
  fc_weight.data += scale * other.fc_weight.data;
  fc_bias.data += scale * other.fc_bias.data;
}

std::vector<Tensor*> LayerGrad::tensors() {
  std::vector<Tensor*> out;
  for (auto& layer : conv) {
    out.push_back(&layer.kernels);
    out.push_back(&layer.bias);
  }
  out.push_back(&fc_weight);
  out.push_back(&fc_bias);
  return out;
}

std::vector<const Tensor*> LayerGrad::tensors() const {
  std::vector<const Tensor*> out;
  for (const auto& layer : conv) {
    out.push_back(&layer.kernels);
    out.push_back(&layer.bias);
  }
  out.push_back(&fc_weight);
  out.push_back(&fc_bias);
  return out;
}

ForwardRecord forward(const PerceptionParams& params, const Tensor& image) {
  const auto& arch = params.arch;
  require_shape(image, {arch.in_channels, arch.input_h, arch.input_w}, "forward: image");

  ForwardRecord rec;
  Tensor cur = image;
  for (std::size_t b = 0; b < params.conv.size(); ++b) {
    ForwardRecord::BlockCache cache;
    cache.input = cur;
    Eigen::Map<const Eigen::VectorXd> bias(params.conv[b].bias.data.data(),
                                           params.conv[b].bias.size());
    cache.preact = nn::conv2d(cur, params.conv[b].kernels, bias);
    Tensor act = cache.preact;
    nn::relu_inplace(act);
    if (arch.blocks[b].pool) {
      cache.pool = nn::max_pool2x2(act);
      cur = cache.pool.output;
    } else {
      cur = std::move(act);
    }
    rec.blocks.push_back(std::move(cache));
  }

  const auto [h, w] = arch.feature_grid();
  rec.features.reserve(arch.feature_channels());
  for (Eigen::Index c = 0; c < arch.feature_channels(); ++c) {
    Eigen::ArrayXXd grid(h, w);
    for (Eigen::Index i = 0; i < h; ++i) {
      for (Eigen::Index j = 0; j < w; ++j) grid(i, j) = cur.at(c, i, j);
    }
    rec.features.emplace_back(std::move(grid), static_cast<int>(c));
  }

  rec.fc_input = Eigen::Map<const Eigen::VectorXd>(cur.data.data(), cur.size());
  Eigen::Map<const Eigen::VectorXd> fcb(params.fc_bias.data.data(), params.fc_bias.size());
  rec.output = nn::dense(rec.fc_input, params.fc_weight, fcb);
  rec.has_caches = true;
  return rec;
}

LayerGrad backprop(const PerceptionParams& params, const ForwardRecord& record,
                   const Eigen::VectorXd& grad_output) {
  if (!record.has_caches) {
    throw std::logic_error("backprop called before a cached forward pass for this input");
  }
  LayerGrad g = LayerGrad::zeros_like(params);

  const auto d_fc = nn::dense_backward(record.fc_input, params.fc_weight, grad_output);
  g.fc_weight = d_fc.weights;
  g.fc_bias.data = d_fc.bias;

  const auto [h, w] = params.arch.feature_grid();
  Tensor upstream({params.arch.feature_channels(), h, w});
  upstream.data = d_fc.input.array();

  for (int b = static_cast<int>(params.conv.size()) - 1; b >= 0; --b) {
    const auto& cache = record.blocks[b];
    Tensor d_act;
    if (params.arch.blocks[b].pool) {
      d_act = nn::max_pool2x2_backward(cache.pool, cache.preact.shape, upstream);
    } else {
      d_act = std::move(upstream);
    }
    const Tensor d_preact = nn::relu_backward(cache.preact, d_act);
    auto conv_g = nn::conv2d_backward(cache.input, params.conv[b].kernels, d_preact);
    g.conv[b].kernels = std::move(conv_g.kernels);
    g.conv[b].bias.data = conv_g.bias;
    upstream = std::move(conv_g.input);
  }
  return g;
}

Eigen::VectorXd ablate_feature_map(const PerceptionParams& params, const Tensor& image, int channel) {
  if (channel < 0 || channel >= params.arch.feature_channels()) {
    throw std::invalid_argument("ablate_feature_map: channel " + std::to_string(channel) +
                                " out of range [0," +
                                std::to_string(params.arch.feature_channels()) + ")");
  }
  ForwardRecord rec = forward(params, image);
  const auto [h, w] = params.arch.feature_grid();
  Eigen::VectorXd masked = rec.fc_input;
  masked.segment(static_cast<Eigen::Index>(channel) * h * w, h * w).setZero();
  Eigen::Map<const Eigen::VectorXd> fcb(params.fc_bias.data.data(), params.fc_bias.size());
  return nn::dense(masked, params.fc_weight, fcb);
}

double accuracy(const PerceptionParams& params, const std::vector<Tensor>& images,
                const std::vector<int>& labels) {
  if (images.empty() || images.size() != labels.size()) {
    throw std::invalid_argument("accuracy: evaluation set empty or misaligned");
  }
  int correct = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Eigen::VectorXd out = forward(params, images[i]).output;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < out.size(); ++j) {
      if (out[j] > out[best]) best = j;  // ties stay with the lowest index
    }
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(images.size());
}

Eigen::VectorXd one_hot(int label, Eigen::Index num_classes) {
  if (label < 0 || label >= num_classes) {
    throw std::invalid_argument("one_hot: label " + std::to_string(label) + " out of range");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(num_classes);
  v[label] = 1.0;
  return v;
}

BatchSampler::BatchSampler(int count, int batch_size, Rng& rng)
    : batch_size_(batch_size), rng_(&rng) {
  order_.resize(count);
  for (int i = 0; i < count; ++i) order_[i] = i;
  rng_->shuffle(order_);
}

std::vector<int> BatchSampler::next() {
  if (pos_ >= order_.size()) {
    rng_->shuffle(order_);
    pos_ = 0;
  }
  const std::size_t end = std::min(pos_ + static_cast<std::size_t>(batch_size_), order_.size());
  std::vector<int> batch(order_.begin() + pos_, order_.begin() + end);
  pos_ = end;
  return batch;
}

void apply_sgd_step(PerceptionParams& params, const std::vector<ForwardRecord>& records,
                    const std::vector<Eigen::VectorXd>& upstreams, double mu, double alpha) {
  LayerGrad total = LayerGrad::zeros_like(params);
  const double inv_b = 1.0 / static_cast<double>(records.size());
  for (std::size_t s = 0; s < records.size(); ++s) {
    const LayerGrad g = backprop(params, records[s], upstreams[s]);
    total.accumulate(g, inv_b);
  }
  // Gaussian prior on the weights.
  auto param_tensors = params.tensors();
  auto grad_tensors = total.tensors();
  for (std::size_t i = 0; i < param_tensors.size(); ++i) {
    grad_tensors[i]->data += alpha * param_tensors[i]->data;
  }
  nn::sgd_step(param_tensors, static_cast<const LayerGrad&>(total).tensors(),
               params.tensor_names(), mu);
}

BaselineResult train_baseline(PerceptionParams& params, const std::vector<Tensor>& images,
                              const std::vector<Eigen::VectorXd>& targets,
                              const BaselineOptions& opts) {
  if (images.empty() || images.size() != targets.size()) {
    throw std::invalid_argument("train_baseline: empty or misaligned training set");
  }
  Rng rng(opts.seed);
  BatchSampler sampler(static_cast<int>(images.size()), opts.batch_size, rng);
  const int steps_per_epoch =
      (static_cast<int>(images.size()) + opts.batch_size - 1) / opts.batch_size;

  BaselineResult result;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    double epoch_data_loss = 0.0;
    long seen = 0;
    for (int step = 0; step < steps_per_epoch; ++step) {
      const std::vector<int> batch = sampler.next();
      std::vector<ForwardRecord> records;
      std::vector<Eigen::VectorXd> upstreams;
      records.reserve(batch.size());
      upstreams.reserve(batch.size());
      for (int idx : batch) {
        records.push_back(forward(params, images[idx]));
        const Eigen::VectorXd residual = records.back().output - targets[idx];
        epoch_data_loss += 0.5 * residual.squaredNorm();
        upstreams.push_back(residual);
      }
      seen += static_cast<long>(batch.size());
      apply_sgd_step(params, records, upstreams, opts.mu, opts.alpha);
    }
    const double loss =
        epoch_data_loss / static_cast<double>(seen) + 0.5 * opts.alpha * params.squared_norm();
    if (!std::isfinite(loss)) {
      throw TrainingDiverged("train_baseline: loss diverged at epoch " + std::to_string(epoch),
                             epoch);
    }
    result.epoch_loss.push_back(loss);
  }
  return result;
}

}  // namespace dclm
