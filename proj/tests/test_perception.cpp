#include <doctest.h>

#include "dclm/perception.hpp"
#include "dclm/rng.hpp"

using dclm::Architecture;
using dclm::ForwardRecord;
using dclm::PerceptionParams;
using dclm::Rng;
using dclm::Tensor;

namespace {

Tensor random_image(Rng& rng, Eigen::Index h, Eigen::Index w) {
  Tensor t({1, h, w});
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] = rng.next_double();
  return t;
}

Architecture tiny_arch() {
  Architecture arch;
  arch.id = "test-tiny";
  arch.blocks = {{2, 3, true}, {4, 3, false}};
  arch.input_h = 8;
  arch.input_w = 8;
  arch.num_classes = 3;
  return arch;
}

}  // namespace

TEST_CASE("preset architectures end in 32 feature maps") {
  for (const char* id : {"cnns-1", "cnns-2", "cnns-3"}) {
    const Architecture arch = Architecture::preset(id);
    CHECK(arch.feature_channels() == 32);
    const auto [h, w] = arch.feature_grid();
    CHECK(h >= 2);
    CHECK(w >= 2);
  }
  CHECK(Architecture::preset("cnns-1").blocks.size() == 2);
  CHECK(Architecture::preset("cnns-2").blocks.size() == 3);
  CHECK(Architecture::preset("cnns-3").blocks.size() == 4);
  CHECK(Architecture::preset("cnns-1").feature_grid() ==
        std::pair<Eigen::Index, Eigen::Index>{4, 4});
  CHECK_THROWS_AS(Architecture::preset("cnns-9"), std::invalid_argument);
}

TEST_CASE("forward pass") {
  const Architecture arch = tiny_arch();
  SUBCASE("zero image with zero biases: feature maps zero, output equals FC bias") {
    PerceptionParams params = dclm::init_params(arch, 3);
    Eigen::VectorXd fc_bias(3);
    fc_bias << 0.4, -0.2, 1.0;
    params.fc_bias.data = fc_bias.array();
    const Tensor zero({1, 8, 8});
    const ForwardRecord rec = dclm::forward(params, zero);
    for (const auto& fm : rec.features) CHECK(fm.empty());
    CHECK((rec.output - fc_bias).norm() == 0.0);
  }
  SUBCASE("same image twice gives an identical record") {
    const PerceptionParams params = dclm::init_params(arch, 4);
    Rng rng(17);
    const Tensor image = random_image(rng, 8, 8);
    const ForwardRecord a = dclm::forward(params, image);
    const ForwardRecord b = dclm::forward(params, image);
    CHECK((a.output - b.output).norm() == 0.0);
    for (std::size_t c = 0; c < a.features.size(); ++c) {
      CHECK((a.features[c].values == b.features[c].values).all());
    }
  }
  SUBCASE("wrong image shape is rejected") {
    const PerceptionParams params = dclm::init_params(arch, 4);
    CHECK_THROWS_AS(dclm::forward(params, Tensor({1, 7, 8})), std::invalid_argument);
  }
  SUBCASE("stage separation: FC over the feature maps reproduces the output") {
    const PerceptionParams params = dclm::init_params(arch, 5);
    Rng rng(18);
    const Tensor image = random_image(rng, 8, 8);
    const ForwardRecord rec = dclm::forward(params, image);
    Eigen::VectorXd flat(rec.fc_input.size());
    Eigen::Index pos = 0;
    for (const auto& fm : rec.features) {
      for (Eigen::Index i = 0; i < fm.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < fm.values.cols(); ++j) flat[pos++] = fm.values(i, j);
      }
    }
    CHECK((flat - rec.fc_input).norm() == 0.0);
    Eigen::Map<const Eigen::VectorXd> fcb(params.fc_bias.data.data(), params.fc_bias.size());
    const Eigen::VectorXd again = dclm::nn::dense(flat, params.fc_weight, fcb);
    CHECK((again - rec.output).norm() == 0.0);
  }
}

TEST_CASE("feature map ablation") {
  const Architecture arch = tiny_arch();
  Rng rng(21);
  SUBCASE("ablating an empty map changes nothing") {
    const PerceptionParams params = dclm::init_params(arch, 6);
    const Tensor zero({1, 8, 8});  // all maps empty on the zero image
    const ForwardRecord rec = dclm::forward(params, zero);
    for (int c = 0; c < arch.feature_channels(); ++c) {
      CHECK((dclm::ablate_feature_map(params, zero, c) - rec.output).norm() == 0.0);
    }
  }
  SUBCASE("zero FC weights make ablation invisible") {
    PerceptionParams params = dclm::init_params(arch, 7);
    params.fc_weight.data.setZero();
    const Tensor image = random_image(rng, 8, 8);
    const ForwardRecord rec = dclm::forward(params, image);
    CHECK((dclm::ablate_feature_map(params, image, 1) - rec.output).norm() == 0.0);
  }
  SUBCASE("a non-empty map on a trained net moves at least one output") {
    PerceptionParams params = dclm::init_params(arch, 8);
    std::vector<Tensor> images{random_image(rng, 8, 8)};
    std::vector<Eigen::VectorXd> targets{dclm::one_hot(1, 3)};
    dclm::BaselineOptions opts;
    opts.epochs = 60;
    opts.batch_size = 1;
    opts.mu = 0.05;
    opts.alpha = 0.0;
    dclm::train_baseline(params, images, targets, opts);
    const ForwardRecord rec = dclm::forward(params, images[0]);
    bool moved = false;
    for (int c = 0; c < arch.feature_channels() && !moved; ++c) {
      if (rec.features[c].empty()) continue;
      moved = (dclm::ablate_feature_map(params, images[0], c) - rec.output).norm() > 0.0;
    }
    CHECK(moved);
  }
  SUBCASE("channel out of range is rejected") {
    const PerceptionParams params = dclm::init_params(arch, 9);
    const Tensor image = random_image(rng, 8, 8);
    CHECK_THROWS_AS(dclm::ablate_feature_map(params, image, -1), std::invalid_argument);
    CHECK_THROWS_AS(dclm::ablate_feature_map(params, image, arch.feature_channels()),
                    std::invalid_argument);
  }
}

TEST_CASE("baseline training") {
  const Architecture arch = tiny_arch();
  Rng rng(31);
  SUBCASE("a single sample can be overfit") {
    PerceptionParams params = dclm::init_params(arch, 10);
    std::vector<Tensor> images{random_image(rng, 8, 8)};
    std::vector<Eigen::VectorXd> targets{dclm::one_hot(2, 3)};
    dclm::BaselineOptions opts;
    opts.epochs = 300;
    opts.batch_size = 1;
    opts.mu = 0.05;
    opts.alpha = 0.0;
    const auto result = dclm::train_baseline(params, images, targets, opts);
    CHECK(result.epoch_loss.back() < 1e-3);
  }
  SUBCASE("a dominating prior shrinks the weights monotonically") {
    PerceptionParams params = dclm::init_params(arch, 11);
    std::vector<Tensor> images{random_image(rng, 8, 8)};
    std::vector<Eigen::VectorXd> targets{dclm::one_hot(0, 3)};
    dclm::BaselineOptions opts;
    opts.epochs = 1;
    opts.batch_size = 1;
    opts.mu = 1e-7;  // tiny steps, the alpha term dominates
    opts.alpha = 1e6;
    double prev = params.squared_norm();
    for (int round = 0; round < 5; ++round) {
      dclm::train_baseline(params, images, targets, opts);
      const double cur = params.squared_norm();
      CHECK(cur < prev);
      prev = cur;
    }
  }
  SUBCASE("divergence aborts with the epoch index") {
    PerceptionParams params = dclm::init_params(arch, 12);
    std::vector<Tensor> images{random_image(rng, 8, 8)};
    std::vector<Eigen::VectorXd> targets{dclm::one_hot(0, 3)};
    dclm::BaselineOptions opts;
    opts.epochs = 50;
    opts.batch_size = 1;
    opts.mu = 1e6;  // guaranteed blow-up
    opts.alpha = 0.0;
    CHECK_THROWS_AS(dclm::train_baseline(params, images, targets, opts), dclm::TrainingDiverged);
  }
  SUBCASE("empty training set is rejected") {
    PerceptionParams params = dclm::init_params(arch, 13);
    CHECK_THROWS_AS(dclm::train_baseline(params, {}, {}, {}), std::invalid_argument);
  }
}

TEST_CASE("accuracy") {
  const Architecture arch = tiny_arch();
  PerceptionParams params = dclm::init_params(arch, 14);
  Rng rng(41);
  std::vector<Tensor> images;
  for (int i = 0; i < 4; ++i) images.push_back(random_image(rng, 8, 8));

  SUBCASE("all-correct and adversarially permuted labels") {
    std::vector<int> labels;
    for (const auto& image : images) {
      const Eigen::VectorXd out = dclm::forward(params, image).output;
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < out.size(); ++j) {
        if (out[j] > out[best]) best = j;
      }
      labels.push_back(static_cast<int>(best));
    }
    CHECK(dclm::accuracy(params, images, labels) == 1.0);
    std::vector<int> wrong;
    for (int l : labels) wrong.push_back((l + 1) % 3);
    CHECK(dclm::accuracy(params, images, wrong) == 0.0);
  }
  SUBCASE("ties break toward the lowest class index") {
    PerceptionParams flat = dclm::init_params(arch, 15);
    for (Tensor* t : flat.tensors()) t->data.setZero();  // every output is 0
    CHECK(dclm::accuracy(flat, images, {0, 0, 0, 0}) == 1.0);
    CHECK(dclm::accuracy(flat, images, {1, 1, 1, 1}) == 0.0);
  }
  SUBCASE("empty evaluation set is rejected") {
    CHECK_THROWS_AS(dclm::accuracy(params, {}, {}), std::invalid_argument);
  }
}
