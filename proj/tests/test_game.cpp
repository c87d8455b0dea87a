#include <doctest.h>

#include <cmath>

#include "dclm/game.hpp"
#include "dclm/rng.hpp"

using dclm::Architecture;
using dclm::FeatureMap;
using dclm::FeaturePredicate;
using dclm::GameOptions;
using dclm::LogicNetwork;
using dclm::PerceptionParams;
using dclm::Rng;
using dclm::Tensor;

namespace {

Architecture tiny_arch() {
  Architecture arch;
  arch.id = "test-tiny";
  arch.blocks = {{2, 3, true}};
  arch.input_h = 6;
  arch.input_w = 6;
  arch.num_classes = 2;
  return arch;
}

Tensor random_image(Rng& rng, Eigen::Index h = 6, Eigen::Index w = 6) {
  Tensor t({1, h, w});
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] = rng.next_double();
  return t;
}

FeaturePredicate tally_predicate(int id, int n_true, int n_false) {
  FeaturePredicate p;
  p.id = id;
  Eigen::ArrayXXd v = Eigen::ArrayXXd::Zero(2, 2);
  v(id % 2, (id / 2) % 2) = 1.0;
  p.template_map = FeatureMap(v, id);
  p.template_dist = dclm::normalize_feature_map(p.template_map, 1e-9);
  for (int i = 0; i < n_true + n_false; ++i) {
    p.groundings.push_back(p.template_map);
    p.grounding_truth.push_back(i < n_true ? 1 : 0);
  }
  p.true_count = n_true;
  return p;
}

}  // namespace

TEST_CASE("game potentials") {
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 0.0;
  SUBCASE("phi_r hand values") {
    CHECK(dclm::phi_r(a, a) == 0.0);
    CHECK(dclm::phi_r(a, b) == -0.5);
    Eigen::VectorXd two = 2.0 * a;
    CHECK(dclm::phi_r(two, b) == 4.0 * dclm::phi_r(a, b));
    CHECK_THROWS_AS(dclm::phi_r(a, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  }
  SUBCASE("phi_d_game hand values") {
    Eigen::VectorXd c(2);
    c << 0.7, 0.7;  // constant residual vanishes
    CHECK(dclm::phi_d_game(c, Eigen::VectorXd::Zero(2)) == 0.0);
    Eigen::VectorXd r(2), z(2);
    r << 1.0, -1.0;
    z << 0.0, 0.0;
    CHECK(dclm::phi_d_game(r, z) == 1.0);
    CHECK_THROWS_AS(dclm::phi_d_game(a, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  }
  SUBCASE("phi_d_game ignores constant shifts of y_m") {
    Eigen::VectorXd y(4), f(4);
    y << 0.25, 0.5, 0.75, 1.0;  // dyadic values keep the arithmetic exact
    f << 0.0, 0.25, 0.5, 0.5;
    const double base = dclm::phi_d_game(y, f);
    CHECK(dclm::phi_d_game(y + Eigen::VectorXd::Constant(4, 1.0), f) == base);
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd yy(4), ff(4);
      for (int i = 0; i < 4; ++i) {
        yy[i] = rng.uniform(-1, 1);
        ff[i] = rng.uniform(-1, 1);
      }
      const double c0 = rng.uniform(-2, 2);
      CHECK(dclm::phi_d_game(yy + Eigen::VectorXd::Constant(4, c0), ff) ==
            doctest::Approx(dclm::phi_d_game(yy, ff)).epsilon(1e-12));
    }
  }
}

TEST_CASE("lambda gradient") {
  SUBCASE("zero prior and zero potential give zero") {
    LogicNetwork net;
    net.ensure_classes(1);
    net.predicates.push_back(tally_predicate(0, 1, 0));
    net.add_clause({0}, 0, {1.0}, 0.0);
    Eigen::VectorXd y(1);
    y << 0.0;  // feature-true pattern: blend(1,1)=0, decision 0 -> phi = 0
    const Eigen::VectorXd g = dclm::grad_lambda(net, {y}, 0.0);
    CHECK(g[0] == 0.0);
  }
  SUBCASE("hand case beta=0.1, lambda=2, phi=0.5") {
    LogicNetwork net;
    net.ensure_classes(1);
    net.predicates.push_back(tally_predicate(0, 1, 0));
    net.add_clause({0}, 0, {1.0}, 0.0);
    net.lambda[0] = 2.0;
    Eigen::VectorXd y(1);
    y << 0.5;  // phi = min(1, 0 + 0.5) = 0.5
    const Eigen::VectorXd g = dclm::grad_lambda(net, {y}, 0.1);
    CHECK(g[0] == doctest::Approx(-0.3));
  }
}

namespace {

// Shared fixture for the finite-difference checks: a tiny CNN, a small
// hand-grounded net, and a 2-image batch with y_m solved once.
struct FdInstance {
  PerceptionParams params;
  LogicNetwork net;
  std::vector<Tensor> images;
  std::vector<Eigen::VectorXd> targets;
  std::vector<Eigen::VectorXd> y_m;
};

FdInstance make_fd_instance(std::uint64_t seed) {
  FdInstance inst;
  inst.params = dclm::init_params(tiny_arch(), seed);
  Rng rng(seed + 1000);
  for (int i = 0; i < 2; ++i) {
    inst.images.push_back(random_image(rng));
    inst.targets.push_back(dclm::one_hot(i % 2, 2));
  }
  inst.net.ensure_classes(2);
  const int n_preds = 2;
  for (int p = 0; p < n_preds; ++p) {
    inst.net.predicates.push_back(
        tally_predicate(p, 1 + static_cast<int>(rng.below(3)), static_cast<int>(rng.below(3))));
  }
  for (int p = 0; p < n_preds; ++p) {
    for (int c = 0; c < 2; ++c) {
      inst.net.add_clause({p}, c, {rng.uniform(-0.9, 0.9)}, rng.uniform(-0.9, 0.9));
    }
  }
  inst.net.lambda << rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5);
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd y(2);
    y << rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95);
    inst.y_m.push_back(y);
  }
  return inst;
}

}  // namespace

TEST_CASE("gradients match central finite differences of the joint objective") {
  const double alpha = 1e-3, beta = 1e-2;
  int tested = 0;
  for (std::uint64_t seed = 0; tested < 3 && seed < 24; ++seed) {
    FdInstance inst = make_fd_instance(seed);

    // Keep away from ReLU/pool kinks and from the clause min/clip kinks.
    bool kinky = false;
    for (const auto& image : inst.images) {
      const auto rec = dclm::forward(inst.params, image);
      for (const auto& cache : rec.blocks) {
        if (cache.preact.data.abs().minCoeff() < 1e-5) kinky = true;
      }
    }
    for (const auto& y : inst.y_m) {
      for (const auto& clause : inst.net.clauses) {
        const auto ev = clause_eigenvalue(inst.net, clause, inst.net.gamma, y);
        if (std::abs(ev.phi) < 1e-5 || std::abs(ev.phi - 1.0) < 1e-5) kinky = true;
      }
    }
    if (kinky) continue;
    ++tested;

    auto objective = [&]() {
      return dclm::joint_objective(inst.params, inst.net, inst.images, inst.targets, inst.y_m,
                                   alpha, beta);
    };

    SUBCASE("") {}  // keep doctest happy when looping

    // lambda gradient
    {
      const Eigen::VectorXd analytic = dclm::grad_lambda(inst.net, inst.y_m, beta);
      const double h = 1e-6;
      for (int c = 0; c < 2; ++c) {
        const double saved = inst.net.lambda[c];
        inst.net.lambda[c] = saved + h;
        const double up = objective();
        inst.net.lambda[c] = saved - h;
        const double down = objective();
        inst.net.lambda[c] = saved;
        const double fd = (up - down) / (2.0 * h);
        CHECK(std::abs(fd - analytic[c]) <= 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }

    // w gradient
    {
      std::vector<dclm::ForwardRecord> records;
      for (const auto& image : inst.images) records.push_back(dclm::forward(inst.params, image));
      const dclm::LayerGrad analytic =
          dclm::grad_w(inst.params, records, inst.targets, inst.y_m, alpha);
      const auto grad_tensors = static_cast<const dclm::LayerGrad&>(analytic).tensors();
      auto param_tensors = inst.params.tensors();
      const double h = 1e-5;
      for (std::size_t t = 0; t < param_tensors.size(); ++t) {
        for (Eigen::Index i = 0; i < param_tensors[t]->size(); i += 5) {
          const double saved = param_tensors[t]->data[i];
          param_tensors[t]->data[i] = saved + h;
          const double up = objective();
          param_tensors[t]->data[i] = saved - h;
          const double down = objective();
          param_tensors[t]->data[i] = saved;
          const double fd = (up - down) / (2.0 * h);
          const double an = grad_tensors[t]->data[i];
          const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
          CHECK(std::abs(fd - an) / denom <= 1e-4);
        }
      }
    }
  }
  CHECK(tested >= 3);
}

TEST_CASE("collapsed game reproduces baseline training bit-exactly") {
  const Architecture arch = tiny_arch();
  Rng rng(7);
  std::vector<Tensor> images;
  std::vector<Eigen::VectorXd> targets;
  for (int i = 0; i < 8; ++i) {
    images.push_back(random_image(rng));
    targets.push_back(dclm::one_hot(i % 2, 2));
  }

  PerceptionParams baseline = dclm::init_params(arch, 42);
  dclm::BaselineOptions bopts;
  bopts.epochs = 3;
  bopts.batch_size = 4;
  bopts.mu = 0.02;
  bopts.alpha = 1e-3;
  bopts.seed = 11;
  dclm::train_baseline(baseline, images, targets, bopts);

  PerceptionParams gamed = dclm::init_params(arch, 42);
  LogicNetwork net;
  GameOptions gopts;
  gopts.extract_logic = false;  // lambda stays frozen at zero, no clauses form
  gopts.max_iters = 3 * 2;      // same number of SGD steps as 3 epochs of 8/4
  gopts.batch_size = 4;
  gopts.mu = 0.02;
  gopts.alpha = 1e-3;
  gopts.seed = 11;
  gopts.stop_tol = 0.0;  // early stop disabled
  const auto trace = dclm::game_train(gamed, net, images, targets, gopts);
  CHECK_FALSE(trace.diverged);
  CHECK(trace.records.size() == 6);
  CHECK(net.empty());

  const auto ta = baseline.tensors();
  const auto tb = gamed.tensors();
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK((ta[i]->data == tb[i]->data).all());
  }
}

TEST_CASE("game training with extraction runs and stays finite") {
  const Architecture arch = tiny_arch();
  Rng rng(19);
  std::vector<Tensor> images;
  std::vector<Eigen::VectorXd> targets;
  for (int i = 0; i < 12; ++i) {
    images.push_back(random_image(rng));
    targets.push_back(dclm::one_hot(i % 2, 2));
  }
  PerceptionParams params = dclm::init_params(arch, 5);
  LogicNetwork net;
  net.eps_match = 0.6;
  GameOptions gopts;
  gopts.max_iters = 10;
  gopts.batch_size = 4;
  gopts.inner.max_iters = 10;
  gopts.stop_tol = 0.0;
  const auto trace = dclm::game_train(params, net, images, targets, gopts);
  CHECK_FALSE(trace.diverged);
  CHECK(trace.records.size() == 10);
  CHECK(net.predicate_count() >= 1);
  CHECK(net.group_count() == 2);
  for (const auto& r : trace.records) {
    CHECK(std::isfinite(r.objective));
    CHECK(r.n_predicates >= 1);
  }
  CHECK(net.lambda.allFinite());
  // group counts never shrink
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    CHECK(trace.records[i].n_predicates >= trace.records[i - 1].n_predicates);
  }
}

TEST_CASE("interpretation measure") {
  const Architecture arch = tiny_arch();
  SUBCASE("identical outputs mean zero discrepancy") {
    PerceptionParams params = dclm::init_params(arch, 3);
    for (Tensor* t : params.tensors()) t->data.setZero();  // f_nn = 0 = clamp(f_nn)
    LogicNetwork net;  // empty: y = clamp(f)
    Rng rng(4);
    std::vector<Tensor> images{random_image(rng), random_image(rng)};
    CHECK(dclm::interpretation_measure(params, net, images, {}) == 0.0);
  }
  SUBCASE("empty test set is rejected") {
    PerceptionParams params = dclm::init_params(arch, 3);
    LogicNetwork net;
    CHECK_THROWS_AS(dclm::interpretation_measure(params, net, {}, {}), std::invalid_argument);
  }
}
