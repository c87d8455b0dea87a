#include "dclm/game.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dclm {

double phi_r(const Eigen::VectorXd& y_t, const Eigen::VectorXd& f_nn) {
  if (y_t.size() != f_nn.size()) {
    throw std::invalid_argument("phi_r: length mismatch: " + std::to_string(y_t.size()) + " vs " +
                                std::to_string(f_nn.size()));
  }
  return -0.5 * (y_t - f_nn).squaredNorm();
}

double phi_d_game(const Eigen::VectorXd& y_m, const Eigen::VectorXd& f_nn) {
  if (y_m.size() != f_nn.size()) {
    throw std::invalid_argument("phi_d_game: length mismatch: " + std::to_string(y_m.size()) +
                                " vs " + std::to_string(f_nn.size()));
  }
  if (y_m.size() == 0) {
    throw std::invalid_argument("phi_d_game: empty vectors");
  }
  const Eigen::VectorXd r = y_m - f_nn;
  const double mean = r.mean();
  return 0.5 * (r.array() - mean).square().sum();
}

double joint_objective(const PerceptionParams& params, const LogicNetwork& net,
                       const std::vector<Tensor>& images,
                       const std::vector<Eigen::VectorXd>& targets,
                       const std::vector<Eigen::VectorXd>& y_m, double alpha, double beta) {
  const bool logic_active = !y_m.empty() && !net.empty();
  double acc = 0.0;
  for (std::size_t s = 0; s < images.size(); ++s) {
    const Eigen::VectorXd f = forward(params, images[s]).output;
    acc += -phi_r(targets[s], f);
    if (logic_active) {
      acc += phi_d_game(y_m[s], f);
      acc -= net.lambda.dot(group_potentials(net, net.gamma, y_m[s]));
    }
  }
  acc /= static_cast<double>(images.size());
  acc += 0.5 * alpha * params.squared_norm();
  if (net.lambda.size() > 0) acc += 0.5 * beta * net.lambda.squaredNorm();
  return acc;
}

Eigen::VectorXd grad_lambda(const LogicNetwork& net, const std::vector<Eigen::VectorXd>& y_m,
                            double beta) {
  Eigen::VectorXd g = beta * net.lambda;
  if (y_m.empty()) return g;
  Eigen::VectorXd mean_phi = Eigen::VectorXd::Zero(net.group_count());
  for (const auto& y : y_m) {
    mean_phi += group_potentials(net, net.gamma, y);
  }
  mean_phi /= static_cast<double>(y_m.size());
  return g - mean_phi;
}

Eigen::VectorXd game_upstream(const Eigen::VectorXd& f_nn, const Eigen::VectorXd& y_t,
                              const Eigen::VectorXd* y_m) {
  Eigen::VectorXd up = f_nn - y_t;  // d(-phi_r)/df
  if (y_m != nullptr) {
    const Eigen::VectorXd r = *y_m - f_nn;
    up -= (r.array() - r.mean()).matrix();  // d(phi_d_game)/df
  }
  return up;
}

LayerGrad grad_w(const PerceptionParams& params, const std::vector<ForwardRecord>& records,
                 const std::vector<Eigen::VectorXd>& targets,
                 const std::vector<Eigen::VectorXd>& y_m, double alpha) {
  LayerGrad total = LayerGrad::zeros_like(params);
  const double inv_b = 1.0 / static_cast<double>(records.size());
  for (std::size_t s = 0; s < records.size(); ++s) {
    const Eigen::VectorXd up =
        game_upstream(records[s].output, targets[s], y_m.empty() ? nullptr : &y_m[s]);
    total.accumulate(backprop(params, records[s], up), inv_b);
  }
  auto grads = total.tensors();
  auto ps = params.tensors();
  for (std::size_t i = 0; i < grads.size(); ++i) grads[i]->data += alpha * ps[i]->data;
  return total;
}

namespace {

struct ProbeEval {
  double objective = 0.0;
  double phi_r_mean = 0.0;
  double phi_d_mean = 0.0;
  double lambda_phi_mean = 0.0;
};

// Objective on a fixed subset: per sample, solve the logic side on a scratch
// gamma copy and evaluate the bracket at the solution. Read-only on the net.
ProbeEval evaluate_on_probe(const PerceptionParams& params, const LogicNetwork& net,
                            const std::vector<Tensor>& images,
                            const std::vector<Eigen::VectorXd>& targets,
                            const std::vector<int>& probe, double alpha, double beta,
                            const SolveOptions& inner) {
  ProbeEval ev;
  for (int idx : probe) {
    const Eigen::VectorXd f = forward(params, images[idx]).output;
    const double pr = phi_r(targets[idx], f);
    ev.phi_r_mean += pr;
    double pd = 0.0, lp = 0.0;
    if (!net.empty()) {
      GammaState scratch = net.gamma;
      const SolveResult sol = optimize_y_gamma(net, f, scratch, inner);
      pd = phi_d_game(sol.y, f);
      lp = net.lambda.dot(group_potentials(net, scratch, sol.y));
    }
    ev.phi_d_mean += pd;
    ev.lambda_phi_mean += lp;
    ev.objective += -pr + pd - lp;
  }
  const double inv = 1.0 / static_cast<double>(probe.size());
  ev.objective *= inv;
  ev.phi_r_mean *= inv;
  ev.phi_d_mean *= inv;
  ev.lambda_phi_mean *= inv;
  ev.objective += 0.5 * alpha * params.squared_norm();
  if (net.lambda.size() > 0) ev.objective += 0.5 * beta * net.lambda.squaredNorm();
  return ev;
}

}  // namespace

GameTrace game_train(PerceptionParams& params, LogicNetwork& net, const std::vector<Tensor>& images,
                     const std::vector<Eigen::VectorXd>& targets, const GameOptions& opts,
                     const std::vector<int>* probe) {
  if (images.empty() || images.size() != targets.size()) {
    throw std::invalid_argument("game_train: empty or misaligned training set");
  }
  GameTrace trace;
  Rng rng(opts.seed);
  BatchSampler sampler(static_cast<int>(images.size()), opts.batch_size, rng);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<int> batch = sampler.next();

    std::vector<ForwardRecord> records;
    std::vector<Eigen::VectorXd> batch_targets;
    records.reserve(batch.size());
    batch_targets.reserve(batch.size());
    for (int idx : batch) {
      records.push_back(forward(params, images[idx]));
      batch_targets.push_back(targets[idx]);
    }

    std::vector<Eigen::VectorXd> y_m;
    Eigen::VectorXd lambda_step;
    if (opts.extract_logic) {
      for (const auto& rec : records) {
        extend_network(net, rec.features, rec.output);
      }
      y_m.reserve(records.size());
      for (const auto& rec : records) {
        // Best response of the logic side; gamma updates are committed.
        y_m.push_back(optimize_y_gamma(net, rec.output, net.gamma, opts.inner).y);
      }
      lambda_step = grad_lambda(net, y_m, opts.beta);
    }

    // Record the pre-update minibatch objective from the cached passes.
    double batch_objective = 0.0, pr_mean = 0.0, pd_mean = 0.0, lp_mean = 0.0;
    for (std::size_t s = 0; s < records.size(); ++s) {
      const double pr = phi_r(batch_targets[s], records[s].output);
      pr_mean += pr;
      double pd = 0.0, lp = 0.0;
      if (!y_m.empty()) {
        pd = phi_d_game(y_m[s], records[s].output);
        lp = net.lambda.dot(group_potentials(net, net.gamma, y_m[s]));
      }
      pd_mean += pd;
      lp_mean += lp;
      batch_objective += -pr + pd - lp;
    }
    const double inv_b = 1.0 / static_cast<double>(records.size());
    batch_objective *= inv_b;
    pr_mean *= inv_b;
    pd_mean *= inv_b;
    lp_mean *= inv_b;
    batch_objective += 0.5 * opts.alpha * params.squared_norm();
    if (net.lambda.size() > 0) batch_objective += 0.5 * opts.beta * net.lambda.squaredNorm();

    // Descend theta = (w, lambda).
    std::vector<Eigen::VectorXd> upstreams;
    upstreams.reserve(records.size());
    for (std::size_t s = 0; s < records.size(); ++s) {
      upstreams.push_back(
          game_upstream(records[s].output, batch_targets[s], y_m.empty() ? nullptr : &y_m[s]));
    }
    try {
      apply_sgd_step(params, records, upstreams, opts.mu, opts.alpha);
    } catch (const std::runtime_error&) {
      trace.diverged = true;
      trace.diverged_at = iter;
      return trace;
    }
    if (opts.extract_logic && lambda_step.size() > 0) {
      net.lambda -= opts.mu * lambda_step;
    }

    GameIterationRecord rec;
    rec.iteration = iter;
    rec.n_predicates = net.predicate_count();
    rec.n_groups = net.empty() ? 0 : net.group_count();
    if (probe != nullptr) {
      const ProbeEval ev = evaluate_on_probe(params, net, images, targets, *probe, opts.alpha,
                                             opts.beta, opts.inner);
      rec.objective = ev.objective;
      rec.phi_r_mean = ev.phi_r_mean;
      rec.phi_d_mean = ev.phi_d_mean;
      rec.lambda_phi_mean = ev.lambda_phi_mean;
    } else {
      rec.objective = batch_objective;
      rec.phi_r_mean = pr_mean;
      rec.phi_d_mean = pd_mean;
      rec.lambda_phi_mean = lp_mean;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!std::isfinite(rec.objective)) {
      trace.diverged = true;
      trace.diverged_at = iter;
      trace.records.push_back(rec);
      return trace;
    }
    trace.records.push_back(rec);

    // Windowed stop: compare the means of the last two stop_window-long
    // stretches of the recorded objective.
    if (opts.stop_tol > 0.0 &&
        static_cast<int>(trace.records.size()) >= 2 * opts.stop_window) {
      const int n = static_cast<int>(trace.records.size());
      double recent = 0.0, previous = 0.0;
      for (int i = 0; i < opts.stop_window; ++i) {
        recent += trace.records[n - 1 - i].objective;
        previous += trace.records[n - 1 - opts.stop_window - i].objective;
      }
      if ((previous - recent) / opts.stop_window < opts.stop_tol) break;
    }
  }
  return trace;
}

double interpretation_measure(const PerceptionParams& params, const LogicNetwork& net,
                              const std::vector<Tensor>& images, const SolveOptions& inner) {
  if (images.empty()) {
    throw std::invalid_argument("interpretation_measure: empty test set");
  }
  double acc = 0.0;
  for (const Tensor& image : images) {
    const Eigen::VectorXd f = forward(params, image).output;
    GammaState scratch = net.gamma;
    const SolveResult sol = optimize_y_gamma(net, f, scratch, inner);
    acc += (sol.y - f).cwiseAbs().mean();
  }
  return acc / static_cast<double>(images.size());
}

}  // namespace dclm
