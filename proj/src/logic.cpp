#include "dclm/logic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dclm {

namespace {

// gamma * (1 - v) + (1 - gamma) * v for a literal value v.
inline double blend(double gamma, double value) {
  return gamma * (1.0 - value) + (1.0 - gamma) * value;
}

void check_variant(const LogicNetwork& net) {
  if (net.variant != TNorm::Lukasiewicz) {
    throw std::invalid_argument(
        "clause eigenvalues are defined for the Lukasiewicz variant only; network is set to " +
        std::string(to_string(net.variant)));
  }
}

}  // namespace

void LogicNetwork::ensure_classes(Eigen::Index m) {
  if (num_classes == 0) {
    num_classes = m;
    lambda = Eigen::VectorXd::Zero(m);
    groups.assign(m, {});
  } else if (num_classes != m) {
    throw std::invalid_argument("logic network built for " + std::to_string(num_classes) +
                                " classes, got output length " + std::to_string(m));
  }
}

int LogicNetwork::add_clause(std::vector<int> feature_preds, int decision_class,
                             const std::vector<double>& feature_gammas, double decision_gamma) {
  if (feature_preds.size() != feature_gammas.size()) {
    throw std::invalid_argument("add_clause: one gamma per feature literal required");
  }
  Clause clause;
  clause.id = static_cast<int>(clauses.size());
  clause.feature_predicates = std::move(feature_preds);
  clause.decision_class = decision_class;
  clause.group = decision_class;
  if (decision_class < 0 || decision_class >= static_cast<int>(groups.size())) {
    throw std::invalid_argument("add_clause: decision class " + std::to_string(decision_class) +
                                " has no conjunction group");
  }
  groups[decision_class].push_back(clause.id);
  clauses.push_back(std::move(clause));
  for (double g : feature_gammas) gamma.feature.push_back(g);
  gamma.decision.push_back(decision_gamma);
  feature_edge_offset.push_back(static_cast<int>(gamma.feature.size()));
  return static_cast<int>(clauses.size()) - 1;
}

double predicate_value(const FeatureMap& tau, const FeatureMap& template_map, double eps_pred,
                       double eps_smooth) {
  return js(tau, template_map, eps_smooth) <= eps_pred ? 1.0 : 0.0;
}

void extend_network(LogicNetwork& net, const std::vector<FeatureMap>& features,
                    const Eigen::VectorXd& f_nn) {
  net.ensure_classes(f_nn.size());

  for (const FeatureMap& map : features) {
    const Distribution dist = normalize_feature_map(map, net.eps_smooth);
    if (dist.empty_source) continue;  // empty maps never ground a predicate

    int best = -1;
    double best_js = std::numeric_limits<double>::infinity();
    for (const auto& pred : net.predicates) {
      const double d = js(dist, pred.template_dist);
      if (d < best_js) {  // strict: ties stay with the lowest id
        best_js = d;
        best = pred.id;
      }
    }

    if (best >= 0 && best_js <= net.eps_match) {
      FeaturePredicate& pred = net.predicates[best];
      const bool truth = best_js <= net.eps_pred;
      pred.groundings.push_back(map);
      pred.grounding_truth.push_back(truth ? 1 : 0);
      if (truth) ++pred.true_count;
      continue;
    }

    FeaturePredicate pred;
    pred.id = static_cast<int>(net.predicates.size());
    pred.template_map = map;
    pred.template_dist = dist;
    pred.groundings.push_back(map);     // the founder grounds its own predicate
    pred.grounding_truth.push_back(1);  // js = 0 <= eps_pred
    pred.true_count = 1;
    const int pid = pred.id;
    net.predicates.push_back(std::move(pred));

    // Paper initialization: feature edges start as false edges (gamma 1),
    // decision edges as true edges (gamma 0).
    for (Eigen::Index cls = 0; cls < net.num_classes; ++cls) {
      net.add_clause({pid}, static_cast<int>(cls), {1.0}, 0.0);
    }
  }
}

ClauseEval clause_eigenvalue(const LogicNetwork& net, const Clause& clause, const GammaState& gamma,
                             const Eigen::VectorXd& y_m) {
  check_variant(net);
  if (clause.decision_class < 0 || clause.decision_class >= y_m.size()) {
    throw std::invalid_argument("clause_eigenvalue: decision class " +
                                std::to_string(clause.decision_class) +
                                " out of range for y_m of length " + std::to_string(y_m.size()));
  }
  const int n_lit = static_cast<int>(clause.feature_predicates.size());
  const int base = net.feature_edges_of(clause.id);
  const double dec_gamma = gamma.decision[clause.id];
  const double y = y_m[clause.decision_class];

  ClauseEval ev;
  ev.d_feature_gamma = Eigen::ArrayXd::Zero(n_lit);

  // Probability that a random grounding makes each literal's predicate true.
  std::vector<double> p_true(n_lit);
  for (int l = 0; l < n_lit; ++l) {
    const FeaturePredicate& pred = net.predicates[clause.feature_predicates[l]];
    if (pred.grounding_count() == 0) return ev;  // ungrounded: phi stays 0
    p_true[l] = static_cast<double>(pred.true_count) / pred.grounding_count();
  }
  ev.grounded = true;

  const double dec_contrib = blend(dec_gamma, y);

  // Predicate values are 0/1, so the average over joint groundings collapses
  // to a weighted sum over the 2^L truth patterns.
  double acc = 0.0, d_y = 0.0, d_dec = 0.0;
  Eigen::ArrayXd d_feat = Eigen::ArrayXd::Zero(n_lit);
  const unsigned patterns = 1u << n_lit;
  for (unsigned pat = 0; pat < patterns; ++pat) {
    double weight = 1.0;
    double s = dec_contrib;
    for (int l = 0; l < n_lit; ++l) {
      const bool truth = (pat >> l) & 1u;
      weight *= truth ? p_true[l] : (1.0 - p_true[l]);
      s += truth ? (1.0 - gamma.feature[base + l]) : gamma.feature[base + l];
    }
    if (weight == 0.0) continue;
    acc += weight * std::min(1.0, s);
    if (s < 1.0) {  // saturated min carries no gradient
      d_y += weight * (1.0 - 2.0 * dec_gamma);
      d_dec += weight * (1.0 - 2.0 * y);
      for (int l = 0; l < n_lit; ++l) {
        const bool truth = (pat >> l) & 1u;
        d_feat[l] += truth ? -weight : weight;
      }
    }
  }

  if (acc <= 0.0) {
    ev.phi = 0.0;  // clipped below: zero subgradient
  } else if (acc >= 1.0) {
    ev.phi = 1.0;  // clipped above
  } else {
    ev.phi = acc;
    ev.d_y = d_y;
    ev.d_decision_gamma = d_dec;
    ev.d_feature_gamma = d_feat;
  }
  return ev;
}

double phi_d_logic(const Eigen::VectorXd& y_m, const Eigen::VectorXd& f_nn) {
  if (y_m.size() != f_nn.size()) {
    throw std::invalid_argument("phi_d_logic: length mismatch: " + std::to_string(y_m.size()) +
                                " vs " + std::to_string(f_nn.size()));
  }
  return (y_m - f_nn).squaredNorm();
}

Eigen::VectorXd group_potentials(const LogicNetwork& net, const GammaState& gamma,
                                 const Eigen::VectorXd& y_m) {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(net.group_count());
  for (int g = 0; g < net.group_count(); ++g) {
    if (net.groups[g].empty()) continue;
    double sum = 0.0;
    for (int cid : net.groups[g]) {
      sum += clause_eigenvalue(net, net.clauses[cid], gamma, y_m).phi;
    }
    phi[g] = sum / static_cast<double>(net.groups[g].size());
  }
  return phi;
}

double logic_objective(const LogicNetwork& net, const GammaState& gamma, const Eigen::VectorXd& y_m,
                       const Eigen::VectorXd& f_nn) {
  double obj = -phi_d_logic(y_m, f_nn);
  if (!net.empty()) {
    obj += net.lambda.dot(group_potentials(net, gamma, y_m));
  }
  return obj;
}

namespace {

struct ObjectiveGrads {
  Eigen::VectorXd d_y;
  Eigen::ArrayXd d_feature;   // flat, aligned with GammaState::feature
  Eigen::ArrayXd d_decision;  // per clause
};

ObjectiveGrads objective_gradients(const LogicNetwork& net, const GammaState& gamma,
                                   const Eigen::VectorXd& y_m, const Eigen::VectorXd& f_nn) {
  ObjectiveGrads g;
  g.d_y = -2.0 * (y_m - f_nn);
  g.d_feature = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(gamma.feature.size()));
  g.d_decision = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(gamma.decision.size()));

  for (int grp = 0; grp < net.group_count(); ++grp) {
    if (net.groups[grp].empty()) continue;
    const double scale = net.lambda[grp] / static_cast<double>(net.groups[grp].size());
    if (scale == 0.0) continue;
    for (int cid : net.groups[grp]) {
      const ClauseEval ev = clause_eigenvalue(net, net.clauses[cid], gamma, y_m);
      if (!ev.grounded) continue;
      g.d_y[net.clauses[cid].decision_class] += scale * ev.d_y;
      const int base = net.feature_edges_of(cid);
      for (int l = 0; l < ev.d_feature_gamma.size(); ++l) {
        g.d_feature[base + l] += scale * ev.d_feature_gamma[l];
      }
      g.d_decision[cid] += scale * ev.d_decision_gamma;
    }
  }
  return g;
}

}  // namespace

SolveResult optimize_y_gamma(const LogicNetwork& net, const Eigen::VectorXd& f_nn,
                             GammaState& gamma, const SolveOptions& opts) {
  if (opts.max_iters < 1 || !(opts.step > 0.0)) {
    throw std::invalid_argument("optimize_y_gamma: need max_iters >= 1 and step > 0");
  }
  SolveResult res;
  res.y = f_nn.cwiseMax(0.0).cwiseMin(1.0);
  if (net.empty()) {
    res.objective = logic_objective(net, gamma, res.y, f_nn);
    res.objective_trace.push_back(res.objective);
    return res;
  }

  double current = logic_objective(net, gamma, res.y, f_nn);
  if (!std::isfinite(current)) {
    throw std::runtime_error("optimize_y_gamma: non-finite objective at iteration 0");
  }
  res.objective_trace.push_back(current);

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    const double at_start = current;

    // Decision values move with the membership degrees held fixed.
    {
      const ObjectiveGrads g = objective_gradients(net, gamma, res.y, f_nn);
      double step = opts.step;
      for (int h = 0; h <= opts.max_halvings; ++h) {
        const Eigen::VectorXd y_try = (res.y + step * g.d_y).cwiseMax(0.0).cwiseMin(1.0);
        const double obj_try = logic_objective(net, gamma, y_try, f_nn);
        if (obj_try >= current) {
          res.y = y_try;
          current = obj_try;
          break;
        }
        step *= 0.5;
      }
    }

    // Membership degrees move with the decision values held fixed.
    {
      const ObjectiveGrads g = objective_gradients(net, gamma, res.y, f_nn);
      double step = opts.step;
      GammaState gamma_try;
      for (int h = 0; h <= opts.max_halvings; ++h) {
        gamma_try = gamma;
        Eigen::Map<Eigen::ArrayXd> feat(gamma_try.feature.data(),
                                        static_cast<Eigen::Index>(gamma_try.feature.size()));
        Eigen::Map<Eigen::ArrayXd> dec(gamma_try.decision.data(),
                                       static_cast<Eigen::Index>(gamma_try.decision.size()));
        feat = (feat + step * g.d_feature).max(-1.0).min(1.0);
        dec = (dec + step * g.d_decision).max(-1.0).min(1.0);
        const double obj_try = logic_objective(net, gamma_try, res.y, f_nn);
        if (obj_try >= current) {
          gamma = std::move(gamma_try);
          current = obj_try;
          break;
        }
        step *= 0.5;
      }
    }

    if (!std::isfinite(current)) {
      throw std::runtime_error("optimize_y_gamma: non-finite objective at iteration " +
                               std::to_string(iter));
    }
    res.objective_trace.push_back(current);
    res.iterations = iter;
    if (current - at_start < opts.tol) break;
  }
  res.objective = current;
  return res;
}

Eigen::MatrixXd membership_matrix(const LogicNetwork& net) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(net.num_classes, net.predicate_count());
  for (const Clause& clause : net.clauses) {
    if (clause.feature_predicates.size() != 1) continue;
    m(clause.decision_class, clause.feature_predicates[0]) =
        net.gamma.feature[net.feature_edges_of(clause.id)];
  }
  return m;
}

}  // namespace dclm
