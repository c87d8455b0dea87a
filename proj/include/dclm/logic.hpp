#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dclm/divergence.hpp"
#include "dclm/feature_map.hpp"
#include "dclm/tnorm.hpp"

namespace dclm {

// A feature predicate: true for feature maps close to its template under JS
// divergence. Groundings are the maps matched to it so far; their truth
// values (js <= eps_pred) are frozen at match time.
struct FeaturePredicate {
  int id = -1;
  FeatureMap template_map;
  Distribution template_dist;
  std::vector<FeatureMap> groundings;
  std::vector<std::uint8_t> grounding_truth;
  int true_count = 0;

  int grounding_count() const { return static_cast<int>(groundings.size()); }
  int false_count() const { return grounding_count() - true_count; }
};

// A disjunction node: feature-predicate literals plus exactly one
// decision-predicate literal. Incremental construction always wires one
// feature literal per clause; hand-built clauses may carry several.
struct Clause {
  int id = -1;
  std::vector<int> feature_predicates;
  int decision_class = -1;
  int group = -1;
};

// Membership degrees (degree of logic false) for every true-or-false edge.
// Flat storage keyed by the network's edge offsets, so scratch copies for
// per-sample solves are plain memcpys.
struct GammaState {
  std::vector<double> feature;   // concatenated feature-edge gammas, clause order
  std::vector<double> decision;  // one decision-edge gamma per clause

  Eigen::Map<Eigen::ArrayXd> feature_array() {
    return {feature.data(), static_cast<Eigen::Index>(feature.size())};
  }
  Eigen::Map<Eigen::ArrayXd> decision_array() {
    return {decision.data(), static_cast<Eigen::Index>(decision.size())};
  }
};

// The extracted CNF: predicates, disjunction nodes, conjunction groups (one
// per decision predicate), per-edge membership degrees and per-group
// eigenvalue weights.
struct LogicNetwork {
  TNorm variant = TNorm::Lukasiewicz;
  double eps_match = 0.1;
  double eps_pred = 0.05;
  double eps_smooth = 1e-9;
  Eigen::Index num_classes = 0;

  std::vector<FeaturePredicate> predicates;
  std::vector<Clause> clauses;
  std::vector<int> feature_edge_offset = {0};  // per clause id; last entry = edge total
  GammaState gamma;
  Eigen::VectorXd lambda;                // one weight per conjunction group
  std::vector<std::vector<int>> groups;  // group -> member clause ids

  bool empty() const { return clauses.empty(); }
  int predicate_count() const { return static_cast<int>(predicates.size()); }
  int group_count() const { return static_cast<int>(groups.size()); }

  int feature_edges_of(int clause_id) const { return feature_edge_offset[clause_id]; }
  int feature_edge_count(int clause_id) const {
    return feature_edge_offset[clause_id + 1] - feature_edge_offset[clause_id];
  }

  // Sets up M decision predicates (with their conjunction groups and lambda
  // weights) on first use; later calls only verify the count.
  void ensure_classes(Eigen::Index m);

  // Appends a clause with its edges; returns the clause id.
  int add_clause(std::vector<int> feature_preds, int decision_class,
                 const std::vector<double>& feature_gammas, double decision_gamma);
};

// 1.0 when js(tau, template) <= eps_pred (boundary inclusive), else 0.0.
double predicate_value(const FeatureMap& tau, const FeatureMap& template_map, double eps_pred,
                       double eps_smooth = 1e-9);

// Matches each non-empty map to the predicate of smallest JS divergence within
// eps_match (ties to the lowest id) and appends it to that grounding set;
// unmatched maps spawn a predicate with themselves as template plus M new
// clauses (feature edge gamma=1, decision edge gamma=0), one per decision
// predicate, each joining its decision predicate's conjunction group.
void extend_network(LogicNetwork& net, const std::vector<FeatureMap>& features,
                    const Eigen::VectorXd& f_nn);

// Lukasiewicz clause eigenvalue at decision values y_m, with subgradients.
// Each literal contributes gamma*(1-v) + (1-gamma)*v; the per-grounding clause
// value is min(1, sum of contributions); the eigenvalue averages over the
// joint groundings and is clipped to [0,1]. Saturated min / clipping carry
// subgradient zero. An empty grounding set marks the clause ungrounded and
// its eigenvalue contributes 0.
struct ClauseEval {
  double phi = 0.0;
  bool grounded = false;
  double d_y = 0.0;                // d phi / d y_[decision_class]
  Eigen::ArrayXd d_feature_gamma;  // per feature literal
  double d_decision_gamma = 0.0;
};
ClauseEval clause_eigenvalue(const LogicNetwork& net, const Clause& clause, const GammaState& gamma,
                             const Eigen::VectorXd& y_m);

// Squared Euclidean distance |y_m - f_nn|^2 (the logic-side coupling term).
double phi_d_logic(const Eigen::VectorXd& y_m, const Eigen::VectorXd& f_nn);

// Per-group potential: mean of the member clauses' eigenvalues.
Eigen::VectorXd group_potentials(const LogicNetwork& net, const GammaState& gamma,
                                 const Eigen::VectorXd& y_m);

// -phi_d_logic(y_m, f_nn) + sum_i lambda_i * Phi_i(y_m); the partition
// constant is treated as 1.
double logic_objective(const LogicNetwork& net, const GammaState& gamma, const Eigen::VectorXd& y_m,
                       const Eigen::VectorXd& f_nn);

struct SolveOptions {
  int max_iters = 50;
  double step = 0.05;
  double tol = 1e-8;
  int max_halvings = 10;
};

struct SolveResult {
  Eigen::VectorXd y;
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;
};

// Alternating projected gradient ascent on the logic objective: y_m into
// [0,1]^M with gamma fixed, then gamma into [-1,1]^E with y_m fixed.
// Steps that fail to improve after max_halvings backtracks are rejected, so
// the objective is non-decreasing across accepted iterations.
SolveResult optimize_y_gamma(const LogicNetwork& net, const Eigen::VectorXd& f_nn,
                             GammaState& gamma, const SolveOptions& opts);

// Membership-degree matrix: decision-class rows, feature-predicate columns;
// entry (j, i) is the feature-edge gamma of the clause joining predicate i to
// decision predicate j.
Eigen::MatrixXd membership_matrix(const LogicNetwork& net);

}  // namespace dclm
