#pragma once

#include <cstdint>
#include <vector>

#include "dclm/logic.hpp"
#include "dclm/perception.hpp"

namespace dclm {

// Perception-fit potential: -(1/2) |y_t - f_nn|^2.
double phi_r(const Eigen::VectorXd& y_t, const Eigen::VectorXd& f_nn);

// Logic-coupling potential of the game objective: half the squared deviation
// of the residual y_m - f_nn from its own mean (constant shifts of y_m are
// invisible to it).
double phi_d_game(const Eigen::VectorXd& y_m, const Eigen::VectorXd& f_nn);

struct GameOptions {
  double alpha = 1e-4;  // weight prior
  double beta = 1e-4;   // lambda prior
  double mu = 0.01;     // learning rate for theta = (w, lambda)
  int max_iters = 100;
  int batch_size = 32;
  SolveOptions inner;        // Algorithm-1 settings for the logic solves
  bool extract_logic = true;  // false collapses the game to plain training
  std::uint64_t seed = 1;
  int stop_window = 10;
  double stop_tol = 1e-6;  // <= 0 disables the windowed early stop
};

struct GameIterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double phi_r_mean = 0.0;
  double phi_d_mean = 0.0;
  double lambda_phi_mean = 0.0;  // mean over samples of sum_c lambda_c Phi_c
  int n_predicates = 0;
  int n_groups = 0;
  double seconds = 0.0;
};

struct GameTrace {
  std::vector<GameIterationRecord> records;
  bool diverged = false;
  int diverged_at = -1;
};

// Minimization form of the game objective for a batch, with the logic side's
// decisions y_m held fixed:
//   (alpha/2)|w|^2 + (beta/2)|lambda|^2
//   + mean_s [ -phi_r(y_t, f) + phi_d_game(y_m, f) - sum_c lambda_c Phi_c(y_m) ]
// An empty y_m list (collapsed game) drops the logic terms.
double joint_objective(const PerceptionParams& params, const LogicNetwork& net,
                       const std::vector<Tensor>& images,
                       const std::vector<Eigen::VectorXd>& targets,
                       const std::vector<Eigen::VectorXd>& y_m, double alpha, double beta);

// d joint / d lambda_c = beta*lambda_c - mean_s Phi_c(y_m_s).
Eigen::VectorXd grad_lambda(const LogicNetwork& net, const std::vector<Eigen::VectorXd>& y_m,
                            double beta);

// FC-output gradient of the per-sample data terms; y_m == nullptr drops the
// phi_d_game part (collapsed game).
Eigen::VectorXd game_upstream(const Eigen::VectorXd& f_nn, const Eigen::VectorXd& y_t,
                              const Eigen::VectorXd* y_m);

// d joint / d w: alpha*w plus the residual and phi_d_game terms pushed through
// the CNN; y_m is a constant here (it is the logic side's move).
LayerGrad grad_w(const PerceptionParams& params, const std::vector<ForwardRecord>& records,
                 const std::vector<Eigen::VectorXd>& targets,
                 const std::vector<Eigen::VectorXd>& y_m, double alpha);

// The alternating game: per iteration, forward a minibatch, extend the logic
// network with its feature maps, best-respond the logic side per sample
// (committing gamma), then descend theta = (w, lambda). When probe indices are
// given, the trace objective is evaluated on that fixed subset after each
// update (with scratch gammas, so evaluation never mutates the network);
// otherwise the minibatch objective before the update is recorded.
// On numerical divergence the partial trace is returned with the flag set.
GameTrace game_train(PerceptionParams& params, LogicNetwork& net, const std::vector<Tensor>& images,
                     const std::vector<Eigen::VectorXd>& targets, const GameOptions& opts,
                     const std::vector<int>* probe = nullptr);

// Mean over the test set of (1/M) sum_j |y_m_j - f_nn_j| with y_m solved per
// sample from the committed network state (scratch gamma, nothing mutated).
double interpretation_measure(const PerceptionParams& params, const LogicNetwork& net,
                              const std::vector<Tensor>& images, const SolveOptions& inner);

}  // namespace dclm
