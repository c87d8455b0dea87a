#pragma once

#include <string>
#include <vector>

#include "dclm/config.hpp"
#include "dclm/game.hpp"

namespace dclm {

// Deterministic desk-scale protocol: train_count + test_count disjoint images
// drawn from the IDX pool with the config seed.
struct DatasetSplit {
  std::vector<Tensor> train_images;
  std::vector<int> train_labels;
  std::vector<Eigen::VectorXd> train_targets;  // one-hot
  std::vector<Tensor> test_images;
  std::vector<int> test_labels;
};
DatasetSplit load_split(const RunConfig& cfg);

GameOptions game_options_from(const RunConfig& cfg);
LogicNetwork logic_network_from(const RunConfig& cfg);

// Baseline training driver (CLI `train`): initializes, trains, evaluates and
// writes out/model-<arch>.json plus a config snapshot.
struct TrainOutput {
  PerceptionParams params;
  double test_accuracy = 0.0;
  std::string model_path;
};
TrainOutput run_train(const RunConfig& cfg, const std::string& arch_id);

// Logic-extraction driver (CLI `extract-logic`): loads the baseline model
// (training it first if absent), runs the game, and writes the logic network,
// game-trained model, trace CSV, membership CSV and a summary row.
struct ExtractOutput {
  PerceptionParams params;
  LogicNetwork net;
  GameTrace trace;
  double test_accuracy = 0.0;
  double interpretation = 0.0;
  std::vector<std::string> files;
};
ExtractOutput run_extract_logic(const RunConfig& cfg, const std::string& arch_id);

// Experiment 1: per-channel ablation effects on trained and untrained
// networks over the training probe images.
struct Exp1Result {
  Eigen::MatrixXd trained_mean_diff;    // channels x output dims
  Eigen::MatrixXd untrained_mean_diff;  // channels x output dims
  std::vector<char> trained_all_empty;  // channel empty on every probe image
  std::vector<char> untrained_all_empty;
  std::vector<std::string> files;
};
Exp1Result run_experiment1(const RunConfig& cfg, bool skip_plots = false);

// Experiment 2: feature-map group (matching predicate) count per game step.
struct Exp2Result {
  std::vector<int> group_counts;
  std::vector<std::string> files;
};
Exp2Result run_experiment2(const RunConfig& cfg, bool skip_plots = false);

// Experiment 3: joint objective per game iteration, evaluated on a fixed
// probe subset.
struct Exp3Result {
  std::vector<double> objective;
  std::vector<std::string> files;
};
Exp3Result run_experiment3(const RunConfig& cfg, bool skip_plots = false);

// Experiment 4: accuracy and interpretation measure for the three baselines
// and their DCLM counterparts.
struct Exp4Row {
  std::string model;
  double accuracy_percent = 0.0;
  bool has_measure = false;
  double measure = 0.0;
};
struct Exp4Result {
  std::vector<Exp4Row> rows;
  std::vector<std::string> files;
};
Exp4Result run_experiment4(const RunConfig& cfg, bool skip_plots = false);

}  // namespace dclm
