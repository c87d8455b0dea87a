#include "dclm/experiments.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dclm/artifacts.hpp"
#include "dclm/dataset.hpp"
#include "dclm/svg.hpp"

namespace dclm {

namespace {

namespace fs = std::filesystem;

// Sub-seeds derived from the config seed: +0 data split, +1 parameter init,
// +2 baseline minibatches, +3 game minibatches.
constexpr std::uint64_t kSplitSeed = 0, kInitSeed = 1, kBaselineSeed = 2, kGameSeed = 3;

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

void write_config_snapshot(const RunConfig& cfg) {
  std::ofstream out(out_path(cfg, "config-snapshot.txt"));
  out << cfg.to_text();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

DatasetSplit load_split(const RunConfig& cfg) {
  const auto pool = load_idx(cfg.images_path, cfg.labels_path);
  auto [train, test] = sample_train_test(pool, static_cast<std::size_t>(cfg.train_count),
                                         static_cast<std::size_t>(cfg.test_count),
                                         cfg.seed + kSplitSeed);
  DatasetSplit split;
  split.train_images.reserve(train.size());
  split.train_targets.reserve(train.size());
  for (auto& item : train) {
    split.train_images.push_back(std::move(item.pixels));
    split.train_labels.push_back(item.label);
    split.train_targets.push_back(one_hot(item.label, 10));
  }
  split.test_images.reserve(test.size());
  for (auto& item : test) {
    split.test_images.push_back(std::move(item.pixels));
    split.test_labels.push_back(item.label);
  }
  return split;
}

GameOptions game_options_from(const RunConfig& cfg) {
  GameOptions o;
  o.alpha = cfg.game_alpha;
  o.beta = cfg.game_beta;
  o.mu = cfg.game_mu;
  o.max_iters = cfg.game_iters;
  o.batch_size = cfg.game_batch;
  o.inner.max_iters = cfg.inner_iters;
  o.inner.step = cfg.inner_step;
  o.seed = cfg.seed + kGameSeed;
  o.stop_tol = cfg.game_stop_tol;
  o.stop_window = cfg.game_stop_window;
  return o;
}

LogicNetwork logic_network_from(const RunConfig& cfg) {
  LogicNetwork net;
  net.variant = tnorm_from_string(cfg.tnorm);
  net.eps_match = cfg.eps_match;
  net.eps_pred = cfg.eps_pred;
  net.eps_smooth = cfg.eps_smooth;
  return net;
}

TrainOutput run_train(const RunConfig& cfg, const std::string& arch_id) {
  const DatasetSplit split = load_split(cfg);
  TrainOutput out;
  out.params = init_params(Architecture::preset(arch_id), cfg.seed + kInitSeed);

  BaselineOptions opts;
  opts.epochs = cfg.train_epochs;
  opts.batch_size = cfg.train_batch;
  opts.mu = cfg.train_mu;
  opts.alpha = cfg.train_alpha;
  opts.seed = cfg.seed + kBaselineSeed;
  train_baseline(out.params, split.train_images, split.train_targets, opts);

  out.test_accuracy = accuracy(out.params, split.test_images, split.test_labels);
  out.model_path = out_path(cfg, "model-" + arch_id + ".json");
  save_model(out.params, out.model_path);
  write_config_snapshot(cfg);
  return out;
}

ExtractOutput run_extract_logic(const RunConfig& cfg, const std::string& arch_id) {
  const DatasetSplit split = load_split(cfg);
  const std::string model_path = out_path(cfg, "model-" + arch_id + ".json");
  ExtractOutput out;
  if (fs::exists(model_path)) {
    out.params = load_model(model_path);
  } else {
    out.params = run_train(cfg, arch_id).params;
  }

  out.net = logic_network_from(cfg);
  const GameOptions gopts = game_options_from(cfg);
  std::vector<int> probe;
  const std::vector<int>* probe_ptr = nullptr;
  if (cfg.game_probe > 0) {
    const int n = std::min<int>(cfg.game_probe, static_cast<int>(split.train_images.size()));
    for (int i = 0; i < n; ++i) probe.push_back(i);
    probe_ptr = &probe;
  }
  out.trace =
      game_train(out.params, out.net, split.train_images, split.train_targets, gopts, probe_ptr);
  if (out.trace.diverged) {
    const std::string trace_path = out_path(cfg, "trace-" + arch_id + ".csv");
    save_trace_csv(out.trace, trace_path);
    throw TrainingDiverged("game training diverged at iteration " +
                               std::to_string(out.trace.diverged_at) + " (partial trace in " +
                               trace_path + ")",
                           out.trace.diverged_at);
  }

  out.test_accuracy = accuracy(out.params, split.test_images, split.test_labels);
  out.interpretation = interpretation_measure(out.params, out.net, split.test_images, gopts.inner);

  const std::string logic_path = out_path(cfg, "logic-" + arch_id + ".json");
  const std::string game_model_path = out_path(cfg, "model-game-" + arch_id + ".json");
  const std::string trace_path = out_path(cfg, "trace-" + arch_id + ".csv");
  const std::string membership_path = out_path(cfg, "membership-" + arch_id + ".csv");
  const std::string summary_path = out_path(cfg, "dclm-summary-" + arch_id + ".csv");
  save_logic(out.net, logic_path);
  save_model(out.params, game_model_path);
  save_trace_csv(out.trace, trace_path);
  save_membership_csv(out.net, membership_path);
  {
    std::ofstream s(summary_path);
    s << "model,accuracy,interpretation_measure\n";
    s << "DCLM-" << arch_id << ',' << format_double(out.test_accuracy * 100.0) << ','
      << format_double(out.interpretation) << '\n';
  }
  out.files = {logic_path, game_model_path, trace_path, membership_path, summary_path};
  return out;
}

Exp1Result run_experiment1(const RunConfig& cfg, bool skip_plots) {
  const DatasetSplit split = load_split(cfg);
  const std::string model_path = out_path(cfg, "model-" + cfg.arch + ".json");
  PerceptionParams trained;
  if (fs::exists(model_path)) {
    trained = load_model(model_path);
  } else {
    trained = run_train(cfg, cfg.arch).params;  // trains in place when absent
  }
  const PerceptionParams untrained = init_params(trained.arch, cfg.seed + kInitSeed);

  const Eigen::Index channels = trained.arch.feature_channels();
  const Eigen::Index dims = trained.arch.num_classes;
  const auto [fh, fw] = trained.arch.feature_grid();

  Exp1Result res;
  res.trained_mean_diff = Eigen::MatrixXd::Zero(channels, dims);
  res.untrained_mean_diff = Eigen::MatrixXd::Zero(channels, dims);
  res.trained_all_empty.assign(channels, 1);
  res.untrained_all_empty.assign(channels, 1);

  Eigen::Map<const Eigen::VectorXd> fcb_t(trained.fc_bias.data.data(), trained.fc_bias.size());
  Eigen::Map<const Eigen::VectorXd> fcb_u(untrained.fc_bias.data.data(), untrained.fc_bias.size());

  for (const Tensor& image : split.train_images) {
    for (int state = 0; state < 2; ++state) {
      const PerceptionParams& params = state == 0 ? trained : untrained;
      Eigen::MatrixXd& acc = state == 0 ? res.trained_mean_diff : res.untrained_mean_diff;
      std::vector<char>& empties = state == 0 ? res.trained_all_empty : res.untrained_all_empty;
      const ForwardRecord rec = forward(params, image);
      for (Eigen::Index c = 0; c < channels; ++c) {
        if (!rec.features[c].empty()) empties[c] = 0;
        Eigen::VectorXd masked = rec.fc_input;
        masked.segment(c * fh * fw, fh * fw).setZero();
        const Eigen::VectorXd ablated =
            nn::dense(masked, params.fc_weight, state == 0 ? fcb_t : fcb_u);
        acc.row(c) += (ablated - rec.output).transpose();
      }
    }
  }
  res.trained_mean_diff /= static_cast<double>(split.train_images.size());
  res.untrained_mean_diff /= static_cast<double>(split.train_images.size());

  const std::string csv_path = out_path(cfg, "exp1.csv");
  {
    std::ofstream csv(csv_path);
    csv << "network_state,channel,output_dim,mean_diff\n";
    for (int state = 0; state < 2; ++state) {
      const Eigen::MatrixXd& m = state == 0 ? res.trained_mean_diff : res.untrained_mean_diff;
      for (Eigen::Index c = 0; c < channels; ++c) {
        for (Eigen::Index d = 0; d < dims; ++d) {
          csv << (state == 0 ? "trained" : "untrained") << ',' << c << ',' << d << ','
              << format_double(m(c, d)) << '\n';
        }
      }
    }
  }
  res.files.push_back(csv_path);

  if (!skip_plots) {
    for (int state = 0; state < 2; ++state) {
      const Eigen::MatrixXd& m = state == 0 ? res.trained_mean_diff : res.untrained_mean_diff;
      const std::string tag = state == 0 ? "trained" : "untrained";
      for (Eigen::Index c = 0; c < channels; ++c) {
        std::vector<double> vals(m.row(c).begin(), m.row(c).end());
        const std::string p =
            out_path(cfg, "exp1-" + tag + "-ch" + std::to_string(c) + ".svg");
        svg_bar_chart(p, vals, "mean output difference, " + tag + " network, channel " +
                                   std::to_string(c));
        res.files.push_back(p);
      }
    }
  }
  return res;
}

Exp2Result run_experiment2(const RunConfig& cfg, bool skip_plots) {
  const DatasetSplit split = load_split(cfg);
  const std::string model_path = out_path(cfg, "model-" + cfg.arch + ".json");
  PerceptionParams params;
  if (fs::exists(model_path)) {
    params = load_model(model_path);
  } else {
    params = run_train(cfg, cfg.arch).params;
  }
  LogicNetwork net = logic_network_from(cfg);
  const GameOptions gopts = game_options_from(cfg);
  const GameTrace trace =
      game_train(params, net, split.train_images, split.train_targets, gopts, nullptr);
  if (trace.diverged) {
    throw TrainingDiverged("experiment 2: game training diverged at iteration " +
                               std::to_string(trace.diverged_at),
                           trace.diverged_at);
  }

  Exp2Result res;
  for (const auto& r : trace.records) res.group_counts.push_back(r.n_predicates);

  const std::string csv_path = out_path(cfg, "exp2.csv");
  {
    std::ofstream csv(csv_path);
    csv << "step,n_groups\n";  // feature-map groups = matching predicates
    for (std::size_t i = 0; i < res.group_counts.size(); ++i) {
      csv << i << ',' << res.group_counts[i] << '\n';
    }
  }
  res.files.push_back(csv_path);
  if (!skip_plots) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < res.group_counts.size(); ++i) {
      xs.push_back(static_cast<double>(i));
      ys.push_back(static_cast<double>(res.group_counts[i]));
    }
    const std::string p = out_path(cfg, "exp2.svg");
    svg_line_chart(p, xs, ys, "feature map groups over training steps");
    res.files.push_back(p);
  }
  return res;
}

Exp3Result run_experiment3(const RunConfig& cfg, bool skip_plots) {
  RunConfig probe_cfg = cfg;
  if (probe_cfg.game_probe <= 0) probe_cfg.game_probe = 200;
  const ExtractOutput out = run_extract_logic(probe_cfg, cfg.arch);

  Exp3Result res;
  for (const auto& r : out.trace.records) res.objective.push_back(r.objective);

  const std::string csv_path = out_path(cfg, "exp3.csv");
  {
    std::ofstream csv(csv_path);
    csv << "optimization_index,objective\n";
    for (std::size_t i = 0; i < res.objective.size(); ++i) {
      csv << i << ',' << format_double(res.objective[i]) << '\n';
    }
  }
  res.files.push_back(csv_path);
  if (!skip_plots) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < res.objective.size(); ++i) xs.push_back(static_cast<double>(i));
    const std::string p = out_path(cfg, "exp3.svg");
    svg_line_chart(p, xs, res.objective, "game objective over logic-network optimizations");
    res.files.push_back(p);
  }
  return res;
}

Exp4Result run_experiment4(const RunConfig& cfg, bool skip_plots) {
  (void)skip_plots;  // experiment 4 is tabular
  Exp4Result res;
  for (const std::string arch : {"cnns-1", "cnns-2", "cnns-3"}) {
    const TrainOutput base = run_train(cfg, arch);
    Exp4Row base_row;
    base_row.model = "CNNs-" + arch.substr(5);
    base_row.accuracy_percent = base.test_accuracy * 100.0;
    res.rows.push_back(base_row);

    const ExtractOutput game = run_extract_logic(cfg, arch);
    Exp4Row game_row;
    game_row.model = "DCLM-CNNs-" + arch.substr(5);
    game_row.accuracy_percent = game.test_accuracy * 100.0;
    game_row.has_measure = true;
    game_row.measure = game.interpretation;
    res.rows.push_back(game_row);
    for (const auto& f : game.files) res.files.push_back(f);
  }

  const std::string csv_path = out_path(cfg, "exp4.csv");
  {
    std::ofstream csv(csv_path);
    csv << "model,accuracy,interpretation_measure\n";
    for (const auto& row : res.rows) {
      csv << row.model << ',' << format_double(row.accuracy_percent) << ','
          << (row.has_measure ? format_double(row.measure) : std::string("NULL")) << '\n';
    }
  }
  res.files.push_back(csv_path);
  return res;
}

}  // namespace dclm
