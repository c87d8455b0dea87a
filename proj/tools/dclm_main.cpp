// Command-line front end: baseline training, logic extraction, and the four
// experiments. Exit codes: 0 success, 2 config error, 3 data error,
// 4 numerical divergence.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "dclm/dataset.hpp"
#include "dclm/experiments.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_override;
  std::int64_t seed_override = -1;
  bool skip_plots = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "path to key=value config file")->required();
  cmd->add_option("--seed", flags.seed_override, "override the config seed");
  cmd->add_option("--out", flags.out_override, "override the output directory");
  cmd->add_flag("--skip-plots", flags.skip_plots, "write CSV files only");
}

dclm::RunConfig load_config(const CommonFlags& flags) {
  dclm::RunConfig cfg = dclm::RunConfig::from_file(flags.config_path);
  if (flags.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed_override);
  if (!flags.out_override.empty()) cfg.out_dir = flags.out_override;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep cognitive learning: CNN training, fuzzy-logic extraction and the game between them"};
  app.require_subcommand(1);

  CommonFlags flags;
  CLI::App* train = app.add_subcommand("train", "train a baseline CNN and save the model");
  CLI::App* extract = app.add_subcommand("extract-logic",
                                         "run the game on a trained model and save the logic network");
  CLI::App* exp1 = app.add_subcommand("exp1", "feature-map ablation study (bar charts)");
  CLI::App* exp2 = app.add_subcommand("exp2", "feature-map group growth curve");
  CLI::App* exp3 = app.add_subcommand("exp3", "game objective convergence curve");
  CLI::App* exp4 = app.add_subcommand("exp4", "accuracy / interpretation table");
  for (CLI::App* cmd : {train, extract, exp1, exp2, exp3, exp4}) add_common(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    const dclm::RunConfig cfg = load_config(flags);
    if (train->parsed()) {
      const auto out = dclm::run_train(cfg, cfg.arch);
      std::printf("trained %s: test accuracy %.2f%% -> %s\n", cfg.arch.c_str(),
                  out.test_accuracy * 100.0, out.model_path.c_str());
    } else if (extract->parsed()) {
      const auto out = dclm::run_extract_logic(cfg, cfg.arch);
      std::printf("extracted logic for %s: %d predicates, %zu clauses, accuracy %.2f%%, "
                  "interpretation %.4f\n",
                  cfg.arch.c_str(), out.net.predicate_count(), out.net.clauses.size(),
                  out.test_accuracy * 100.0, out.interpretation);
    } else if (exp1->parsed()) {
      const auto res = dclm::run_experiment1(cfg, flags.skip_plots);
      std::printf("experiment 1 done: %zu files under %s\n", res.files.size(),
                  cfg.out_dir.c_str());
    } else if (exp2->parsed()) {
      const auto res = dclm::run_experiment2(cfg, flags.skip_plots);
      std::printf("experiment 2 done: final group count %d\n",
                  res.group_counts.empty() ? 0 : res.group_counts.back());
    } else if (exp3->parsed()) {
      const auto res = dclm::run_experiment3(cfg, flags.skip_plots);
      std::printf("experiment 3 done: %zu objective samples\n", res.objective.size());
    } else if (exp4->parsed()) {
      const auto res = dclm::run_experiment4(cfg, flags.skip_plots);
      for (const auto& row : res.rows) {
        std::printf("%-14s accuracy %6.2f  interpretation %s\n", row.model.c_str(),
                    row.accuracy_percent,
                    row.has_measure ? std::to_string(row.measure).c_str() : "NULL");
      }
    }
  } catch (const dclm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const dclm::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const dclm::TrainingDiverged& e) {
    std::cerr << "numerical divergence: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
