#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dclm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value run configuration; '#' starts a comment. Unknown keys are
// rejected so typos surface immediately. Keys are documented in the README.
struct RunConfig {
  std::uint64_t seed = 42;

  std::string images_path;
  std::string labels_path;
  int train_count = 1000;
  int test_count = 1000;

  std::string arch = "cnns-1";

  int train_epochs = 30;
  int train_batch = 32;
  double train_mu = 0.01;
  double train_alpha = 1e-4;

  int game_iters = 100;
  int game_batch = 32;
  double game_mu = 0.01;
  double game_alpha = 1e-4;
  double game_beta = 1e-4;
  int game_probe = 0;  // probe-set size for trace evaluation; 0 = record batch objective
  double game_stop_tol = 1e-6;
  int game_stop_window = 10;

  double eps_match = 0.1;
  double eps_pred = 0.05;
  double eps_smooth = 1e-9;
  std::string tnorm = "lukasiewicz";
  int inner_iters = 50;
  double inner_step = 0.05;

  std::string out_dir = "out";

  static RunConfig from_file(const std::string& path);
  void apply_key(const std::string& key, const std::string& value);
  void validate() const;
  std::string to_text() const;
};

}  // namespace dclm
