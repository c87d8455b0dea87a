#include "dclm/config.hpp"

#include <fstream>
#include <sstream>

namespace dclm {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects an unsigned integer, got '" + value + "'");
  }
}

}  // namespace

void RunConfig::apply_key(const std::string& key, const std::string& value) {
  if (key == "seed") seed = parse_u64(key, value);
  else if (key == "data.images") images_path = value;
  else if (key == "data.labels") labels_path = value;
  else if (key == "data.train_count") train_count = parse_int(key, value);
  else if (key == "data.test_count") test_count = parse_int(key, value);
  else if (key == "arch") arch = value;
  else if (key == "train.epochs") train_epochs = parse_int(key, value);
  else if (key == "train.batch") train_batch = parse_int(key, value);
  else if (key == "train.mu") train_mu = parse_double(key, value);
  else if (key == "train.alpha") train_alpha = parse_double(key, value);
  else if (key == "game.iters") game_iters = parse_int(key, value);
  else if (key == "game.batch") game_batch = parse_int(key, value);
  else if (key == "game.mu") game_mu = parse_double(key, value);
  else if (key == "game.alpha") game_alpha = parse_double(key, value);
  else if (key == "game.beta") game_beta = parse_double(key, value);
  else if (key == "game.probe") game_probe = parse_int(key, value);
  else if (key == "game.stop_tol") game_stop_tol = parse_double(key, value);
  else if (key == "game.stop_window") game_stop_window = parse_int(key, value);
  else if (key == "logic.eps_match") eps_match = parse_double(key, value);
  else if (key == "logic.eps_pred") eps_pred = parse_double(key, value);
  else if (key == "logic.eps_smooth") eps_smooth = parse_double(key, value);
  else if (key == "logic.tnorm") tnorm = value;
  else if (key == "logic.inner_iters") inner_iters = parse_int(key, value);
  else if (key == "logic.inner_step") inner_step = parse_double(key, value);
  else if (key == "out") out_dir = value;
  else throw ConfigError("unknown config key: '" + key + "'");
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + " is not key=value: '" + line +
                        "'");
    }
    cfg.apply_key(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (images_path.empty()) throw ConfigError("missing config key: data.images");
  if (labels_path.empty()) throw ConfigError("missing config key: data.labels");
  if (train_count < 1 || test_count < 1) throw ConfigError("sample counts must be >= 1");
  if (arch != "cnns-1" && arch != "cnns-2" && arch != "cnns-3") {
    throw ConfigError("arch must be one of cnns-1, cnns-2, cnns-3; got '" + arch + "'");
  }
  if (train_epochs < 1 || train_batch < 1 || game_iters < 1 || game_batch < 1 ||
      inner_iters < 1 || game_stop_window < 1) {
    throw ConfigError("iteration and batch counts must be >= 1");
  }
  if (!(train_mu > 0.0) || !(game_mu > 0.0) || !(inner_step > 0.0)) {
    throw ConfigError("learning rates and step sizes must be positive");
  }
  if (train_alpha < 0.0 || game_alpha < 0.0 || game_beta < 0.0) {
    throw ConfigError("priors alpha/beta must be non-negative");
  }
  if (!in_unit(eps_match) || !in_unit(eps_pred) || !in_unit(eps_smooth)) {
    throw ConfigError("thresholds eps_match, eps_pred, eps_smooth must lie in (0,1)");
  }
  if (game_probe < 0) throw ConfigError("game.probe must be >= 0");
  if (tnorm != "lukasiewicz" && tnorm != "product" && tnorm != "minimum") {
    throw ConfigError("logic.tnorm must be lukasiewicz, product or minimum; got '" + tnorm + "'");
  }
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  out << "seed=" << seed << '\n'
      << "data.images=" << images_path << '\n'
      << "data.labels=" << labels_path << '\n'
      << "data.train_count=" << train_count << '\n'
      << "data.test_count=" << test_count << '\n'
      << "arch=" << arch << '\n'
      << "train.epochs=" << train_epochs << '\n'
      << "train.batch=" << train_batch << '\n'
      << "train.mu=" << train_mu << '\n'
      << "train.alpha=" << train_alpha << '\n'
      << "game.iters=" << game_iters << '\n'
      << "game.batch=" << game_batch << '\n'
      << "game.mu=" << game_mu << '\n'
      << "game.alpha=" << game_alpha << '\n'
      << "game.beta=" << game_beta << '\n'
      << "game.probe=" << game_probe << '\n'
      << "game.stop_tol=" << game_stop_tol << '\n'
      << "game.stop_window=" << game_stop_window << '\n'
      << "logic.eps_match=" << eps_match << '\n'
      << "logic.eps_pred=" << eps_pred << '\n'
      << "logic.eps_smooth=" << eps_smooth << '\n'
      << "logic.tnorm=" << tnorm << '\n'
      << "logic.inner_iters=" << inner_iters << '\n'
      << "logic.inner_step=" << inner_step << '\n'
      << "out=" << out_dir << '\n';
  return out.str();
}

}  // namespace dclm
