#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dclm/config.hpp"

using dclm::ConfigError;
using dclm::RunConfig;

namespace {

std::string write_temp_config(const std::string& body) {
  static int counter = 0;
  const auto path = std::filesystem::temp_directory_path() /
                    ("dclm-config-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) +
                     ".cfg");
  std::ofstream(path) << body;
  return path.string();
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("a full config round-trips through its text form") {
    const std::string path = write_temp_config(
        "seed=7\n"
        "data.images=a.idx\n"
        "data.labels=b.idx\n"
        "arch=cnns-2\n"
        "train.epochs=5 # comment\n"
        "logic.eps_match=0.25\n");
    const RunConfig cfg = RunConfig::from_file(path);
    CHECK(cfg.seed == 7);
    CHECK(cfg.arch == "cnns-2");
    CHECK(cfg.train_epochs == 5);
    CHECK(cfg.eps_match == 0.25);
    const std::string again = write_temp_config(cfg.to_text());
    const RunConfig cfg2 = RunConfig::from_file(again);
    CHECK(cfg2.to_text() == cfg.to_text());
    std::filesystem::remove(path);
    std::filesystem::remove(again);
  }
  SUBCASE("unknown keys are named") {
    const std::string path = write_temp_config(
        "data.images=a\ndata.labels=b\nlogic.eps_matchh=0.2\n");
    try {
      RunConfig::from_file(path);
      FAIL("expected unknown-key error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("logic.eps_matchh") != std::string::npos);
    }
    std::filesystem::remove(path);
  }
  SUBCASE("missing data paths are named") {
    const std::string path = write_temp_config("seed=1\n");
    try {
      RunConfig::from_file(path);
      FAIL("expected missing-key error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("data.images") != std::string::npos);
    }
    std::filesystem::remove(path);
  }
  SUBCASE("out-of-range thresholds are rejected") {
    const std::string path = write_temp_config(
        "data.images=a\ndata.labels=b\nlogic.eps_match=1.5\n");
    CHECK_THROWS_AS(RunConfig::from_file(path), ConfigError);
    std::filesystem::remove(path);
  }
  SUBCASE("malformed numbers are rejected") {
    const std::string path = write_temp_config(
        "data.images=a\ndata.labels=b\ntrain.epochs=five\n");
    CHECK_THROWS_AS(RunConfig::from_file(path), ConfigError);
    std::filesystem::remove(path);
  }
  SUBCASE("missing file is rejected") {
    CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/dclm.cfg"), ConfigError);
  }
}
