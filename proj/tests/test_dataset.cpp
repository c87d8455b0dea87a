#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dclm/dataset.hpp"

using dclm::DataError;
using dclm::LabeledImage;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("dclm-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

// Two 2x2 images with known bytes.
void write_fixture(const std::string& images, const std::string& labels, std::uint32_t n_labels = 2,
                   std::uint32_t image_magic = 0x803) {
  std::ofstream img(images, std::ios::binary);
  write_be32(img, image_magic);
  write_be32(img, 2);
  write_be32(img, 2);
  write_be32(img, 2);
  const unsigned char pixels[8] = {0, 51, 102, 153, 204, 255, 10, 20};
  img.write(reinterpret_cast<const char*>(pixels), 8);
  img.close();
  std::ofstream lab(labels, std::ios::binary);
  write_be32(lab, 0x801);
  write_be32(lab, n_labels);
  for (std::uint32_t i = 0; i < n_labels; ++i) lab.put(static_cast<char>(7 - i));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("idx loading") {
  TempDir dir;
  const std::string images = dir.file("images");
  const std::string labels = dir.file("labels");

  SUBCASE("a hand-built fixture loads with exact pixels") {
    write_fixture(images, labels);
    const auto data = dclm::load_idx(images, labels);
    REQUIRE(data.size() == 2);
    CHECK(data[0].pixels.shape == std::vector<Eigen::Index>{1, 2, 2});
    CHECK(data[0].pixels.data[0] == 0.0);
    CHECK(data[0].pixels.data[1] == doctest::Approx(51.0 / 255.0));
    CHECK(data[0].pixels.data[3] == doctest::Approx(153.0 / 255.0));
    CHECK(data[1].pixels.data[1] == 1.0);
    CHECK(data[0].label == 7);
    CHECK(data[1].label == 6);
    CHECK(data[0].source_index == 0);
    CHECK(data[1].source_index == 1);
  }
  SUBCASE("an empty file reports truncation") {
    std::ofstream(images, std::ios::binary).close();
    write_fixture(dir.file("ok-img"), labels);
    try {
      dclm::load_idx(images, labels);
      FAIL("expected truncation error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }
  }
  SUBCASE("count mismatch is a named error") {
    write_fixture(images, labels, 3);
    try {
      dclm::load_idx(images, labels);
      FAIL("expected count mismatch");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("count mismatch") != std::string::npos);
      CHECK(msg.find('2') != std::string::npos);
      CHECK(msg.find('3') != std::string::npos);
    }
  }
  SUBCASE("bad magic is a named error") {
    write_fixture(images, labels, 2, 0x807);
    try {
      dclm::load_idx(images, labels);
      FAIL("expected magic error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
  }
  SUBCASE("missing file is rejected") {
    CHECK_THROWS_AS(dclm::load_idx(dir.file("nope"), labels), DataError);
  }
}

TEST_CASE("idx round trip is byte-exact") {
  TempDir dir;
  write_fixture(dir.file("img"), dir.file("lab"));
  const auto data = dclm::load_idx(dir.file("img"), dir.file("lab"));
  dclm::save_idx(data, dir.file("img2"), dir.file("lab2"));
  CHECK(slurp(dir.file("img")) == slurp(dir.file("img2")));
  CHECK(slurp(dir.file("lab")) == slurp(dir.file("lab2")));
}

TEST_CASE("subset sampling") {
  std::vector<LabeledImage> data(200);
  for (int i = 0; i < 200; ++i) {
    data[i].pixels = dclm::Tensor({1, 1, 1});
    data[i].label = i % 10;
    data[i].source_index = i;
  }
  SUBCASE("n equal to the pool size is a permutation") {
    const auto subset = dclm::sample_subset(data, 200, 5);
    std::vector<bool> seen(200, false);
    for (const auto& item : subset) seen[item.source_index] = true;
    for (bool s : seen) CHECK(s);
  }
  SUBCASE("the same seed reproduces the subset") {
    const auto a = dclm::sample_subset(data, 50, 9);
    const auto b = dclm::sample_subset(data, 50, 9);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].source_index == b[i].source_index);
  }
  SUBCASE("adjacent seeds give different subsets") {
    const auto a = dclm::sample_subset(data, 50, 9);
    const auto b = dclm::sample_subset(data, 50, 10);
    bool differ = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].source_index != b[i].source_index) differ = true;
    }
    CHECK(differ);
  }
  SUBCASE("oversampling is rejected") {
    CHECK_THROWS_AS(dclm::sample_subset(data, 201, 1), std::invalid_argument);
  }
  SUBCASE("train/test splits are disjoint") {
    const auto [train, test] = dclm::sample_train_test(data, 120, 80, 3);
    std::vector<bool> seen(200, false);
    for (const auto& item : train) seen[item.source_index] = true;
    for (const auto& item : test) {
      CHECK_FALSE(seen[item.source_index]);
    }
  }
}
