#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dclm/rng.hpp"
#include "dclm/tensor.hpp"

namespace dclm {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LabeledImage {
  Tensor pixels;  // [1,28,28], values in [0,1]
  int label = 0;
  int source_index = 0;
};

// Reads an IDX image/label pair (big-endian, magic 0x803 / 0x801). Pixels are
// scaled by 1/255. Bad magic, truncation and count mismatches each raise a
// named DataError.
std::vector<LabeledImage> load_idx(const std::string& images_path, const std::string& labels_path);

// Serializes images back to IDX bytes (inverse of load_idx for byte-exact
// round trips).
void save_idx(const std::vector<LabeledImage>& data, const std::string& images_path,
              const std::string& labels_path);

// n items without replacement via a seeded Fisher-Yates shuffle; the PRNG is
// pinned (xoshiro256++), so subsets reproduce across platforms.
std::vector<LabeledImage> sample_subset(const std::vector<LabeledImage>& data, std::size_t n,
                                        std::uint64_t seed);

// Disjoint train/test split drawn with one shuffle of the full index range.
std::pair<std::vector<LabeledImage>, std::vector<LabeledImage>> sample_train_test(
    const std::vector<LabeledImage>& data, std::size_t n_train, std::size_t n_test,
    std::uint64_t seed);

}  // namespace dclm
