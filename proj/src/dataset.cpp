#include "dclm/dataset.hpp"

#include <fstream>

namespace dclm {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw DataError("truncated IDX file: " + path);
  }
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace

std::vector<LabeledImage> load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw DataError("cannot open IDX image file: " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw DataError("cannot open IDX label file: " + labels_path);

  const std::uint32_t img_magic = read_be32(img, images_path);
  if (img_magic != 0x00000803u) {
    throw DataError("bad IDX image magic in " + images_path + ": expected 0x803, got 0x" +
                    [&] { char b[16]; std::snprintf(b, sizeof b, "%x", img_magic); return std::string(b); }());
  }
  const std::uint32_t n_images = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);

  const std::uint32_t lab_magic = read_be32(lab, labels_path);
  if (lab_magic != 0x00000801u) {
    throw DataError("bad IDX label magic in " + labels_path + ": expected 0x801, got 0x" +
                    [&] { char b[16]; std::snprintf(b, sizeof b, "%x", lab_magic); return std::string(b); }());
  }
  const std::uint32_t n_labels = read_be32(lab, labels_path);
  if (n_images != n_labels) {
    throw DataError("IDX count mismatch: " + std::to_string(n_images) + " images vs " +
                    std::to_string(n_labels) + " labels");
  }

  std::vector<LabeledImage> out;
  out.reserve(n_images);
  std::vector<unsigned char> pixel_buf(rows * cols);
  for (std::uint32_t i = 0; i < n_images; ++i) {
    if (!img.read(reinterpret_cast<char*>(pixel_buf.data()), pixel_buf.size())) {
      throw DataError("truncated IDX file: " + images_path + " at image " + std::to_string(i));
    }
    char label_byte;
    if (!lab.read(&label_byte, 1)) {
      throw DataError("truncated IDX file: " + labels_path + " at label " + std::to_string(i));
    }
    LabeledImage item;
    item.pixels = Tensor({1, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)});
    for (std::size_t p = 0; p < pixel_buf.size(); ++p) {
      item.pixels.data[static_cast<Eigen::Index>(p)] = pixel_buf[p] / 255.0;
    }
    item.label = static_cast<unsigned char>(label_byte);
    item.source_index = static_cast<int>(i);
    out.push_back(std::move(item));
  }
  return out;
}

void save_idx(const std::vector<LabeledImage>& data, const std::string& images_path,
              const std::string& labels_path) {
  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw DataError("cannot write IDX image file: " + images_path);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) throw DataError("cannot write IDX label file: " + labels_path);

  const Eigen::Index rows = data.empty() ? 28 : data[0].pixels.dim(1);
  const Eigen::Index cols = data.empty() ? 28 : data[0].pixels.dim(2);
  write_be32(img, 0x00000803u);
  write_be32(img, static_cast<std::uint32_t>(data.size()));
  write_be32(img, static_cast<std::uint32_t>(rows));
  write_be32(img, static_cast<std::uint32_t>(cols));
  write_be32(lab, 0x00000801u);
  write_be32(lab, static_cast<std::uint32_t>(data.size()));

  for (const auto& item : data) {
    for (Eigen::Index p = 0; p < item.pixels.size(); ++p) {
      const double v = item.pixels.data[p] * 255.0;
      const auto byte = static_cast<unsigned char>(v + 0.5);
      img.put(static_cast<char>(byte));
    }
    lab.put(static_cast<char>(item.label));
  }
}

std::vector<LabeledImage> sample_subset(const std::vector<LabeledImage>& data, std::size_t n,
                                        std::uint64_t seed) {
  if (n > data.size()) {
    throw std::invalid_argument("sample_subset: requested " + std::to_string(n) + " of " +
                                std::to_string(data.size()) + " items");
  }
  Rng rng(seed);
  std::vector<int> order(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) order[i] = static_cast<int>(i);
  rng.shuffle(order);
  std::vector<LabeledImage> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(data[order[i]]);
  return out;
}

std::pair<std::vector<LabeledImage>, std::vector<LabeledImage>> sample_train_test(
    const std::vector<LabeledImage>& data, std::size_t n_train, std::size_t n_test,
    std::uint64_t seed) {
  if (n_train + n_test > data.size()) {
    throw std::invalid_argument("sample_train_test: requested " +
                                std::to_string(n_train + n_test) + " of " +
                                std::to_string(data.size()) + " items");
  }
  Rng rng(seed);
  std::vector<int> order(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) order[i] = static_cast<int>(i);
  rng.shuffle(order);
  std::pair<std::vector<LabeledImage>, std::vector<LabeledImage>> out;
  out.first.reserve(n_train);
  out.second.reserve(n_test);
  for (std::size_t i = 0; i < n_train; ++i) out.first.push_back(data[order[i]]);
  for (std::size_t i = 0; i < n_test; ++i) out.second.push_back(data[order[n_train + i]]);
  return out;
}

}  // namespace dclm
