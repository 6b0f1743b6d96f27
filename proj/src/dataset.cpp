#include "spikeguard/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spikeguard/error.hpp"
#include "spikeguard/network.hpp"

namespace spikeguard {

Dataset Dataset::head(std::size_t count) const {
  std::vector<std::size_t> idx(std::min(count, size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return rows(idx);
}

Dataset Dataset::rows(const std::vector<std::size_t>& idx) const {
  Dataset d;
  d.classes = classes;
  d.images = batch_rows(images, idx);
  for (std::size_t i : idx) d.labels.push_back(labels.at(i));
  return d;
}

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t be32(const std::string& b, std::size_t off, const std::string& what) {
  if (b.size() < off + 4) fail(ErrorCode::Length, what + ": truncated header");
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(b[off])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 3]));
}

}  // namespace

Dataset parse_mnist_idx(const std::string& image_bytes, const std::string& label_bytes) {
  const std::uint32_t im = be32(image_bytes, 0, "images");
  if (im != kImageMagic)
    fail(ErrorCode::Format, "images: bad IDX magic " + std::to_string(im) + " (expected 2051)");
  const std::uint32_t lm = be32(label_bytes, 0, "labels");
  if (lm != kLabelMagic)
    fail(ErrorCode::Format, "labels: bad IDX magic " + std::to_string(lm) + " (expected 2049)");
  const std::size_t n = be32(image_bytes, 4, "images"), rows = be32(image_bytes, 8, "images"),
                    cols = be32(image_bytes, 12, "images");
  const std::size_t nl = be32(label_bytes, 4, "labels");
  if (n != nl)
    fail(ErrorCode::Format, "image count " + std::to_string(n) + " does not match label count " + std::to_string(nl));
  const std::size_t px = rows * cols;
  if (image_bytes.size() < 16 + n * px)
    fail(ErrorCode::Length, "images: expected " + std::to_string(16 + n * px) + " bytes, file has " +
                                std::to_string(image_bytes.size()));
  if (label_bytes.size() < 8 + n)
    fail(ErrorCode::Length, "labels: expected " + std::to_string(8 + n) + " bytes, file has " +
                                std::to_string(label_bytes.size()));
  Dataset d;
  d.images = Tensor({n, px});
  for (std::size_t i = 0; i < n * px; ++i)
    d.images[i] = static_cast<double>(static_cast<unsigned char>(image_bytes[16 + i])) / 255.0;
  d.labels.resize(n);
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = static_cast<unsigned char>(label_bytes[8 + i]);
    d.labels[i] = v;
    max_label = std::max<std::size_t>(max_label, v);
  }
  d.classes = std::max<std::size_t>(10, max_label + 1);
  return d;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  return parse_mnist_idx(read_file(images_path), read_file(labels_path));
}

Dataset synth_blobs(const Rng& rng, std::size_t n, std::size_t classes, std::size_t dim, double sep) {
  require(n >= 1 && classes >= 2 && dim >= 1, "synth_blobs: need n >= 1, classes >= 2, dim >= 1");
  require(sep >= 0.0, "synth_blobs: separation must be >= 0");
  Rng r = rng.substream(Stream::Dataset);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % classes);
  for (std::size_t i = n; i-- > 1;) std::swap(labels[i], labels[r.below(i + 1)]);
  Dataset d;
  d.classes = classes;
  d.labels = labels;
  d.images = Tensor({n, dim});
  const double c = sep / std::sqrt(2.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      const double centre = j == static_cast<std::size_t>(labels[i]) % dim ? c : 0.0;
      d.images.at(i, j) = centre + r.normal();
    }
  return d;
}

void squash_unit_interval(Dataset& data, double scale) {
  require(scale > 0.0, "squash scale must be > 0");
  for (double& v : data.images.data()) v = std::clamp(0.5 + v / (2.0 * scale), 0.0, 1.0);
}

}  // namespace spikeguard
