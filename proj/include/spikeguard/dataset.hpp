#pragma once

#include <string>
#include <vector>

#include "spikeguard/rng.hpp"
#include "spikeguard/tensor.hpp"

namespace spikeguard {

struct Dataset {
  Tensor images;            // [N, features...]
  std::vector<int> labels;  // N entries in [0, classes)
  std::size_t classes = 10;

  std::size_t size() const noexcept { return labels.size(); }
  Dataset head(std::size_t count) const;
  Dataset rows(const std::vector<std::size_t>& idx) const;
};

/// IDX images (magic 0x00000803) and labels (0x00000801), big-endian
/// headers, one unsigned byte per value. Pixels map to byte / 255.
Dataset parse_mnist_idx(const std::string& image_bytes, const std::string& label_bytes);
Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);

/// Isotropic unit-variance Gaussian clusters; class k is centred at
/// (sep / sqrt 2) e_{k mod dim}, so two classes sit sep apart. Labels cycle
/// through the classes and are then shuffled.
Dataset synth_blobs(const Rng& rng, std::size_t n, std::size_t classes, std::size_t dim, double sep);

/// Affine squash of every value into [0, 1]: 0.5 + v / (2 scale), clamped.
void squash_unit_interval(Dataset& data, double scale);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace spikeguard
