#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace spikeguard {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major array of doubles. Value type: copies own their storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  /// Same data, new shape of equal size.
  Tensor reshaped(Shape shape) const;
  /// Contiguous slice along the leading axis: rows [begin, begin+count).
  Tensor slice(std::size_t begin, std::size_t count) const;
  void assign_slice(std::size_t begin, const Tensor& src);

  bool all_finite() const;
  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

Tensor identity(std::size_t n);

/// a[m x k] * b[k x n]. Each output sums over k in ascending order.
Tensor matmul(const Tensor& a, const Tensor& b);
/// a[m x k]^T * b[m x n] -> [k x n], accumulated over m in ascending order.
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// a[m x n] * b[k x n]^T -> [m x k].
Tensor matmul_nt(const Tensor& a, const Tensor& b);

/// Same-padded 3x3 convolution, stride 1. x[c_in x h x w], k[c_out x c_in x 3 x 3].
Tensor conv2d(const Tensor& x, const Tensor& kernel);
/// Gradient of conv2d w.r.t. its input, given dy[c_out x h x w].
Tensor conv2d_backward_input(const Tensor& dy, const Tensor& kernel);
/// Gradient of conv2d w.r.t. the kernel, accumulated into dk.
void conv2d_backward_kernel(const Tensor& x, const Tensor& dy, Tensor& dk);

void add_inplace(Tensor& dst, const Tensor& src);
void scale_inplace(Tensor& dst, double s);
double sum(const Tensor& t);
double max_abs(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace spikeguard
