#include "spikeguard/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spikeguard/error.hpp"

namespace spikeguard {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size())
    fail(ErrorCode::ShapeMismatch, "tensor shape " + shape_str(shape_) + " does not match " +
                                       std::to_string(data_.size()) + " values");
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(m * n);
  for (const auto& r : rows) {
    if (r.size() != n) fail(ErrorCode::ShapeMismatch, "ragged matrix literal");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({m, n}, std::move(data));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size())
    fail(ErrorCode::ShapeMismatch, "cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::slice(std::size_t begin, std::size_t count) const {
  if (rank() == 0 || begin + count > shape_[0]) fail(ErrorCode::ShapeMismatch, "slice out of range");
  const std::size_t stride = data_.size() / shape_[0];
  Shape s = shape_;
  s[0] = count;
  return Tensor(std::move(s), std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                                                  data_.begin() + static_cast<std::ptrdiff_t>((begin + count) * stride)));
}

void Tensor::assign_slice(std::size_t begin, const Tensor& src) {
  const std::size_t stride = data_.size() / shape_[0];
  if (src.size() % stride != 0 || begin * stride + src.size() > data_.size())
    fail(ErrorCode::ShapeMismatch, "assign_slice out of range");
  std::copy(src.data_.begin(), src.data_.end(), data_.begin() + static_cast<std::ptrdiff_t>(begin * stride));
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
    fail(ErrorCode::ShapeMismatch, "matmul " + shape_str(a.shape()) + " * " + shape_str(b.shape()));
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = pa[i * k + p];
      if (s == 0.0) continue;  // spikes and pixels are mostly zero
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += s * brow[j];
    }
  }
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0))
    fail(ErrorCode::ShapeMismatch, "matmul_tn " + shape_str(a.shape()) + " * " + shape_str(b.shape()));
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({k, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = pb + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = pa[i * k + p];
      if (s == 0.0) continue;
      double* row = pc + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += s * brow[j];
    }
  }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(1))
    fail(ErrorCode::ShapeMismatch, "matmul_nt " + shape_str(a.shape()) + " * " + shape_str(b.shape()));
  const std::size_t m = a.dim(0), n = a.dim(1), k = b.dim(0);
  Tensor c({m, k});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = pa + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = pb + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
      pc[i * k + p] = acc;
    }
  }
  return c;
}

namespace {

void check_conv_shapes(const Shape& x, const Tensor& kernel) {
  if (x.size() != 3 || kernel.rank() != 4 || kernel.dim(2) != 3 || kernel.dim(3) != 3)
    fail(ErrorCode::ShapeMismatch, "conv2d expects x[c,h,w] and k[o,c,3,3], got " + shape_str(x) + " and " +
                                       shape_str(kernel.shape()));
  if (kernel.dim(1) != x[0])
    fail(ErrorCode::ShapeMismatch, "conv2d channel mismatch: input has " + std::to_string(x[0]) +
                                       ", kernel expects " + std::to_string(kernel.dim(1)));
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& kernel) {
  check_conv_shapes(x.shape(), kernel);
  const std::size_t ci = x.dim(0), h = x.dim(1), w = x.dim(2), co = kernel.dim(0);
  Tensor y({co, h, w});
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t c = 0; c < ci; ++c)
      for (std::size_t ky = 0; ky < 3; ++ky)
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const double kv = kernel[((o * ci + c) * 3 + ky) * 3 + kx];
          if (kv == 0.0) continue;
          for (std::size_t i = 0; i < h; ++i) {
            const std::ptrdiff_t si = static_cast<std::ptrdiff_t>(i + ky) - 1;
            if (si < 0 || si >= static_cast<std::ptrdiff_t>(h)) continue;
            const double* xrow = x.data().data() + (c * h + static_cast<std::size_t>(si)) * w;
            double* yrow = &y[(o * h + i) * w];
            const std::size_t j0 = kx == 0 ? 1 : 0;
            const std::size_t j1 = kx == 2 ? w - 1 : w;
            for (std::size_t j = j0; j < j1; ++j) yrow[j] += kv * xrow[j + kx - 1];
          }
        }
  return y;
}

Tensor conv2d_backward_input(const Tensor& dy, const Tensor& kernel) {
  if (dy.rank() != 3 || kernel.rank() != 4 || dy.dim(0) != kernel.dim(0))
    fail(ErrorCode::ShapeMismatch, "conv2d_backward_input shape mismatch");
  const std::size_t co = kernel.dim(0), ci = kernel.dim(1), h = dy.dim(1), w = dy.dim(2);
  Tensor dx({ci, h, w});
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t c = 0; c < ci; ++c)
      for (std::size_t ky = 0; ky < 3; ++ky)
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const double kv = kernel[((o * ci + c) * 3 + ky) * 3 + kx];
          if (kv == 0.0) continue;
          for (std::size_t i = 0; i < h; ++i) {
            const std::ptrdiff_t si = static_cast<std::ptrdiff_t>(i + ky) - 1;
            if (si < 0 || si >= static_cast<std::ptrdiff_t>(h)) continue;
            double* xrow = &dx[(c * h + static_cast<std::size_t>(si)) * w];
            const double* yrow = dy.data().data() + (o * h + i) * w;
            const std::size_t j0 = kx == 0 ? 1 : 0;
            const std::size_t j1 = kx == 2 ? w - 1 : w;
            for (std::size_t j = j0; j < j1; ++j) xrow[j + kx - 1] += kv * yrow[j];
          }
        }
  return dx;
}

void conv2d_backward_kernel(const Tensor& x, const Tensor& dy, Tensor& dk) {
  check_conv_shapes(x.shape(), dk);
  const std::size_t ci = x.dim(0), h = x.dim(1), w = x.dim(2), co = dk.dim(0);
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t c = 0; c < ci; ++c)
      for (std::size_t ky = 0; ky < 3; ++ky)
        for (std::size_t kx = 0; kx < 3; ++kx) {
          double acc = 0.0;
          for (std::size_t i = 0; i < h; ++i) {
            const std::ptrdiff_t si = static_cast<std::ptrdiff_t>(i + ky) - 1;
            if (si < 0 || si >= static_cast<std::ptrdiff_t>(h)) continue;
            const double* xrow = x.data().data() + (c * h + static_cast<std::size_t>(si)) * w;
            const double* yrow = dy.data().data() + (o * h + i) * w;
            const std::size_t j0 = kx == 0 ? 1 : 0;
            const std::size_t j1 = kx == 2 ? w - 1 : w;
            for (std::size_t j = j0; j < j1; ++j) acc += yrow[j] * xrow[j + kx - 1];
          }
          dk[((o * ci + c) * 3 + ky) * 3 + kx] += acc;
        }
}

void add_inplace(Tensor& dst, const Tensor& src) {
  if (dst.size() != src.size())
    fail(ErrorCode::ShapeMismatch, "add " + shape_str(dst.shape()) + " += " + shape_str(src.shape()));
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

void scale_inplace(Tensor& dst, double s) {
  for (auto& v : dst.data()) v *= s;
}

double sum(const Tensor& t) {
  double acc = 0.0;
  for (double v : t.data()) acc += v;
  return acc;
}

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) fail(ErrorCode::ShapeMismatch, "max_abs_diff size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace spikeguard
