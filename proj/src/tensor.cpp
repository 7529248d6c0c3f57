#include "freqkan/tensor.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "freqkan/errors.hpp"
#include "freqkan/kernels/kernels.hpp"

namespace freqkan {

namespace {

std::int64_t checked_numel(const std::vector<std::int64_t>& shape) {
  if (shape.empty() || shape.size() > 3)
    throw ShapeError("tensor rank must be 1..3, got rank " +
                     std::to_string(shape.size()));
  std::int64_t n = 1;
  for (std::int64_t d : shape) {
    if (d <= 0)
      throw ShapeError("tensor extents must be positive, got shape " +
                       shape_str(shape));
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::int64_t> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(checked_numel(shape_)), 0.0);
}

Tensor Tensor::zeros(std::vector<std::int64_t> shape) {
  return Tensor(std::move(shape));
}

Tensor Tensor::full(std::vector<std::int64_t> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

Tensor Tensor::from(std::vector<std::int64_t> shape,
                    std::vector<double> values) {
  const std::int64_t n = checked_numel(shape);
  if (n != static_cast<std::int64_t>(values.size()))
    throw ShapeError("tensor data size " + std::to_string(values.size()) +
                     " does not match shape " + freqkan::shape_str(shape));
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(values);
  return t;
}

std::string Tensor::shape_str() const { return freqkan::shape_str(shape_); }

void Tensor::fill(double value) {
  for (double& x : data_) x = value;
}

void Tensor::ensure_finite(const std::string& what) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i]))
      throw NumericError("non-finite value at flat index " +
                         std::to_string(i) + " in " + what + " (shape " +
                         shape_str() + ")");
  }
}

std::string shape_str(const std::vector<std::int64_t>& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
}

}  // namespace

Tensor ew_add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "ew_add");
  Tensor y(a.shape());
  kernels::ops().add(a.data(), b.data(), y.data(),
                     static_cast<std::size_t>(a.numel()));
  return y;
}

Tensor ew_sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "ew_sub");
  Tensor y(a.shape());
  kernels::ops().sub(a.data(), b.data(), y.data(),
                     static_cast<std::size_t>(a.numel()));
  return y;
}

Tensor ew_mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "ew_mul");
  Tensor y(a.shape());
  kernels::ops().mul(a.data(), b.data(), y.data(),
                     static_cast<std::size_t>(a.numel()));
  return y;
}

Tensor ew_add(const Tensor& a, double b) {
  Tensor y = a;
  for (double& x : y.vec()) x += b;
  return y;
}

Tensor ew_sub(const Tensor& a, double b) { return ew_add(a, -b); }

Tensor ew_mul(const Tensor& a, double b) {
  Tensor y = a;
  kernels::ops().scal(b, y.data(), static_cast<std::size_t>(y.numel()));
  return y;
}

Tensor ew_tanh(const Tensor& a) {
  Tensor y(a.shape());
  const double* in = a.data();
  double* out = y.data();
  const std::int64_t n = a.numel();
  for (std::int64_t i = 0; i < n; ++i) out[i] = std::tanh(in[i]);
  return y;
}

}  // namespace freqkan
