#pragma once

// Dense row-major tensor of doubles, rank 1 to 3.  Compute happens in f64
// end to end; f32 appears only in the checkpoint wire format.

#include <cstdint>
#include <string>
#include <vector>

namespace freqkan {

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> shape);  // zero-filled

  static Tensor zeros(std::vector<std::int64_t> shape);
  static Tensor full(std::vector<std::int64_t> shape, double value);
  static Tensor from(std::vector<std::int64_t> shape,
                     std::vector<double> values);

  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t numel() const {
    return static_cast<std::int64_t>(data_.size());
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator()(std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator()(std::int64_t i) const {
    return data_[static_cast<std::size_t>(i)];
  }
  double& operator()(std::int64_t i, std::int64_t j) {
    return data_[static_cast<std::size_t>(i * shape_[1] + j)];
  }
  double operator()(std::int64_t i, std::int64_t j) const {
    return data_[static_cast<std::size_t>(i * shape_[1] + j)];
  }
  double& operator()(std::int64_t i, std::int64_t j, std::int64_t k) {
    return data_[static_cast<std::size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  double operator()(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return data_[static_cast<std::size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

  void fill(double value);
  // Throws NumericError naming `what` if any entry is NaN or infinite.
  void ensure_finite(const std::string& what) const;

 private:
  std::vector<std::int64_t> shape_;
  std::vector<double> data_;
};

std::string shape_str(const std::vector<std::int64_t>& shape);

// Elementwise ops (shape-checked; scalar overloads broadcast).
Tensor ew_add(const Tensor& a, const Tensor& b);
Tensor ew_sub(const Tensor& a, const Tensor& b);
Tensor ew_mul(const Tensor& a, const Tensor& b);
Tensor ew_add(const Tensor& a, double b);
Tensor ew_sub(const Tensor& a, double b);
Tensor ew_mul(const Tensor& a, double b);
Tensor ew_tanh(const Tensor& a);

}  // namespace freqkan
