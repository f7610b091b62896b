#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dse {

// Row-major n-dimensional array of 64-bit floats. The single numeric
// carrier for the whole project; nearly all code works with rank-2
// tensors and treats vectors as 1 x n rows.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }
  static Tensor full(std::vector<std::size_t> shape, double v);
  // 1 x n row vector.
  static Tensor row(std::vector<double> v);
  static Tensor scalar(double v) { return Tensor({1, 1}, {v}); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rank-2 accessors.
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t i, std::size_t j) { return data_[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols() + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  std::string shape_str() const;
  bool all_finite() const;
  void fill(double v);

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// c[i][j] = sum_t a[i][t] * b[t][j]; throws ShapeError naming both shapes.
Tensor matmul(const Tensor& a, const Tensor& b);

// Per-row softmax with max subtraction.
Tensor softmax_rows(const Tensor& x);

// Per-row normalization to zero mean / unit variance (eps inside the
// sqrt), then scale by gamma and shift by beta (both 1 x n).
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);

Tensor transpose(const Tensor& a);

void check_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace dse
