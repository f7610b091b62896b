#include "dse/tensor.hpp"

#include <cmath>
#include <sstream>

#include "dse/error.hpp"

namespace dse {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(product(shape_), 0.0) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("tensor dimension must be positive, got shape " + shape_str());
  }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != product(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str());
  }
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::row(std::vector<double> v) {
  std::size_t n = v.size();
  return Tensor({1, n}, std::move(v));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ShapeError("rows() requires rank-2 tensor, got " + shape_str());
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ShapeError("cols() requires rank-2 tensor, got " + shape_str());
  return shape_[1];
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << "x";
    os << shape_[i];
  }
  os << "]";
  return os.str();
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw ShapeError("matmul: incompatible shapes " + a.shape_str() + " and " + b.shape_str());
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c({m, n});
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = pa + i * k;
    double* crow = pc + i * n;
    for (std::size_t t = 0; t < k; ++t) {
      const double av = arow[t];
      const double* brow = pb + t * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor softmax_rows(const Tensor& x) {
  const std::size_t m = x.rows(), n = x.cols();
  Tensor y({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double mx = x.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, x.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double e = std::exp(x.at(i, j) - mx);
      y.at(i, j) = e;
      sum += e;
    }
    for (std::size_t j = 0; j < n; ++j) y.at(i, j) /= sum;
  }
  return y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (eps <= 0) throw ConfigError("layer_norm: eps must be positive");
  const std::size_t m = x.rows(), n = x.cols();
  if (gamma.size() != n || beta.size() != n) {
    throw ShapeError("layer_norm: gamma/beta size mismatch with " + x.shape_str());
  }
  Tensor y({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += x.at(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = x.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      y.at(i, j) = gamma[j] * ((x.at(i, j) - mean) * inv) + beta[j];
    }
  }
  return y;
}

Tensor transpose(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor t({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

}  // namespace dse
