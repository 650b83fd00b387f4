#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gge::nn {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  // Throws ShapeError when data.size() != rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double v);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y = W x + b. Throws ShapeError on mismatch.
Vector linear_forward(const Matrix& weight, std::span<const double> bias,
                      std::span<const double> x);

// y = W^T g, used to push gradients through a linear map.
Vector transpose_times(const Matrix& weight, std::span<const double> g);

// acc += g x^T
void add_outer(Matrix& acc, std::span<const double> g, std::span<const double> x);

void add_into(std::span<double> acc, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);

Vector relu(std::span<const double> z);

// grad * 1[pre > 0]
Vector relu_backward(std::span<const double> pre, std::span<const double> grad);

double sigmoid(double z) noexcept;

// log(1 + e^z) without overflow.
double softplus(double z) noexcept;

Vector sigmoid(std::span<const double> z);

Vector softmax(std::span<const double> z);

double log_sum_exp(std::span<const double> z);

bool all_finite(std::span<const double> v) noexcept;

}  // namespace gge::nn
