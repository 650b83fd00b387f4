#include "gge/nn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gge/error.hpp"

namespace gge::nn {

namespace {

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix " + dims(rows_, cols_) + " given " +
                     std::to_string(data_.size()) + " values");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Vector linear_forward(const Matrix& weight, std::span<const double> bias,
                      std::span<const double> x) {
  if (weight.cols() != x.size() || weight.rows() != bias.size()) {
    throw ShapeError("linear: weight " + dims(weight.rows(), weight.cols()) + ", bias " +
                     std::to_string(bias.size()) + ", input " + std::to_string(x.size()));
  }
  Vector y(bias.begin(), bias.end());
  for (std::size_t r = 0; r < weight.rows(); ++r) {
    y[r] += dot(weight.row(r), x);
  }
  return y;
}

Vector transpose_times(const Matrix& weight, std::span<const double> g) {
  if (weight.rows() != g.size()) {
    throw ShapeError("transpose_times: weight " + dims(weight.rows(), weight.cols()) +
                     ", gradient " + std::to_string(g.size()));
  }
  Vector out(weight.cols(), 0.0);
  for (std::size_t r = 0; r < weight.rows(); ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    const double* w = weight.row(r).data();
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += gr * w[c];
  }
  return out;
}

void add_outer(Matrix& acc, std::span<const double> g, std::span<const double> x) {
  if (acc.rows() != g.size() || acc.cols() != x.size()) {
    throw ShapeError("add_outer: accumulator " + dims(acc.rows(), acc.cols()) + ", outer " +
                     dims(g.size(), x.size()));
  }
  for (std::size_t r = 0; r < g.size(); ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    double* a = acc.row(r).data();
    for (std::size_t c = 0; c < x.size(); ++c) a[c] += gr * x[c];
  }
}

void add_into(std::span<double> acc, std::span<const double> v) {
  if (acc.size() != v.size()) {
    throw ShapeError("add_into: " + std::to_string(acc.size()) + " vs " +
                     std::to_string(v.size()));
  }
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  // Four independent partial sums; the summation order is fixed, so results
  // stay bit-reproducible.
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

Vector relu(std::span<const double> z) {
  Vector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] > 0.0 ? z[i] : 0.0;
  return out;
}

Vector relu_backward(std::span<const double> pre, std::span<const double> grad) {
  Vector out(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) out[i] = pre[i] > 0.0 ? grad[i] : 0.0;
  return out;
}

double sigmoid(double z) noexcept {
  // Branch on sign so exp never sees a large positive argument.
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) noexcept {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

Vector sigmoid(std::span<const double> z) {
  Vector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = sigmoid(z[i]);
  return out;
}

Vector softmax(std::span<const double> z) {
  Vector out(z.size());
  if (z.empty()) return out;
  const double m = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - m);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double log_sum_exp(std::span<const double> z) {
  if (z.empty()) return -INFINITY;
  const double m = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - m);
  return m + std::log(total);
}

bool all_finite(std::span<const double> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace gge::nn
