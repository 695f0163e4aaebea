#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mfmil::numkit {

/// Dense row-major matrix of float64.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    assert(data.size() == r * c);
  }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const Matrix&) const = default;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// y = A x for row-major A (rows x cols), x of length cols.
inline void gemv(std::span<const double> a, std::size_t rows, std::size_t cols, std::span<const double> x,
                 std::span<double> y) {
  assert(a.size() == rows * cols && x.size() == cols && y.size() == rows);
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(a.subspan(r * cols, cols), x);
}

/// y += A^T x for row-major A (rows x cols), x of length rows.
inline void gemv_t_acc(std::span<const double> a, std::size_t rows, std::size_t cols, std::span<const double> x,
                       std::span<double> y) {
  assert(a.size() == rows * cols && x.size() == rows && y.size() == cols);
  for (std::size_t r = 0; r < rows; ++r) axpy(x[r], a.subspan(r * cols, cols), y);
}

/// A += alpha * x y^T for row-major A (x.size() x y.size()).
inline void ger(double alpha, std::span<const double> x, std::span<const double> y, std::span<double> a) {
  assert(a.size() == x.size() * y.size());
  for (std::size_t r = 0; r < x.size(); ++r) axpy(alpha * x[r], y, a.subspan(r * y.size(), y.size()));
}

/// In-place numerically stable softmax.
inline void softmax_inplace(std::span<double> v) {
  if (v.empty()) return;
  const double m = *std::max_element(v.begin(), v.end());
  double z = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    z += x;
  }
  for (double& x : v) x /= z;
}

inline double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double z = 0.0;
  for (double x : v) z += std::exp(x - m);
  return m + std::log(z);
}

}  // namespace mfmil::numkit
