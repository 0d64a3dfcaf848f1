#include "opauc/linalg.hpp"

#include <cassert>
#include <cmath>

namespace opauc {

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double squared_norm(std::span<const double> v) { return dot(v, v); }

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

void Matrix::multiply(std::span<const double> x, std::span<double> out) const {
  assert(x.size() == cols_ && out.size() == rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = dot(row(i), x);
}

Vector Matrix::multiply(std::span<const double> x) const {
  Vector out(rows_);
  multiply(x, out);
  return out;
}

void Matrix::fill(double v) {
  for (double& x : data_) x = v;
}

double Matrix::frobenius_norm() const { return std::sqrt(squared_norm(data_)); }

double frobenius_distance(const Matrix& a, const Matrix& b) {
  assert(a.rows_ == b.rows_ && a.cols_ == b.cols_);
  double s = 0.0;
  for (std::size_t i = 0; i < a.data_.size(); ++i) {
    const double d = a.data_[i] - b.data_[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace opauc
