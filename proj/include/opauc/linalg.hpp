#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace opauc {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

double squared_norm(std::span<const double> v);

bool all_finite(std::span<const double> v);

// Dense row-major matrix. Used for the d x d covariances of the exact learner
// and for test-side materialization; the sketch learner never builds one.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> values() const { return data_; }

  // out = A x
  void multiply(std::span<const double> x, std::span<double> out) const;
  Vector multiply(std::span<const double> x) const;

  void fill(double v);

  // Frobenius norm of (a - b); shapes must agree.
  friend double frobenius_distance(const Matrix& a, const Matrix& b);
  double frobenius_norm() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double frobenius_distance(const Matrix& a, const Matrix& b);

}  // namespace opauc
