#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "alada/alloc_audit.hpp"

namespace alada {

/// Dense row-major matrix of doubles. A vector is an m x 1 or 1 x n Matrix.
class Matrix {
 public:
  /// Throws DimensionError if either dimension is zero.
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Adopts `data` (row-major) without copying; its length must equal rows * cols.
  Matrix(std::size_t rows, std::size_t cols, Vector data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  /// Reinterprets the buffer with new dimensions; no data moves.
  void reshape(std::size_t rows, std::size_t cols);
  /// Hands the buffer over; the matrix is left empty.
  Vector release() && noexcept;

  void fill(double value) noexcept;

  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  Vector data_;
};

Vector make_vector(std::initializer_list<double> values);

// Entrywise arithmetic. Binary forms require identical shapes (DimensionError).
// div throws DomainError on a zero divisor; sqrt throws DomainError on a negative entry.
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix mul(const Matrix& a, const Matrix& b);
Matrix div(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, double s);
Matrix mul(const Matrix& a, double s);
Matrix div(const Matrix& a, double s);
Matrix square(const Matrix& a);
Matrix sqrt(const Matrix& a);
Matrix max(const Matrix& a, double floor);

// In-place variants write into the first argument.
void add_inplace(Matrix& a, const Matrix& b);
void sub_inplace(Matrix& a, const Matrix& b);
void mul_inplace(Matrix& a, const Matrix& b);
void div_inplace(Matrix& a, const Matrix& b);
void scale_inplace(Matrix& a, double s);
void square_inplace(Matrix& a);
void sqrt_inplace(Matrix& a);
void max_inplace(Matrix& a, double floor);
/// a <- a + s * b
void axpy_inplace(Matrix& a, double s, const Matrix& b);

/// A v, with v of length cols.
Vector matvec(const Matrix& a, std::span<const double> v);
/// A^T u, with u of length rows.
Vector matvec_t(const Matrix& a, std::span<const double> u);
Matrix outer(std::span<const double> p, std::span<const double> q);

double dot(std::span<const double> a, std::span<const double> b);
double sq_norm(std::span<const double> v);
double fro(const Matrix& a);
double inf_norm(const Matrix& a);
double sum(std::span<const double> v);

}  // namespace alada
