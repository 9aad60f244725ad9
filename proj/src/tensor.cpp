#include "alada/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "alada/errors.hpp"

namespace alada {
namespace {

std::string shape_str(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
  }
}

template <class F>
void zip_inplace(Matrix& a, const Matrix& b, const char* op, F f) {
  require_same_shape(a, b, op);
  auto x = a.data();
  auto y = b.data();
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = f(x[k], y[k]);
}

template <class F>
void map_inplace(Matrix& a, F f) {
  for (double& x : a.data()) x = f(x);
}

void check_divisor(const Matrix& b) {
  for (double y : b.data()) {
    if (y == 0.0) throw DomainError("div: zero divisor");
  }
}

void check_nonnegative(const Matrix& a) {
  for (double x : a.data()) {
    if (!(x >= 0.0)) throw DomainError("sqrt: negative or NaN entry");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) throw DimensionError("Matrix: dimensions must be positive");
  data_.assign(rows * cols, fill);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) throw DimensionError("Matrix: dimensions must be positive");
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: buffer of " + std::to_string(data_.size()) + " scalars cannot hold " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m == 0 ? 0 : rows.begin()->size();
  Matrix out(m, n);
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != n) throw DimensionError("Matrix::from_rows: ragged rows");
    std::copy(r.begin(), r.end(), out.row(i++).begin());
  }
  return out;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

void Matrix::reshape(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0 || rows * cols != data_.size()) {
    throw DimensionError("Matrix::reshape: " + shape_str(*this) + " cannot become " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  }
  rows_ = rows;
  cols_ = cols;
}

Vector Matrix::release() && noexcept { return std::move(data_); }

void Matrix::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

Vector make_vector(std::initializer_list<double> values) { return Vector(values.begin(), values.end()); }

void add_inplace(Matrix& a, const Matrix& b) {
  zip_inplace(a, b, "add", [](double x, double y) { return x + y; });
}
void sub_inplace(Matrix& a, const Matrix& b) {
  zip_inplace(a, b, "sub", [](double x, double y) { return x - y; });
}
void mul_inplace(Matrix& a, const Matrix& b) {
  zip_inplace(a, b, "mul", [](double x, double y) { return x * y; });
}
void div_inplace(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "div");
  check_divisor(b);
  zip_inplace(a, b, "div", [](double x, double y) { return x / y; });
}
void scale_inplace(Matrix& a, double s) {
  map_inplace(a, [s](double x) { return x * s; });
}
void square_inplace(Matrix& a) {
  map_inplace(a, [](double x) { return x * x; });
}
void sqrt_inplace(Matrix& a) {
  check_nonnegative(a);
  map_inplace(a, [](double x) { return std::sqrt(x); });
}
void max_inplace(Matrix& a, double floor) {
  map_inplace(a, [floor](double x) { return std::max(x, floor); });
}
void axpy_inplace(Matrix& a, double s, const Matrix& b) {
  zip_inplace(a, b, "axpy", [s](double x, double y) { return x + s * y; });
}

Matrix add(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  add_inplace(out, b);
  return out;
}
Matrix sub(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  sub_inplace(out, b);
  return out;
}
Matrix mul(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  mul_inplace(out, b);
  return out;
}
Matrix div(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  div_inplace(out, b);
  return out;
}
Matrix add(const Matrix& a, double s) {
  Matrix out = a;
  map_inplace(out, [s](double x) { return x + s; });
  return out;
}
Matrix mul(const Matrix& a, double s) {
  Matrix out = a;
  scale_inplace(out, s);
  return out;
}
Matrix div(const Matrix& a, double s) {
  if (s == 0.0) throw DomainError("div: zero divisor");
  Matrix out = a;
  map_inplace(out, [s](double x) { return x / s; });
  return out;
}
Matrix square(const Matrix& a) {
  Matrix out = a;
  square_inplace(out);
  return out;
}
Matrix sqrt(const Matrix& a) {
  Matrix out = a;
  sqrt_inplace(out);
  return out;
}
Matrix max(const Matrix& a, double floor) {
  Matrix out = a;
  max_inplace(out, floor);
  return out;
}

Vector matvec(const Matrix& a, std::span<const double> v) {
  if (v.size() != a.cols()) {
    throw DimensionError("matvec: vector of length " + std::to_string(v.size()) + " against " + shape_str(a));
  }
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), v);
  return out;
}

Vector matvec_t(const Matrix& a, std::span<const double> u) {
  if (u.size() != a.rows()) {
    throw DimensionError("matvec_t: vector of length " + std::to_string(u.size()) + " against " + shape_str(a));
  }
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j] * u[i];
  }
  return out;
}

Matrix outer(std::span<const double> p, std::span<const double> q) {
  Matrix out(p.size(), q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < q.size(); ++j) r[j] = p[i] * q[j];
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

double sq_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double fro(const Matrix& a) { return std::sqrt(sq_norm(a.data())); }

double inf_norm(const Matrix& a) {
  double best = 0.0;
  for (double x : a.data()) best = std::max(best, std::abs(x));
  return best;
}

double sum(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc;
}

}  // namespace alada
