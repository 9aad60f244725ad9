#pragma once

// Slow reference implementations used as oracles by the unit and acceptance tests.
// They materialize every m x n quantity and share no code paths with the library kernels.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace reference {

using Mat = std::vector<std::vector<double>>;

inline Mat zeros(std::size_t m, std::size_t n) { return Mat(m, std::vector<double>(n, 0.0)); }

inline Mat outer(const std::vector<double>& p, const std::vector<double>& q) {
  Mat out = zeros(p.size(), q.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) out[i][j] = p[i] * q[j];
  return out;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  const std::size_t m = a.size(), k = b.size(), n = b[0].size();
  Mat out = zeros(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t j = 0; j < n; ++j) out[i][j] += a[i][l] * b[l][j];
  return out;
}

inline double sq_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double fro_dist(const Mat& a, const Mat& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) s += (a[i][j] - b[i][j]) * (a[i][j] - b[i][j]);
  return std::sqrt(s);
}

/// Low-rank variance accumulation in matrix form, applied to U_t = p q^T:
///   even t: U <- beta2 U + (1 - beta2) V (q q^T) / (|q|^2 + eps)
///   odd t:  U <- beta2 U + (1 - beta2) (p p^T) V / (|p|^2 + eps)
inline Mat materialized_update(const Mat& v, const std::vector<double>& p, const std::vector<double>& q,
                               double beta2, double eps, bool even) {
  const Mat u = outer(p, q);
  const Mat proj = even ? matmul(v, outer(q, q)) : matmul(outer(p, p), v);
  const double denom = (even ? sq_norm(q) : sq_norm(p)) + eps;
  Mat out = zeros(u.size(), u[0].size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < u[i].size(); ++j)
      out[i][j] = beta2 * u[i][j] + (1.0 - beta2) * proj[i][j] / denom;
  return out;
}

/// Adam with bias correction, written directly from its textbook definition.
struct Adam {
  Mat m, u;
  std::size_t t = 0;
  Adam(std::size_t rows, std::size_t cols) : m(zeros(rows, cols)), u(zeros(rows, cols)) {}
  void step(Mat& x, const Mat& g, double lr, double b1, double b2, double eps) {
    ++t;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < x[i].size(); ++j) {
        m[i][j] = b1 * m[i][j] + (1 - b1) * g[i][j];
        u[i][j] = b2 * u[i][j] + (1 - b2) * g[i][j] * g[i][j];
        const double mh = m[i][j] / (1 - std::pow(b1, double(t)));
        const double uh = u[i][j] / (1 - std::pow(b2, double(t)));
        x[i][j] -= lr * mh / (std::sqrt(uh) + eps);
      }
  }
};

/// Generalized KL divergence sum(a log(a/b) - a + b) for nonnegative a and positive b.
inline double generalized_kl(const Mat& a, const Mat& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      const double x = a[i][j], y = b[i][j];
      s += (x > 0 ? x * std::log(x / y) : 0.0) - x + y;
    }
  return s;
}

}  // namespace reference
