#pragma once

#include <cstddef>
#include <span>

#include "alada/tensor.hpp"

namespace alada {

/// buf <- decay * buf + (1 - decay) * grad, entrywise.
void ema_accumulate(std::span<double> buf, std::span<const double> grad, double decay);

/// 1 / (1 - beta^t). UsageError when t == 0.
double bias_correction_scale(double beta, std::size_t t);

/// Exponential moving average of gradients, M_t, with its own step counter.
class FirstMoment {
 public:
  FirstMoment(std::size_t rows, std::size_t cols, double beta1);

  void accumulate(const Matrix& grad);
  /// M_t / (1 - beta1^t). Requires at least one accumulation.
  Matrix corrected() const;

  const Matrix& buffer() const noexcept { return buf_; }
  double beta1() const noexcept { return beta1_; }
  std::size_t step() const noexcept { return t_; }

 private:
  Matrix buf_;
  double beta1_;
  std::size_t t_ = 0;
};

/// Rank-one factors p q^T of the second-moment estimate, plus the initial scale v0.
///
/// `t` counts alternating updates; its parity picks which factor moves next
/// (even: p, odd: q).
struct SecondMomentFactors {
  Vector p;
  Vector q;
  double v0 = 0.0;
  double beta2 = 0.0;
  std::size_t t = 0;

  std::size_t rows() const noexcept { return p.size(); }
  std::size_t cols() const noexcept { return q.size(); }
};

/// v0 = |G0|^2 / (mn), p = sqrt(v0) 1_m, q = sqrt(v0) 1_n.
SecondMomentFactors init_factors(const Matrix& g0, double beta2);
/// Same rule, written into existing factors; reuses their storage when the capacity fits.
void init_factors(SecondMomentFactors& factors, const Matrix& g0, double beta2);

/// One alternating step against V = (scale * moment)^2, streamed row by row.
///
/// Even t: p <- beta2 p + (1 - beta2) V q / (|q|^2 + eps).
/// Odd t:  q <- beta2 q + (1 - beta2) V^T p / (|p|^2 + eps).
/// Both updates run in place over p or q; nothing of size m or n is allocated.
///
/// A factor pair that is identically zero (v0 = 0, from an all-zero first gradient)
/// can never leave zero under the update rule, so it is re-seeded from the first
/// nonzero V with the init_factors rule (v0 = sum(V) / mn) and the counter restarts.
void alternating_update(SecondMomentFactors& factors, const Matrix& moment, double scale, double eps);
inline void alternating_update(SecondMomentFactors& factors, const Matrix& mtilde, double eps) {
  alternating_update(factors, mtilde, 1.0, eps);
}

/// Entry map U~_ij = max(0, (p_i q_j - beta2^t v0) / (1 - beta2^t)).
class CorrectedSecondMoment {
 public:
  explicit CorrectedSecondMoment(const SecondMomentFactors& factors);

  double operator()(std::size_t i, std::size_t j) const noexcept {
    const double u = (p_[i] * q_[j] - offset_) * inv_denom_;
    return u > 0.0 ? u : 0.0;
  }

 private:
  std::span<const double> p_;
  std::span<const double> q_;
  double offset_;
  double inv_denom_;
};

double bias_corrected_second_moment_entry(const SecondMomentFactors& factors, std::size_t i, std::size_t j);
/// Materializes every corrected entry. Test and diagnostic use only.
Matrix reconstruct_corrected(const SecondMomentFactors& factors);

}  // namespace alada
