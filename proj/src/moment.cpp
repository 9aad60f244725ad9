#include "alada/moment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "alada/errors.hpp"

namespace alada {

void ema_accumulate(std::span<double> buf, std::span<const double> grad, double decay) {
  if (buf.size() != grad.size()) throw DimensionError("ema_accumulate: length mismatch");
  const double fresh = 1.0 - decay;
  for (std::size_t k = 0; k < buf.size(); ++k) buf[k] = decay * buf[k] + fresh * grad[k];
}

double bias_correction_scale(double beta, std::size_t t) {
  if (t == 0) throw UsageError("bias correction requested before the first step");
  return 1.0 / (1.0 - std::pow(beta, static_cast<double>(t)));
}

FirstMoment::FirstMoment(std::size_t rows, std::size_t cols, double beta1) : buf_(rows, cols), beta1_(beta1) {}

void FirstMoment::accumulate(const Matrix& grad) {
  if (grad.rows() != buf_.rows() || grad.cols() != buf_.cols()) {
    throw DimensionError("FirstMoment::accumulate: gradient shape does not match the moment buffer");
  }
  ema_accumulate(buf_.data(), grad.data(), beta1_);
  ++t_;
}

Matrix FirstMoment::corrected() const { return mul(buf_, bias_correction_scale(beta1_, t_)); }

void init_factors(SecondMomentFactors& f, const Matrix& g0, double beta2) {
  const double mn = static_cast<double>(g0.size());
  const double v0 = sq_norm(g0.data()) / mn;
  const double root = std::sqrt(v0);
  f.p.assign(g0.rows(), root);
  f.q.assign(g0.cols(), root);
  f.v0 = v0;
  f.beta2 = beta2;
  f.t = 0;
}

SecondMomentFactors init_factors(const Matrix& g0, double beta2) {
  SecondMomentFactors f;
  init_factors(f, g0, beta2);
  return f;
}

namespace {

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

void reseed_if_dead(SecondMomentFactors& f, const Matrix& moment, double scale) {
  if (f.v0 != 0.0 || !all_zero(f.p) || !all_zero(f.q)) return;
  const double v0 = scale * scale * sq_norm(moment.data()) / static_cast<double>(moment.size());
  if (v0 == 0.0) return;
  const double root = std::sqrt(v0);
  std::fill(f.p.begin(), f.p.end(), root);
  std::fill(f.q.begin(), f.q.end(), root);
  f.v0 = v0;
  f.t = 0;
}

}  // namespace

void alternating_update(SecondMomentFactors& f, const Matrix& moment, double scale, double eps) {
  if (moment.rows() != f.rows() || moment.cols() != f.cols()) {
    throw DimensionError("alternating_update: moment is " + std::to_string(moment.rows()) + "x" +
                         std::to_string(moment.cols()) + " but factors are " + std::to_string(f.rows()) + "x" +
                         std::to_string(f.cols()));
  }
  reseed_if_dead(f, moment, scale);

  const double beta2 = f.beta2;
  const double s2 = scale * scale;
  if (f.t % 2 == 0) {
    const double coef = (1.0 - beta2) * s2 / (sq_norm(f.q) + eps);
    for (std::size_t i = 0; i < f.rows(); ++i) {
      const auto r = moment.row(i);
      double vq = 0.0;
      for (std::size_t j = 0; j < r.size(); ++j) vq += r[j] * r[j] * f.q[j];
      f.p[i] = beta2 * f.p[i] + coef * vq;
    }
  } else {
    const double coef = (1.0 - beta2) * s2 / (sq_norm(f.p) + eps);
    for (double& qj : f.q) qj *= beta2;
    for (std::size_t i = 0; i < f.rows(); ++i) {
      const auto r = moment.row(i);
      const double w = coef * f.p[i];
      for (std::size_t j = 0; j < r.size(); ++j) f.q[j] += w * (r[j] * r[j]);
    }
  }
  ++f.t;
}

CorrectedSecondMoment::CorrectedSecondMoment(const SecondMomentFactors& f) : p_(f.p), q_(f.q) {
  if (f.t == 0) throw UsageError("second-moment correction requested before the first update");
  const double decay = std::pow(f.beta2, static_cast<double>(f.t));
  offset_ = decay * f.v0;
  inv_denom_ = 1.0 / (1.0 - decay);
}

double bias_corrected_second_moment_entry(const SecondMomentFactors& f, std::size_t i, std::size_t j) {
  if (i >= f.rows() || j >= f.cols()) throw DimensionError("second-moment entry index out of range");
  return CorrectedSecondMoment(f)(i, j);
}

Matrix reconstruct_corrected(const SecondMomentFactors& f) {
  const CorrectedSecondMoment entry(f);
  Matrix out(f.rows(), f.cols());
  for (std::size_t i = 0; i < f.rows(); ++i) {
    for (std::size_t j = 0; j < f.cols(); ++j) out(i, j) = entry(i, j);
  }
  return out;
}

}  // namespace alada
