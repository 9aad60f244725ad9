#include "alada/optimizers.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "alada/errors.hpp"

namespace alada {

std::string_view to_string(OptimizerKind k) noexcept {
  switch (k) {
    case OptimizerKind::alada: return "alada";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::adafactor: return "adafactor";
    case OptimizerKind::sgd: return "sgd";
  }
  return "unknown";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view name) noexcept {
  for (OptimizerKind k : {OptimizerKind::alada, OptimizerKind::adam, OptimizerKind::adafactor, OptimizerKind::sgd}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

OptimizerConfig OptimizerConfig::defaults_for(OptimizerKind kind) {
  OptimizerConfig cfg;
  switch (kind) {
    case OptimizerKind::alada:
      cfg.beta1 = 0.9;
      cfg.beta2 = 0.9;
      cfg.eps = 1e-16;
      cfg.eps_placement = EpsPlacement::inside_sqrt;
      break;
    case OptimizerKind::adam:
      cfg.beta1 = 0.9;
      cfg.beta2 = 0.999;
      cfg.eps = 1e-8;
      cfg.eps_placement = EpsPlacement::outside_sqrt;
      break;
    case OptimizerKind::adafactor:
      cfg.beta1 = 0.0;
      cfg.beta2 = 0.999;
      cfg.eps = 1e-8;
      cfg.eps_placement = EpsPlacement::inside_sqrt;
      break;
    case OptimizerKind::sgd:
      cfg.beta1 = 0.0;
      cfg.beta2 = 0.0;
      cfg.eps = 1e-8;
      break;
  }
  return cfg;
}

void OptimizerConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1", "must lie in [0, 1), got " + std::to_string(beta1));
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2", "must lie in [0, 1), got " + std::to_string(beta2));
  if (!(eps > 0.0)) throw ConfigError("eps", "must be positive");
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw ConfigError("lr", "must be positive and finite");
  if (horizon == 0) throw ConfigError("steps", "must be at least 1");
}

BetaPair map_adam_betas(double beta1_adam, double beta2_adam) {
  if (!(beta1_adam >= 0.0 && beta1_adam < 1.0)) throw ConfigError("beta1", "must lie in [0, 1)");
  if (!(beta2_adam >= 0.0 && beta2_adam < 1.0)) throw ConfigError("beta2", "must lie in [0, 1)");
  const double keep = 1.0 - beta1_adam;
  double fresh = (1.0 - beta2_adam) / (keep * keep);
  // Boundary settings such as (0.9, 0.99) land a few ulps above 1.
  if (fresh > 1.0 && fresh <= 1.0 + 1e-12) fresh = 1.0;
  if (fresh > 1.0) {
    throw ConfigError("beta2", "Adam setting (" + std::to_string(beta1_adam) + ", " + std::to_string(beta2_adam) +
                                   ") maps to a negative beta2 = " + std::to_string(1.0 - fresh));
  }
  // Betas are written in decimal; rounding to 15 significant digits removes the representation
  // error of the inputs so that e.g. (0.9, 0.999) maps to the double 0.9 rather than one ulp below.
  // The shift is at most 5e-16 relative.
  char text[32];
  std::snprintf(text, sizeof text, "%.15g", 1.0 - fresh);
  return {beta1_adam, std::strtod(text, nullptr)};
}

std::size_t state_scalar_count(OptimizerKind kind, std::size_t m, std::size_t n) {
  switch (kind) {
    case OptimizerKind::adam: return 2 * m * n + 1;
    case OptimizerKind::adafactor: return m + n + 1;
    case OptimizerKind::alada: return m + n + 2;
    case OptimizerKind::sgd: return 0;
  }
  return 0;
}

namespace {

void require_same_shape(const Matrix& x, const Matrix& g, const char* who) {
  if (x.rows() != g.rows() || x.cols() != g.cols()) {
    throw DimensionError(std::string(who) + ": parameter is " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + " but gradient is " + std::to_string(g.rows()) + "x" +
                         std::to_string(g.cols()));
  }
}

double precondition(double num, double second, double eps, EpsPlacement where) noexcept {
  return where == EpsPlacement::inside_sqrt ? num / std::sqrt(second + eps) : num / (std::sqrt(second) + eps);
}

}  // namespace

void alada_step(Matrix& x, Matrix& grad_buf, AladaState& state, const OptimizerConfig& cfg, std::size_t t) {
  require_same_shape(x, grad_buf, "alada_step");
  if (!state.initialized) {
    init_factors(state.factors, grad_buf, cfg.beta2);
    // The slot held the raw G_0; from here on it holds M_{t+1}, starting at M_1 = (1 - beta1) G_0.
    scale_inplace(grad_buf, 1.0 - cfg.beta1);
    state.initialized = true;
  } else if (state.factors.rows() != x.rows() || state.factors.cols() != x.cols()) {
    throw DimensionError("alada_step: state was initialized for a different shape");
  }

  const double eta = cfg.step_size(t);
  ++state.t;
  const double m_scale = bias_correction_scale(cfg.beta1, state.t);
  alternating_update(state.factors, grad_buf, m_scale, cfg.eps);

  const CorrectedSecondMoment second(state.factors);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xr = x.row(i);
    const auto mr = grad_buf.row(i);
    for (std::size_t j = 0; j < xr.size(); ++j) {
      xr[j] -= eta * precondition(m_scale * mr[j], second(i, j), cfg.eps, cfg.eps_placement);
    }
  }
}

void adam_step(Matrix& x, const Matrix& grad, AdamState& state, const OptimizerConfig& cfg, std::size_t t) {
  require_same_shape(x, grad, "adam_step");
  require_same_shape(x, state.first, "adam_step");
  const double eta = cfg.step_size(t);
  ++state.t;
  const double c1 = bias_correction_scale(cfg.beta1, state.t);
  const double c2 = bias_correction_scale(cfg.beta2, state.t);
  auto xs = x.data();
  auto ms = state.first.data();
  auto us = state.second.data();
  const auto gs = grad.data();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    ms[k] = cfg.beta1 * ms[k] + (1.0 - cfg.beta1) * gs[k];
    us[k] = cfg.beta2 * us[k] + (1.0 - cfg.beta2) * gs[k] * gs[k];
    xs[k] -= eta * precondition(c1 * ms[k], c2 * us[k], cfg.eps, cfg.eps_placement);
  }
}

Matrix adafactor_reconstruct(std::span<const double> row, std::span<const double> col) {
  const double total = sum(row);
  Matrix rec = outer(row, col);
  if (total == 0.0) {
    rec.fill(0.0);
  } else {
    scale_inplace(rec, 1.0 / total);
  }
  return rec;
}

void adafactor_step(Matrix& x, const Matrix& grad, AdafactorState& state, const OptimizerConfig& cfg,
                    std::size_t t) {
  require_same_shape(x, grad, "adafactor_step");
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  if (state.row.empty()) {
    state.row.assign(m, 0.0);
    state.col.assign(n, 0.0);
  } else if (state.row.size() != m || state.col.size() != n) {
    throw DimensionError("adafactor_step: state was initialized for a different shape");
  }

  const double eta = cfg.step_size(t);
  ++state.t;
  const double beta2 = cfg.beta2;
  for (double& r : state.row) r *= beta2;
  for (double& c : state.col) c *= beta2;
  for (std::size_t i = 0; i < m; ++i) {
    const auto g = grad.row(i);
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double g2 = g[j] * g[j];
      row_sum += g2;
      state.col[j] += (1.0 - beta2) * g2;
    }
    state.row[i] += (1.0 - beta2) * row_sum;
  }

  const double total = sum(state.row);
  const double scale = total == 0.0 ? 0.0 : bias_correction_scale(beta2, state.t) / total;
  for (std::size_t i = 0; i < m; ++i) {
    auto xr = x.row(i);
    const auto g = grad.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double rec = state.row[i] * state.col[j] * scale;
      xr[j] -= eta * precondition(g[j], rec, cfg.eps, cfg.eps_placement);
    }
  }
}

void sgd_step(Matrix& x, const Matrix& grad, const OptimizerConfig& cfg, std::size_t t) {
  require_same_shape(x, grad, "sgd_step");
  axpy_inplace(x, -cfg.step_size(t), grad);
}

namespace {

class AladaOptimizer final : public Optimizer {
 public:
  AladaOptimizer(const OptimizerConfig& cfg, std::size_t m, std::size_t n) : Optimizer(cfg), m_(m), n_(n) {
    // Factor storage is owned up front so the first step allocates nothing.
    state_.factors.p.reserve(m);
    state_.factors.q.reserve(n);
  }
  OptimizerKind kind() const noexcept override { return OptimizerKind::alada; }
  double grad_decay(std::size_t t) const noexcept override { return t == 0 ? 0.0 : cfg_.beta1; }
  void step(Matrix& x, Matrix& grad_buf, std::size_t t) override { alada_step(x, grad_buf, state_, cfg_, t); }
  std::size_t state_scalars() const noexcept override { return state_scalar_count(kind(), m_, n_); }

 private:
  std::size_t m_, n_;
  AladaState state_;
};

class AdamOptimizer final : public Optimizer {
 public:
  AdamOptimizer(const OptimizerConfig& cfg, std::size_t m, std::size_t n) : Optimizer(cfg), state_(m, n) {}
  OptimizerKind kind() const noexcept override { return OptimizerKind::adam; }
  void step(Matrix& x, Matrix& grad, std::size_t t) override { adam_step(x, grad, state_, cfg_, t); }
  std::size_t state_scalars() const noexcept override {
    return state_scalar_count(kind(), state_.first.rows(), state_.first.cols());
  }

 private:
  AdamState state_;
};

class AdafactorOptimizer final : public Optimizer {
 public:
  AdafactorOptimizer(const OptimizerConfig& cfg, std::size_t m, std::size_t n) : Optimizer(cfg), m_(m), n_(n) {
    state_.row.assign(m, 0.0);
    state_.col.assign(n, 0.0);
  }
  OptimizerKind kind() const noexcept override { return OptimizerKind::adafactor; }
  void step(Matrix& x, Matrix& grad, std::size_t t) override { adafactor_step(x, grad, state_, cfg_, t); }
  std::size_t state_scalars() const noexcept override { return state_scalar_count(kind(), m_, n_); }

 private:
  std::size_t m_, n_;
  AdafactorState state_;
};

class SgdOptimizer final : public Optimizer {
 public:
  explicit SgdOptimizer(const OptimizerConfig& cfg) : Optimizer(cfg) {}
  OptimizerKind kind() const noexcept override { return OptimizerKind::sgd; }
  void step(Matrix& x, Matrix& grad, std::size_t t) override { sgd_step(x, grad, cfg_, t); }
  std::size_t state_scalars() const noexcept override { return 0; }
};

}  // namespace

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, const OptimizerConfig& cfg, std::size_t m,
                                          std::size_t n) {
  cfg.validate();
  switch (kind) {
    case OptimizerKind::alada: return std::make_unique<AladaOptimizer>(cfg, m, n);
    case OptimizerKind::adam: return std::make_unique<AdamOptimizer>(cfg, m, n);
    case OptimizerKind::adafactor: return std::make_unique<AdafactorOptimizer>(cfg, m, n);
    case OptimizerKind::sgd: return std::make_unique<SgdOptimizer>(cfg);
  }
  throw ConfigError("optimizer", "unknown kind");
}

}  // namespace alada
