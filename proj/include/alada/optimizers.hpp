#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>

#include "alada/moment.hpp"
#include "alada/schedule.hpp"
#include "alada/tensor.hpp"

namespace alada {

enum class OptimizerKind { alada, adam, adafactor, sgd };

std::string_view to_string(OptimizerKind k) noexcept;
std::optional<OptimizerKind> parse_optimizer(std::string_view name) noexcept;

/// Where eps enters the preconditioner: 1/sqrt(U + eps) or 1/(sqrt(U) + eps).
enum class EpsPlacement { inside_sqrt, outside_sqrt };

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.9;
  double eps = 1e-16;
  double eta0 = 1e-3;
  Schedule schedule = Schedule::linear_decay;
  std::size_t horizon = 1000;
  EpsPlacement eps_placement = EpsPlacement::inside_sqrt;

  static OptimizerConfig defaults_for(OptimizerKind kind);

  double step_size(std::size_t t) const { return alada::step_size(schedule, eta0, beta1, t, horizon); }
  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

struct BetaPair {
  double beta1;
  double beta2;
};

/// Alada decay parameters matching an Adam setting: beta1 is kept and
/// (1 - beta2) (1 - beta1)^2 = 1 - beta2_adam, with beta2 rounded to 15 significant digits.
/// ConfigError if beta2 would be negative.
BetaPair map_adam_betas(double beta1_adam, double beta2_adam);

/// Persistent optimizer scalars for an m x n parameter; the gradient slot is not counted.
std::size_t state_scalar_count(OptimizerKind kind, std::size_t m, std::size_t n);

struct AladaState {
  SecondMomentFactors factors;
  bool first_moment_lives_in_grad_buffer = true;
  bool initialized = false;
  std::size_t t = 0;  // descent steps taken
};

struct AdamState {
  AdamState(std::size_t m, std::size_t n) : first(m, n), second(m, n) {}
  Matrix first;
  Matrix second;
  std::size_t t = 0;
};

struct AdafactorState {
  Vector row;
  Vector col;
  std::size_t t = 0;
};

/// One Alada descent step.
///
/// `grad_buf` holds the uncorrected first moment M_{t+1}, already accumulated with the
/// fused rule buf <- beta1 buf + (1 - beta1) G_t. On the state's first step the buffer
/// must hold the raw G_0 (accumulate with decay 0), which seeds the second-moment factors;
/// the step then scales it to M_1 = (1 - beta1) G_0 in place.
/// `t` selects the step size; bias corrections use the state's own counter.
void alada_step(Matrix& x, Matrix& grad_buf, AladaState& state, const OptimizerConfig& cfg, std::size_t t);

void adam_step(Matrix& x, const Matrix& grad, AdamState& state, const OptimizerConfig& cfg, std::size_t t);

/// Factored second moment without a first moment: r, c accumulate the row and column
/// sums of G^2, rec = r c^T / (1^T r), bias-corrected by 1 / (1 - beta2^t).
void adafactor_step(Matrix& x, const Matrix& grad, AdafactorState& state, const OptimizerConfig& cfg,
                    std::size_t t);

void sgd_step(Matrix& x, const Matrix& grad, const OptimizerConfig& cfg, std::size_t t);

/// rec = r c^T / (1^T r); zero when 1^T r = 0.
Matrix adafactor_reconstruct(std::span<const double> row, std::span<const double> col);

/// Common step interface used by the harness, one instance per parameter matrix.
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  virtual OptimizerKind kind() const noexcept = 0;
  const OptimizerConfig& config() const noexcept { return cfg_; }

  /// Decay the harness must use when accumulating the gradient for step t into the
  /// gradient buffer. Zero means the buffer holds the raw gradient.
  virtual double grad_decay([[maybe_unused]] std::size_t t) const noexcept { return 0.0; }
  /// May rewrite `grad_buf` when the optimizer keeps state there (Alada's first moment).
  virtual void step(Matrix& x, Matrix& grad_buf, std::size_t t) = 0;
  virtual std::size_t state_scalars() const noexcept = 0;

 protected:
  explicit Optimizer(const OptimizerConfig& cfg) : cfg_(cfg) {}
  OptimizerConfig cfg_;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, const OptimizerConfig& cfg, std::size_t m,
                                          std::size_t n);

}  // namespace alada
