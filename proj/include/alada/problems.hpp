#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "alada/tensor.hpp"

namespace alada {

using Rng = std::mt19937_64;

/// Uniform double in [lo, hi) from the top 53 bits of one draw; identical on every platform.
double uniform(Rng& rng, double lo, double hi) noexcept;
/// Standard normal via Box-Muller on two uniform draws.
double standard_normal(Rng& rng) noexcept;

/// One draw xi_t from the sampling distribution.
struct Sample {
  std::vector<std::size_t> indices;  ///< dataset rows in the minibatch
  std::uint64_t noise_seed = 0;      ///< seeds additive gradient noise
};

struct GradEval {
  double loss = 0.0;
  double grad_sq_norm = 0.0;  ///< |grad F(X; xi)|^2 summed over every parameter
};

/// Constants of a problem that meets the smoothness, bounded-gradient and lower-bound
/// assumptions of the convergence theorem.
struct ProblemConstants {
  double smoothness;   ///< L
  double grad_bound;   ///< G, an l-infinity bound on stochastic gradients
  double lower_bound;  ///< f_*
};

/// Stochastic objective F(X; xi) over one or more parameter matrices.
///
/// accumulate_gradients is the fused gradient-accumulation contract: for every parameter
/// k it leaves bufs[k] <- decays[k] * bufs[k] + (1 - decays[k]) * grad_k F(X; xi) without
/// a separate gradient buffer, and returns the sample loss.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual std::size_t num_params() const { return 1; }
  virtual std::pair<std::size_t, std::size_t> param_dims(std::size_t k) const = 0;
  virtual std::vector<Matrix> initial_params() const = 0;
  virtual Sample draw(Rng& rng) const = 0;

  virtual double evaluate_loss(std::span<const Matrix> params, const Sample& sample) const = 0;
  virtual GradEval accumulate_gradients(std::span<const Matrix> params, const Sample& sample, std::span<Matrix> bufs,
                                        std::span<const double> decays) const = 0;

  /// Expected loss f(X) over the sampling distribution.
  virtual double full_loss(std::span<const Matrix> params) const = 0;
  /// Deterministic gradient of f, written into out (overwritten).
  virtual void full_gradient(std::span<const Matrix> params, std::span<Matrix> out) const = 0;
  virtual double full_grad_sq_norm(std::span<const Matrix> params) const;

  virtual std::optional<ProblemConstants> constants() const { return std::nullopt; }
  /// Upper bound on |grad F(X; xi)|_inf over every xi at the given point, if known.
  virtual std::optional<double> grad_inf_bound_at(std::span<const Matrix>) const { return std::nullopt; }

  // Single-parameter conveniences.
  double loss(const Matrix& x, const Sample& sample) const;
  GradEval accumulate_grad(const Matrix& x, const Sample& sample, Matrix& buf, double decay) const;
  /// Exact gradient of F(X; xi), i.e. accumulation with decay 0 into a fresh buffer.
  std::vector<Matrix> gradient(std::span<const Matrix> params, const Sample& sample) const;
  std::vector<Matrix> zero_buffers() const;
};

/// f(X) = 1/2 |X - X*|^2 with additive noise: grad F(X; xi) = (X - X*) + xi, xi uniform
/// in [-b, b]^{m x n}. F(X; xi) = f(X) + <xi, X - X*>.
class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(Matrix target, double noise_bound, Matrix start);
  /// X* uniform in [-1, 1], X_0 = 0.
  static QuadraticProblem random(std::size_t m, std::size_t n, double noise_bound, std::uint64_t seed);

  std::string name() const override { return "quadratic"; }
  std::pair<std::size_t, std::size_t> param_dims(std::size_t) const override;
  std::vector<Matrix> initial_params() const override { return {start_}; }
  Sample draw(Rng& rng) const override;
  double evaluate_loss(std::span<const Matrix> params, const Sample& sample) const override;
  GradEval accumulate_gradients(std::span<const Matrix> params, const Sample& sample, std::span<Matrix> bufs,
                                std::span<const double> decays) const override;
  double full_loss(std::span<const Matrix> params) const override;
  void full_gradient(std::span<const Matrix> params, std::span<Matrix> out) const override;
  double full_grad_sq_norm(std::span<const Matrix> params) const override;
  /// L = 1, f_* = 0, G = |X_0 - X*|_inf + b. G holds for iterates that stay in the box
  /// |X - X*|_inf <= |X_0 - X*|_inf; bound_check verifies this along the trajectory.
  std::optional<ProblemConstants> constants() const override;
  std::optional<double> grad_inf_bound_at(std::span<const Matrix> params) const override;

  const Matrix& target() const noexcept { return target_; }
  double noise_bound() const noexcept { return noise_bound_; }

 private:
  Matrix target_;
  double noise_bound_;
  Matrix start_;
};

/// Synthetic labelled data: features uniform in [-1, 1], labels drawn from a planted
/// softmax model, so the Bayes loss is strictly positive.
struct ClassificationData {
  Matrix features;  ///< N x n
  std::vector<std::size_t> labels;
  std::size_t classes;
};

ClassificationData make_classification_data(std::size_t classes, std::size_t features, std::size_t count,
                                            double planted_scale, std::uint64_t seed);

/// m-class softmax regression, F(X; xi) = CE(X y, z), averaged over a minibatch.
class SoftmaxRegressionProblem final : public Problem {
 public:
  SoftmaxRegressionProblem(ClassificationData data, std::size_t batch_size);

  std::string name() const override { return "softmax"; }
  std::pair<std::size_t, std::size_t> param_dims(std::size_t) const override;
  std::vector<Matrix> initial_params() const override;
  Sample draw(Rng& rng) const override;
  double evaluate_loss(std::span<const Matrix> params, const Sample& sample) const override;
  GradEval accumulate_gradients(std::span<const Matrix> params, const Sample& sample, std::span<Matrix> bufs,
                                std::span<const double> decays) const override;
  double full_loss(std::span<const Matrix> params) const override;
  void full_gradient(std::span<const Matrix> params, std::span<Matrix> out) const override;

  const ClassificationData& data() const noexcept { return data_; }
  std::size_t batch_size() const noexcept { return batch_; }

 private:
  ClassificationData data_;
  std::size_t batch_;
};

/// Numerically stable softmax of `logits`, in place.
void softmax_inplace(std::span<double> logits);

enum class Activation { tanh, identity };

/// Regression data: inputs N x n0, targets N x nL.
struct RegressionData {
  Matrix inputs;
  Matrix targets;
};

/// Targets produced by a random tanh teacher network with the same layer sizes.
RegressionData make_teacher_data(const std::vector<std::size_t>& layer_sizes, std::size_t count, std::uint64_t seed);

/// Fully connected network y -> X_L s(... s(X_1 y)) with squared loss 1/(2B) sum |out - z|^2.
/// Parameter k is X_{k+1} of size n_{k+1} x n_k; the output layer is linear.
class MlpProblem final : public Problem {
 public:
  MlpProblem(std::vector<std::size_t> layer_sizes, RegressionData data, Activation activation,
             std::size_t batch_size, std::uint64_t init_seed);

  std::string name() const override { return "mlp"; }
  std::size_t num_params() const override { return layer_sizes_.size() - 1; }
  std::pair<std::size_t, std::size_t> param_dims(std::size_t k) const override;
  std::vector<Matrix> initial_params() const override;
  Sample draw(Rng& rng) const override;
  double evaluate_loss(std::span<const Matrix> params, const Sample& sample) const override;
  GradEval accumulate_gradients(std::span<const Matrix> params, const Sample& sample, std::span<Matrix> bufs,
                                std::span<const double> decays) const override;
  double full_loss(std::span<const Matrix> params) const override;
  void full_gradient(std::span<const Matrix> params, std::span<Matrix> out) const override;

  /// As accumulate_gradients, reporting each layer's squared gradient norm separately.
  double accumulate_with_layer_norms(std::span<const Matrix> params, const Sample& sample, std::span<Matrix> bufs,
                                     std::span<const double> decays, std::span<double> layer_sq) const;

  /// Per-layer subproblems: problem k varies only X_{k+1}, the other layers fixed at `weights`.
  std::vector<std::unique_ptr<Problem>> layer_problems(std::span<const Matrix> weights) const;

  const std::vector<std::size_t>& layer_sizes() const noexcept { return layer_sizes_; }

 private:
  double backprop(std::span<const Matrix> params, std::span<const std::size_t> rows, std::span<Matrix> bufs,
                  std::span<const double> decays, double* grad_sq) const;
  void check_params(std::span<const Matrix> params) const;

  std::vector<std::size_t> layer_sizes_;
  RegressionData data_;
  Activation activation_;
  std::size_t batch_;
  std::uint64_t init_seed_;
};

}  // namespace alada
