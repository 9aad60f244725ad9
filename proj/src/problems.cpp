#include "alada/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "alada/errors.hpp"

namespace alada {

double uniform(Rng& rng, double lo, double hi) noexcept {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double standard_normal(Rng& rng) noexcept {
  const double u1 = 1.0 - uniform(rng, 0.0, 1.0);  // (0, 1]
  const double u2 = uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

void require_shape(const Matrix& a, std::pair<std::size_t, std::size_t> dims, const char* what) {
  if (a.rows() != dims.first || a.cols() != dims.second) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(dims.first) + "x" +
                         std::to_string(dims.second) + ", got " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()));
  }
}

void check_counts(const Problem& p, std::span<const Matrix> params, std::span<Matrix> bufs,
                  std::span<const double> decays) {
  if (params.size() != p.num_params() || bufs.size() != p.num_params() || decays.size() != p.num_params()) {
    throw DimensionError(p.name() + ": expected " + std::to_string(p.num_params()) + " parameter matrices");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    require_shape(params[k], p.param_dims(k), "parameter");
    require_shape(bufs[k], p.param_dims(k), "gradient buffer");
  }
}

std::vector<std::size_t> all_rows(std::size_t count) {
  std::vector<std::size_t> rows(count);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

std::vector<std::size_t> draw_rows(Rng& rng, std::size_t count, std::size_t batch) {
  std::vector<std::size_t> rows(batch);
  for (auto& r : rows) r = static_cast<std::size_t>(rng() % count);
  return rows;
}

// buf <- decay * buf + (1 - decay) / B * sum_b u_b v_b^T.
// Returns |(1/B) sum_b u_b v_b^T|^2 through the Gram identity, so the gradient is never
// materialized apart from the buffer.
double accumulate_outer_sum(Matrix* buf, double decay, const std::vector<Vector>& u, const std::vector<Vector>& v) {
  const std::size_t batch = u.size();
  const double inv_b = 1.0 / static_cast<double>(batch);
  if (buf != nullptr) {
    const double fresh = (1.0 - decay) * inv_b;
    scale_inplace(*buf, decay);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t i = 0; i < buf->rows(); ++i) {
        const double w = fresh * u[b][i];
        if (w == 0.0) continue;
        auto r = buf->row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += w * v[b][j];
      }
    }
  }
  double sq = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < batch; ++c) sq += dot(u[b], u[c]) * dot(v[b], v[c]);
  }
  return sq * inv_b * inv_b;
}

}  // namespace

double Problem::full_grad_sq_norm(std::span<const Matrix> params) const {
  std::vector<Matrix> g = zero_buffers();
  full_gradient(params, g);
  double sq = 0.0;
  for (const Matrix& m : g) sq += sq_norm(m.data());
  return sq;
}

double Problem::loss(const Matrix& x, const Sample& sample) const {
  return evaluate_loss(std::span<const Matrix>(&x, 1), sample);
}

GradEval Problem::accumulate_grad(const Matrix& x, const Sample& sample, Matrix& buf, double decay) const {
  return accumulate_gradients(std::span<const Matrix>(&x, 1), sample, std::span<Matrix>(&buf, 1),
                              std::span<const double>(&decay, 1));
}

std::vector<Matrix> Problem::gradient(std::span<const Matrix> params, const Sample& sample) const {
  std::vector<Matrix> g = zero_buffers();
  const std::vector<double> decays(num_params(), 0.0);
  accumulate_gradients(params, sample, g, decays);
  return g;
}

std::vector<Matrix> Problem::zero_buffers() const {
  std::vector<Matrix> out;
  out.reserve(num_params());
  for (std::size_t k = 0; k < num_params(); ++k) {
    const auto [m, n] = param_dims(k);
    out.emplace_back(m, n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadratic

QuadraticProblem::QuadraticProblem(Matrix target, double noise_bound, Matrix start)
    : target_(std::move(target)), noise_bound_(noise_bound), start_(std::move(start)) {
  if (!(noise_bound_ >= 0.0)) throw ConfigError("noise-bound", "must be non-negative");
  require_shape(start_, {target_.rows(), target_.cols()}, "quadratic start");
}

QuadraticProblem QuadraticProblem::random(std::size_t m, std::size_t n, double noise_bound, std::uint64_t seed) {
  Rng rng(seed);
  Matrix target(m, n);
  for (double& x : target.data()) x = uniform(rng, -1.0, 1.0);
  return QuadraticProblem(std::move(target), noise_bound, Matrix(m, n));
}

std::pair<std::size_t, std::size_t> QuadraticProblem::param_dims(std::size_t) const {
  return {target_.rows(), target_.cols()};
}

Sample QuadraticProblem::draw(Rng& rng) const { return Sample{{}, rng()}; }

double QuadraticProblem::evaluate_loss(std::span<const Matrix> params, const Sample& sample) const {
  if (params.size() != 1) throw DimensionError("quadratic: expected one parameter matrix");
  require_shape(params[0], param_dims(0), "parameter");
  Rng noise(sample.noise_seed);
  const auto x = params[0].data();
  const auto s = target_.data();
  double half_sq = 0.0;
  double inner = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - s[k];
    half_sq += d * d;
    if (noise_bound_ > 0.0) inner += uniform(noise, -noise_bound_, noise_bound_) * d;
  }
  return 0.5 * half_sq + inner;
}

GradEval QuadraticProblem::accumulate_gradients(std::span<const Matrix> params, const Sample& sample,
                                                std::span<Matrix> bufs, std::span<const double> decays) const {
  check_counts(*this, params, bufs, decays);
  Rng noise(sample.noise_seed);
  const auto x = params[0].data();
  const auto s = target_.data();
  auto buf = bufs[0].data();
  const double decay = decays[0];
  const double fresh = 1.0 - decay;
  GradEval out;
  double half_sq = 0.0;
  double inner = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - s[k];
    const double xi = noise_bound_ > 0.0 ? uniform(noise, -noise_bound_, noise_bound_) : 0.0;
    const double g = d + xi;
    half_sq += d * d;
    inner += xi * d;
    out.grad_sq_norm += g * g;
    buf[k] = decay * buf[k] + fresh * g;
  }
  out.loss = 0.5 * half_sq + inner;
  return out;
}

double QuadraticProblem::full_loss(std::span<const Matrix> params) const {
  return 0.5 * sq_norm(sub(params[0], target_).data());
}

void QuadraticProblem::full_gradient(std::span<const Matrix> params, std::span<Matrix> out) const {
  out[0] = sub(params[0], target_);
}

double QuadraticProblem::full_grad_sq_norm(std::span<const Matrix> params) const {
  const auto x = params[0].data();
  const auto s = target_.data();
  double sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) sq += (x[k] - s[k]) * (x[k] - s[k]);
  return sq;
}

std::optional<ProblemConstants> QuadraticProblem::constants() const {
  return ProblemConstants{1.0, inf_norm(sub(start_, target_)) + noise_bound_, 0.0};
}

std::optional<double> QuadraticProblem::grad_inf_bound_at(std::span<const Matrix> params) const {
  const auto x = params[0].data();
  const auto s = target_.data();
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(x[k] - s[k]));
  return worst + noise_bound_;
}

// ---------------------------------------------------------------------------
// Softmax regression

void softmax_inplace(std::span<double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp(z - top);
    total += z;
  }
  for (double& z : logits) z /= total;
}

ClassificationData make_classification_data(std::size_t classes, std::size_t features, std::size_t count,
                                            double planted_scale, std::uint64_t seed) {
  if (classes < 2) throw ConfigError("m", "softmax regression needs at least 2 classes");
  if (count == 0) throw ConfigError("dataset-size", "must be positive");
  Rng rng(seed);
  Matrix planted(classes, features);
  for (double& w : planted.data()) w = planted_scale * standard_normal(rng);

  ClassificationData data{Matrix(count, features), std::vector<std::size_t>(count), classes};
  Vector probs(classes);
  for (std::size_t s = 0; s < count; ++s) {
    auto y = data.features.row(s);
    for (double& v : y) v = uniform(rng, -1.0, 1.0);
    for (std::size_t c = 0; c < classes; ++c) probs[c] = dot(planted.row(c), y);
    softmax_inplace(probs);
    const double u = uniform(rng, 0.0, 1.0);
    double acc = 0.0;
    std::size_t label = classes - 1;
    for (std::size_t c = 0; c < classes; ++c) {
      acc += probs[c];
      if (u < acc) {
        label = c;
        break;
      }
    }
    data.labels[s] = label;
  }
  return data;
}

SoftmaxRegressionProblem::SoftmaxRegressionProblem(ClassificationData data, std::size_t batch_size)
    : data_(std::move(data)), batch_(batch_size) {
  if (batch_ == 0) throw ConfigError("batch-size", "must be positive");
  if (data_.labels.size() != data_.features.rows()) throw DimensionError("softmax: one label per feature row");
  for (std::size_t z : data_.labels) {
    if (z >= data_.classes) throw DimensionError("softmax: label out of range");
  }
}

std::pair<std::size_t, std::size_t> SoftmaxRegressionProblem::param_dims(std::size_t) const {
  return {data_.classes, data_.features.cols()};
}

std::vector<Matrix> SoftmaxRegressionProblem::initial_params() const {
  return {Matrix(data_.classes, data_.features.cols())};
}

Sample SoftmaxRegressionProblem::draw(Rng& rng) const {
  return Sample{draw_rows(rng, data_.features.rows(), batch_), 0};
}

namespace {

double softmax_rows(const Matrix& x, const ClassificationData& data, std::span<const std::size_t> rows,
                    std::vector<Vector>* residuals, std::vector<Vector>* inputs) {
  double loss = 0.0;
  for (std::size_t r : rows) {
    const auto y = data.features.row(r);
    Vector probs = matvec(x, y);
    softmax_inplace(probs);
    const std::size_t z = data.labels[r];
    loss -= std::log(probs[z]);
    if (residuals != nullptr) {
      probs[z] -= 1.0;
      residuals->push_back(std::move(probs));
      inputs->emplace_back(y.begin(), y.end());
    }
  }
  return loss / static_cast<double>(rows.size());
}

}  // namespace

double SoftmaxRegressionProblem::evaluate_loss(std::span<const Matrix> params, const Sample& sample) const {
  if (params.size() != 1) throw DimensionError("softmax: expected one parameter matrix");
  require_shape(params[0], param_dims(0), "parameter");
  return softmax_rows(params[0], data_, sample.indices, nullptr, nullptr);
}

GradEval SoftmaxRegressionProblem::accumulate_gradients(std::span<const Matrix> params, const Sample& sample,
                                                        std::span<Matrix> bufs, std::span<const double> decays) const {
  check_counts(*this, params, bufs, decays);
  if (sample.indices.empty()) throw UsageError("softmax: empty minibatch");
  std::vector<Vector> residuals;
  std::vector<Vector> inputs;
  GradEval out;
  out.loss = softmax_rows(params[0], data_, sample.indices, &residuals, &inputs);
  out.grad_sq_norm = accumulate_outer_sum(&bufs[0], decays[0], residuals, inputs);
  return out;
}

double SoftmaxRegressionProblem::full_loss(std::span<const Matrix> params) const {
  return softmax_rows(params[0], data_, all_rows(data_.features.rows()), nullptr, nullptr);
}

void SoftmaxRegressionProblem::full_gradient(std::span<const Matrix> params, std::span<Matrix> out) const {
  const auto rows = all_rows(data_.features.rows());
  out[0].fill(0.0);
  std::vector<Vector> residuals;
  std::vector<Vector> inputs;
  softmax_rows(params[0], data_, rows, &residuals, &inputs);
  const double inv_n = 1.0 / static_cast<double>(residuals.size());
  for (std::size_t b = 0; b < residuals.size(); ++b) {
    for (std::size_t i = 0; i < out[0].rows(); ++i) {
      auto r = out[0].row(i);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] += inv_n * residuals[b][i] * inputs[b][j];
    }
  }
}

// ---------------------------------------------------------------------------
// MLP

RegressionData make_teacher_data(const std::vector<std::size_t>& layer_sizes, std::size_t count, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw ConfigError("layers", "an MLP needs at least an input and an output size");
  if (count == 0) throw ConfigError("dataset-size", "must be positive");
  Rng rng(seed);
  std::vector<Matrix> teacher;
  for (std::size_t l = 1; l < layer_sizes.size(); ++l) {
    Matrix w(layer_sizes[l], layer_sizes[l - 1]);
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer_sizes[l - 1]));
    for (double& v : w.data()) v = scale * standard_normal(rng);
    teacher.push_back(std::move(w));
  }
  RegressionData data{Matrix(count, layer_sizes.front()), Matrix(count, layer_sizes.back())};
  for (std::size_t s = 0; s < count; ++s) {
    auto y = data.inputs.row(s);
    for (double& v : y) v = uniform(rng, -1.0, 1.0);
    Vector a(y.begin(), y.end());
    for (std::size_t l = 0; l < teacher.size(); ++l) {
      a = matvec(teacher[l], a);
      if (l + 1 < teacher.size()) {
        for (double& v : a) v = std::tanh(v);
      }
    }
    std::copy(a.begin(), a.end(), data.targets.row(s).begin());
  }
  return data;
}

MlpProblem::MlpProblem(std::vector<std::size_t> layer_sizes, RegressionData data, Activation activation,
                       std::size_t batch_size, std::uint64_t init_seed)
    : layer_sizes_(std::move(layer_sizes)),
      data_(std::move(data)),
      activation_(activation),
      batch_(batch_size),
      init_seed_(init_seed) {
  if (layer_sizes_.size() < 2) throw ConfigError("layers", "an MLP needs at least an input and an output size");
  if (batch_ == 0) throw ConfigError("batch-size", "must be positive");
  if (data_.inputs.cols() != layer_sizes_.front() || data_.targets.cols() != layer_sizes_.back() ||
      data_.inputs.rows() != data_.targets.rows()) {
    throw DimensionError("mlp: dataset does not match the layer sizes");
  }
}

std::pair<std::size_t, std::size_t> MlpProblem::param_dims(std::size_t k) const {
  return {layer_sizes_.at(k + 1), layer_sizes_.at(k)};
}

std::vector<Matrix> MlpProblem::initial_params() const {
  Rng rng(init_seed_);
  std::vector<Matrix> params;
  for (std::size_t k = 0; k < num_params(); ++k) {
    const auto [rows, cols] = param_dims(k);
    Matrix w(rows, cols);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    for (double& v : w.data()) v = uniform(rng, -bound, bound);
    params.push_back(std::move(w));
  }
  return params;
}

Sample MlpProblem::draw(Rng& rng) const { return Sample{draw_rows(rng, data_.inputs.rows(), batch_), 0}; }

void MlpProblem::check_params(std::span<const Matrix> params) const {
  if (params.size() != num_params()) {
    throw DimensionError("mlp: expected " + std::to_string(num_params()) + " weight matrices, got " +
                         std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) require_shape(params[k], param_dims(k), "mlp weight");
}

double MlpProblem::backprop(std::span<const Matrix> params, std::span<const std::size_t> rows,
                            std::span<Matrix> bufs, std::span<const double> decays, double* grad_sq) const {
  const std::size_t layers = num_params();
  const bool tanh_act = activation_ == Activation::tanh;
  // deltas[l][b] and acts[l][b] hold the backpropagated error at layer l and its input.
  std::vector<std::vector<Vector>> deltas(layers), acts(layers);
  double loss = 0.0;
  for (std::size_t r : rows) {
    std::vector<Vector> a(layers + 1);
    const auto y = data_.inputs.row(r);
    a[0].assign(y.begin(), y.end());
    for (std::size_t l = 0; l < layers; ++l) {
      a[l + 1] = matvec(params[l], a[l]);
      if (tanh_act && l + 1 < layers) {
        for (double& v : a[l + 1]) v = std::tanh(v);
      }
    }
    Vector delta = a[layers];
    const auto z = data_.targets.row(r);
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] -= z[i];
    loss += 0.5 * sq_norm(delta);
    if (bufs.empty() && grad_sq == nullptr) continue;
    for (std::size_t l = layers; l-- > 0;) {
      Vector back;
      if (l > 0) {
        back = matvec_t(params[l], delta);
        if (tanh_act) {
          for (std::size_t i = 0; i < back.size(); ++i) back[i] *= 1.0 - a[l][i] * a[l][i];
        }
      }
      deltas[l].push_back(std::move(delta));
      acts[l].push_back(std::move(a[l]));
      delta = std::move(back);
    }
  }
  if (!bufs.empty() || grad_sq != nullptr) {
    for (std::size_t l = 0; l < layers; ++l) {
      Matrix* buf = bufs.empty() ? nullptr : &bufs[l];
      const double sq = accumulate_outer_sum(buf, bufs.empty() ? 0.0 : decays[l], deltas[l], acts[l]);
      if (grad_sq != nullptr) grad_sq[l] = sq;
    }
  }
  return loss / static_cast<double>(rows.size());
}

double MlpProblem::evaluate_loss(std::span<const Matrix> params, const Sample& sample) const {
  check_params(params);
  return backprop(params, sample.indices, {}, {}, nullptr);
}

GradEval MlpProblem::accumulate_gradients(std::span<const Matrix> params, const Sample& sample,
                                          std::span<Matrix> bufs, std::span<const double> decays) const {
  std::vector<double> sq(num_params(), 0.0);
  GradEval out;
  out.loss = accumulate_with_layer_norms(params, sample, bufs, decays, sq);
  out.grad_sq_norm = std::accumulate(sq.begin(), sq.end(), 0.0);
  return out;
}

double MlpProblem::accumulate_with_layer_norms(std::span<const Matrix> params, const Sample& sample,
                                               std::span<Matrix> bufs, std::span<const double> decays,
                                               std::span<double> layer_sq) const {
  check_counts(*this, params, bufs, decays);
  if (sample.indices.empty()) throw UsageError("mlp: empty minibatch");
  if (layer_sq.size() != num_params()) throw DimensionError("mlp: one norm slot per layer");
  return backprop(params, sample.indices, bufs, decays, layer_sq.data());
}

double MlpProblem::full_loss(std::span<const Matrix> params) const {
  check_params(params);
  const auto rows = all_rows(data_.inputs.rows());
  return backprop(params, rows, {}, {}, nullptr);
}

void MlpProblem::full_gradient(std::span<const Matrix> params, std::span<Matrix> out) const {
  check_params(params);
  const auto rows = all_rows(data_.inputs.rows());
  const std::vector<double> decays(num_params(), 0.0);
  backprop(params, rows, out, decays, nullptr);
}

namespace {

/// One weight matrix of an MLP as its own problem; the parent must outlive it.
class MlpLayerProblem final : public Problem {
 public:
  MlpLayerProblem(const MlpProblem& parent, std::size_t layer, std::span<const Matrix> weights)
      : parent_(parent), layer_(layer), weights_(weights.begin(), weights.end()) {}

  std::string name() const override { return "mlp-layer-" + std::to_string(layer_ + 1); }
  std::pair<std::size_t, std::size_t> param_dims(std::size_t) const override { return parent_.param_dims(layer_); }
  std::vector<Matrix> initial_params() const override { return {weights_[layer_]}; }
  Sample draw(Rng& rng) const override { return parent_.draw(rng); }

  double evaluate_loss(std::span<const Matrix> params, const Sample& sample) const override {
    return parent_.evaluate_loss(substitute(params), sample);
  }

  GradEval accumulate_gradients(std::span<const Matrix> params, const Sample& sample, std::span<Matrix> bufs,
                                std::span<const double> decays) const override {
    check_counts(*this, params, bufs, decays);
    auto all = substitute(params);
    // Only this layer's buffer is touched; the others are empty placeholders.
    std::vector<Matrix> scratch = parent_.zero_buffers();
    std::vector<double> all_decays(parent_.num_params(), 0.0);
    scratch[layer_] = std::move(bufs[0]);
    all_decays[layer_] = decays[0];
    std::vector<double> layer_sq(parent_.num_params(), 0.0);
    const double loss = parent_.accumulate_with_layer_norms(all, sample, scratch, all_decays, layer_sq);
    bufs[0] = std::move(scratch[layer_]);
    return {loss, layer_sq[layer_]};
  }

  double full_loss(std::span<const Matrix> params) const override { return parent_.full_loss(substitute(params)); }

  void full_gradient(std::span<const Matrix> params, std::span<Matrix> out) const override {
    auto all = substitute(params);
    std::vector<Matrix> g = parent_.zero_buffers();
    parent_.full_gradient(all, g);
    out[0] = std::move(g[layer_]);
  }

 private:
  std::vector<Matrix> substitute(std::span<const Matrix> params) const {
    if (params.size() != 1) throw DimensionError(name() + ": expected one parameter matrix");
    std::vector<Matrix> all = weights_;
    require_shape(params[0], param_dims(0), "parameter");
    all[layer_] = params[0];
    return all;
  }

  const MlpProblem& parent_;
  std::size_t layer_;
  std::vector<Matrix> weights_;
};

}  // namespace

std::vector<std::unique_ptr<Problem>> MlpProblem::layer_problems(std::span<const Matrix> weights) const {
  check_params(weights);
  std::vector<std::unique_ptr<Problem>> out;
  for (std::size_t k = 0; k < num_params(); ++k) out.push_back(std::make_unique<MlpLayerProblem>(*this, k, weights));
  return out;
}

}  // namespace alada
