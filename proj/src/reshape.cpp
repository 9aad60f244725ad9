#include "alada/reshape.hpp"

#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "alada/errors.hpp"

namespace alada {

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("Shape: order must be at least 1");
  for (std::size_t k : dims_) {
    if (k == 0) throw DimensionError("Shape: every extent must be positive");
  }
}

std::size_t Shape::numel() const noexcept {
  return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>{});
}

ReshapePlan plan_reshape(const Shape& shape) {
  const auto& k = shape.dims();
  const std::size_t total = shape.numel();
  if (k.size() == 1) return {1, total, 1};

  ReshapePlan best{0, 0, 0};
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  std::size_t head = 1;
  for (std::size_t j = 1; j < k.size(); ++j) {
    head *= k[j - 1];
    const std::size_t tail = total / head;
    const std::size_t gap = head > tail ? head - tail : tail - head;
    if (gap < best_gap) {
      best_gap = gap;
      best = {j, head, tail};
    }
  }
  return best;
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) { data_.assign(shape_.numel(), fill); }

Tensor::Tensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) throw DimensionError("Tensor: buffer length does not match the shape");
}

Matrix Tensor::into_matrix(const ReshapePlan& plan) && {
  if (plan.m * plan.n != data_.size()) throw DimensionError("Tensor::into_matrix: plan does not cover the tensor");
  return Matrix(plan.m, plan.n, std::move(data_));
}

Tensor Tensor::from_matrix(Matrix&& matrix, Shape shape) { return Tensor(std::move(shape), std::move(matrix).release()); }

void alada_step(Tensor& x, Tensor& grad_buf, AladaState& state, const OptimizerConfig& cfg, std::size_t t) {
  if (!(x.shape() == grad_buf.shape())) throw DimensionError("alada_step: tensor and gradient shapes differ");
  const ReshapePlan plan = plan_reshape(x.shape());
  Shape shape = x.shape();
  Matrix xm = std::move(x).into_matrix(plan);
  Matrix gm = std::move(grad_buf).into_matrix(plan);
  try {
    alada_step(xm, gm, state, cfg, t);
  } catch (...) {
    x = Tensor::from_matrix(std::move(xm), shape);
    grad_buf = Tensor::from_matrix(std::move(gm), shape);
    throw;
  }
  x = Tensor::from_matrix(std::move(xm), shape);
  grad_buf = Tensor::from_matrix(std::move(gm), std::move(shape));
}

}  // namespace alada
