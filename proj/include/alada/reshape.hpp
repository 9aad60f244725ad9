#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "alada/optimizers.hpp"
#include "alada/tensor.hpp"

namespace alada {

/// Dimensions k_1 x ... x k_tau of a row-major tensor.
class Shape {
 public:
  /// Throws DimensionError on an empty list or a zero extent.
  explicit Shape(std::vector<std::size_t> dims);
  Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t order() const noexcept { return dims_.size(); }
  std::size_t numel() const noexcept;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<std::size_t> dims_;
};

/// Matrix view of a tensor: the first `j_star` dimensions flatten into rows.
struct ReshapePlan {
  std::size_t j_star;
  std::size_t m;
  std::size_t n;

  friend bool operator==(const ReshapePlan&, const ReshapePlan&) = default;
};

/// Split minimizing |prod(k_1..k_j) - prod(k_{j+1}..k_tau)| over j in 1..tau-1, smallest j on
/// ties. An order-1 tensor becomes an m x 1 matrix (j_star = 1).
ReshapePlan plan_reshape(const Shape& shape);

class Tensor {
 public:
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, Vector data);

  const Shape& shape() const noexcept { return shape_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// Moves the buffer into a matrix with the plan's dimensions. No data is copied.
  Matrix into_matrix(const ReshapePlan& plan) &&;
  /// Moves a matrix buffer back into a tensor of the given shape.
  static Tensor from_matrix(Matrix&& matrix, Shape shape);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  Vector data_;
};

/// Alada on a tensor parameter through its planned matrix view.
void alada_step(Tensor& x, Tensor& grad_buf, AladaState& state, const OptimizerConfig& cfg, std::size_t t);

}  // namespace alada
