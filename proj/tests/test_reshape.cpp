#include <doctest.h>

#include <cstdlib>
#include <random>

#include "alada/errors.hpp"
#include "alada/reshape.hpp"

using namespace alada;

namespace {

std::size_t gap(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

// Visits every shape with the given order and extents in 1..max_extent.
template <class F>
void for_each_shape(std::size_t order, std::size_t max_extent, F&& visit) {
  std::vector<std::size_t> dims(order, 1);
  while (true) {
    visit(Shape(dims));
    std::size_t k = 0;
    while (k < order && dims[k] == max_extent) dims[k++] = 1;
    if (k == order) return;
    ++dims[k];
  }
}

}  // namespace

TEST_CASE("shape validation") {
  CHECK_THROWS_AS(Shape({}), DimensionError);
  CHECK_THROWS_AS(Shape({2, 0, 3}), DimensionError);
  CHECK(Shape({2, 3, 4}).numel() == 24);
  CHECK(Shape({5}).order() == 1);
}

TEST_CASE("plan examples") {
  CHECK(plan_reshape(Shape{2, 3, 4}) == ReshapePlan{2, 6, 4});
  CHECK(plan_reshape(Shape{2, 2}) == ReshapePlan{1, 2, 2});
  CHECK(plan_reshape(Shape{4, 3, 2}) == ReshapePlan{1, 4, 6});
  CHECK(plan_reshape(Shape{7}) == ReshapePlan{1, 7, 1});
  // Ties go to the smallest split: |1 - 4| = |4 - 1|.
  CHECK(plan_reshape(Shape{1, 4, 1}) == ReshapePlan{1, 1, 4});
}

TEST_CASE("plan is optimal by exhaustive enumeration") {
  std::size_t visited = 0;
  for (std::size_t order = 2; order <= 6; ++order) {
    for_each_shape(order, 7, [&](const Shape& s) {
      const auto& k = s.dims();
      std::size_t best_j = 0, best_gap = 0;
      for (std::size_t j = 1; j < order; ++j) {
        std::size_t left = 1, right = 1;
        for (std::size_t i = 0; i < j; ++i) left *= k[i];
        for (std::size_t i = j; i < order; ++i) right *= k[i];
        if (best_j == 0 || gap(left, right) < best_gap) {
          best_j = j;
          best_gap = gap(left, right);
        }
      }
      const ReshapePlan plan = plan_reshape(s);
      CHECK(plan.j_star == best_j);
      CHECK(gap(plan.m, plan.n) == best_gap);
      CHECK(plan.m * plan.n == s.numel());
      ++visited;
    });
  }
  CHECK(visited > 100000);
}

TEST_CASE("round trip moves the buffer without copying") {
  Vector data(24);
  for (std::size_t k = 0; k < 24; ++k) data[k] = static_cast<double>(k);
  Tensor t(Shape{2, 3, 4}, data);
  const double* storage = t.data().data();
  const Tensor original = t;

  AllocationAudit audit;
  Matrix m = std::move(t).into_matrix(plan_reshape(Shape{2, 3, 4}));
  CHECK(m.rows() == 6);
  CHECK(m.cols() == 4);
  CHECK(m.data().data() == storage);
  CHECK(m(5, 3) == 23.0);
  Tensor back = Tensor::from_matrix(std::move(m), Shape{2, 3, 4});
  CHECK(audit.allocations() == 0);
  CHECK(back == original);
  CHECK(back.data().data() == storage);

  CHECK_THROWS_AS(Tensor(Shape{2, 2}, make_vector({1, 2, 3})), DimensionError);
  CHECK_THROWS_AS(Tensor(Shape{2, 2}).into_matrix(ReshapePlan{1, 3, 1}), DimensionError);
}

TEST_CASE("optimizing a tensor equals optimizing its matrix view") {
  const Shape shape{3, 2, 5, 2};
  const ReshapePlan plan = plan_reshape(shape);
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> d(-1, 1);

  OptimizerConfig cfg = OptimizerConfig::defaults_for(OptimizerKind::alada);
  cfg.eta0 = 0.01;
  cfg.horizon = 100;

  Tensor xt(shape, 0.5), gt(shape);
  Matrix xm(plan.m, plan.n, 0.5), gm(plan.m, plan.n);
  AladaState st, sm;
  for (std::size_t t = 0; t < 100; ++t) {
    const double decay = t == 0 ? 0.0 : cfg.beta1;
    for (std::size_t k = 0; k < shape.numel(); ++k) {
      const double g = d(rng);
      gt.data()[k] = decay * gt.data()[k] + (1 - decay) * g;
      gm.data()[k] = decay * gm.data()[k] + (1 - decay) * g;
    }
    alada_step(xt, gt, st, cfg, t);
    alada_step(xm, gm, sm, cfg, t);
  }
  for (std::size_t k = 0; k < shape.numel(); ++k) CHECK(xt.data()[k] == xm.data()[k]);
  CHECK(st.factors.p == sm.factors.p);
  CHECK(st.factors.q == sm.factors.q);

  Tensor wrong(Shape{3, 2, 5, 1});
  CHECK_THROWS_AS(alada_step(xt, wrong, st, cfg, 0), DimensionError);
  CHECK(xt.shape() == shape);
}

TEST_CASE("vectors run as m x 1 matrices") {
  OptimizerConfig cfg = OptimizerConfig::defaults_for(OptimizerKind::alada);
  cfg.schedule = Schedule::constant;
  cfg.eta0 = 0.1;
  Tensor x(Shape{4}, 0.0);
  Tensor g(Shape{4}, make_vector({1, -2, 3, -4}));
  AladaState state;
  alada_step(x, g, state, cfg, 0);
  CHECK(state.factors.rows() == 4);
  CHECK(state.factors.cols() == 1);
  CHECK(x.data()[0] < 0.0);
  CHECK(x.data()[1] > 0.0);
}
