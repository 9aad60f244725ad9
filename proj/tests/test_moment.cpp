#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "alada/errors.hpp"
#include "alada/moment.hpp"
#include "support/reference.hpp"

using namespace alada;

namespace {

std::vector<double> to_std(std::span<const double> v) { return {v.begin(), v.end()}; }

reference::Mat to_ref(const Matrix& a) {
  reference::Mat out = reference::zeros(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i][j] = a(i, j);
  return out;
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t m, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix a(m, n);
  for (double& x : a.data()) x = d(rng);
  return a;
}

SecondMomentFactors random_factors(std::mt19937_64& rng, std::size_t m, std::size_t n, double beta2) {
  std::uniform_real_distribution<double> d(0.05, 2.0);
  SecondMomentFactors f;
  f.p.resize(m);
  f.q.resize(n);
  for (double& x : f.p) x = d(rng);
  for (double& x : f.q) x = d(rng);
  f.v0 = d(rng);
  f.beta2 = beta2;
  f.t = rng() % 7;
  return f;
}

double factor_error(const reference::Mat& v, const SecondMomentFactors& f) {
  return reference::fro_dist(v, reference::outer(to_std(f.p), to_std(f.q)));
}

}  // namespace

TEST_CASE("ema accumulation examples") {
  Vector buf(1, 0.0);
  const Vector g0 = make_vector({2.0});
  ema_accumulate(buf, g0, 0.9);
  CHECK(buf[0] == doctest::Approx(0.2).epsilon(1e-15));

  Vector exact = make_vector({3.0, -1.0});
  ema_accumulate(exact, make_vector({5.0, 7.0}), 0.0);
  CHECK(exact == make_vector({5.0, 7.0}));

  FirstMoment fm(1, 1, 0.9);
  CHECK(fm.buffer()(0, 0) == 0.0);
  fm.accumulate(Matrix(1, 1, 1.0));
  fm.accumulate(Matrix(1, 1, 1.0));
  CHECK(fm.buffer()(0, 0) == doctest::Approx(0.19).epsilon(1e-15));
  CHECK(fm.step() == 2);
  CHECK_THROWS_AS(fm.accumulate(Matrix(2, 1)), DimensionError);
}

TEST_CASE("first-moment bias correction") {
  CHECK_THROWS_AS(bias_correction_scale(0.9, 0), UsageError);
  CHECK_THROWS_AS(FirstMoment(2, 2, 0.9).corrected(), UsageError);
  CHECK(bias_correction_scale(0.0, 1) == 1.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> beta(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double b1 = beta(rng);
    const Matrix g0 = random_matrix(rng, 3, 4, -5, 5);
    FirstMoment fm(3, 4, b1);
    fm.accumulate(g0);
    const Matrix m1 = fm.corrected();
    for (std::size_t k = 0; k < g0.size(); ++k) CHECK(std::abs(m1.data()[k] - g0.data()[k]) <= 1e-15 * 5);

    fm.accumulate(g0);
    const Matrix m2 = fm.corrected();
    for (std::size_t k = 0; k < g0.size(); ++k) CHECK(std::abs(m2.data()[k] - g0.data()[k]) <= 1e-14 * 5);
  }

  FirstMoment plain(1, 2, 0.0);
  plain.accumulate(Matrix::from_rows({{1, 2}}));
  plain.accumulate(Matrix::from_rows({{3, 4}}));
  CHECK(plain.corrected() == plain.buffer());
}

TEST_CASE("factor initialization") {
  SecondMomentFactors f = init_factors(Matrix(2, 2, 1.0), 0.9);
  CHECK(f.v0 == 1.0);
  CHECK(f.p == make_vector({1, 1}));
  CHECK(f.q == make_vector({1, 1}));
  CHECK(f.t == 0);

  f = init_factors(Matrix(3, 2, 0.0), 0.5);
  CHECK(f.v0 == 0.0);
  CHECK(f.p == Vector(3, 0.0));
  CHECK(f.q == Vector(2, 0.0));

  f = init_factors(Matrix::from_rows({{3, 0}, {0, 4}}), 0.9);
  CHECK(f.v0 == 6.25);
  CHECK(f.p == make_vector({2.5, 2.5}));
  CHECK(f.q == make_vector({2.5, 2.5}));

  SecondMomentFactors reused;
  reused.p.reserve(3);
  reused.q.reserve(2);
  AllocationAudit audit;
  init_factors(reused, Matrix(3, 2, 2.0), 0.9);
  CHECK(audit.allocations() == 1);  // only the argument matrix
  CHECK(reused.v0 == 4.0);
}

TEST_CASE("alternating update examples") {
  SecondMomentFactors f = init_factors(Matrix(2, 2, 1.0), 0.0);
  alternating_update(f, Matrix(2, 2, 2.0), 0.0);
  CHECK(f.p == make_vector({4, 4}));
  CHECK(f.q == make_vector({1, 1}));
  CHECK(f.t == 1);

  SecondMomentFactors frozen = init_factors(Matrix(2, 3, 1.0), 1.0);
  for (int k = 0; k < 4; ++k) alternating_update(frozen, Matrix(2, 3, 5.0), 1e-16);
  CHECK(frozen.p == Vector(2, 1.0));
  CHECK(frozen.q == Vector(3, 1.0));

  CHECK_THROWS_AS(alternating_update(f, Matrix(3, 2, 1.0), 0.0), DimensionError);
}

TEST_CASE("two alternations recover a positive rank-one matrix") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.1, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector a(8), b(5);
    for (double& x : a) x = d(rng);
    for (double& x : b) x = d(rng);
    const Matrix target = outer(a, b);
    Matrix root = target;
    sqrt_inplace(root);

    SecondMomentFactors f = init_factors(Matrix(8, 5, d(rng)), 0.0);
    alternating_update(f, root, 0.0);
    alternating_update(f, root, 0.0);
    const double err = fro(sub(outer(f.p, f.q), target)) / fro(target);
    CHECK(err < 1e-10);
  }
}

TEST_CASE("vector update equals the materialized recurrence") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> beta(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 1 + rng() % 16, n = 1 + rng() % 16;
    SecondMomentFactors f = random_factors(rng, m, n, beta(rng));
    const Matrix moment = random_matrix(rng, m, n, 0.0, 2.0);
    const reference::Mat v = to_ref(square(moment));

    const reference::Mat expected =
        reference::materialized_update(v, to_std(f.p), to_std(f.q), f.beta2, 1e-16, f.t % 2 == 0);
    alternating_update(f, moment, 1e-16);
    const reference::Mat got = reference::outer(to_std(f.p), to_std(f.q));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        worst = std::max(worst, std::abs(got[i][j] - expected[i][j]) / std::abs(expected[i][j]));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("scale argument equals squaring the scaled moment") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    SecondMomentFactors a = random_factors(rng, 4, 6, 0.7);
    SecondMomentFactors b = a;
    const Matrix moment = random_matrix(rng, 4, 6, -1.0, 1.0);
    const double s = 1.0 + static_cast<double>(rng() % 9);
    alternating_update(a, moment, s, 1e-16);
    alternating_update(b, mul(moment, s), 1e-16);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a.p[i] == doctest::Approx(b.p[i]).epsilon(1e-13));
    for (std::size_t j = 0; j < 6; ++j) CHECK(a.q[j] == doctest::Approx(b.q[j]).epsilon(1e-13));
  }
}

TEST_CASE("single updates never increase the factorization error") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> beta(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 1 + rng() % 10, n = 1 + rng() % 10;
    SecondMomentFactors f = random_factors(rng, m, n, beta(rng));
    const Matrix moment = random_matrix(rng, m, n, 0.1, 2.0);
    const reference::Mat v = to_ref(square(moment));
    const double before = factor_error(v, f);
    alternating_update(f, moment, 0.0);
    CHECK(factor_error(v, f) <= before + 1e-12);
  }
}

TEST_CASE("the closed-form factor is a local minimizer") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + rng() % 6, n = 2 + rng() % 6;
    SecondMomentFactors f = random_factors(rng, m, n, 0.0);
    f.t = 0;
    const Matrix moment = random_matrix(rng, m, n, 0.1, 2.0);
    const reference::Mat v = to_ref(square(moment));
    alternating_update(f, moment, 0.0);  // beta2 = 0: p is exactly the minimizer
    const double best = factor_error(v, f);
    for (std::size_t i = 0; i < m; ++i) {
      for (double delta : {1e-4, -1e-4}) {
        SecondMomentFactors g = f;
        g.p[i] += delta;
        CHECK(factor_error(v, g) >= best);
      }
    }
  }
}

TEST_CASE("factors stay nonnegative") {
  std::mt19937_64 rng(31);
  SecondMomentFactors f = init_factors(random_matrix(rng, 7, 9, -1, 1), 0.8);
  for (int step = 0; step < 500; ++step) {
    alternating_update(f, random_matrix(rng, 7, 9, -3, 3), 1e-16);
    CHECK(std::all_of(f.p.begin(), f.p.end(), [](double x) { return x >= 0.0; }));
    CHECK(std::all_of(f.q.begin(), f.q.end(), [](double x) { return x >= 0.0; }));
  }
}

TEST_CASE("second-moment correction") {
  SecondMomentFactors f = init_factors(Matrix(2, 2, 1.0), 0.9);
  CHECK_THROWS_AS(reconstruct_corrected(f), UsageError);
  alternating_update(f, Matrix(2, 2, 1.0), 1e-16);
  CHECK(f.p[0] == doctest::Approx(1.0).epsilon(1e-15));
  const Matrix u = reconstruct_corrected(f);
  for (double x : u.data()) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bias_corrected_second_moment_entry(f, 1, 0) == u(1, 0));
  CHECK_THROWS_AS(bias_corrected_second_moment_entry(f, 2, 0), DimensionError);

  // beta2 = 0: nothing to correct.
  SecondMomentFactors g = init_factors(Matrix(2, 3, 1.0), 0.0);
  alternating_update(g, Matrix::from_rows({{1, 2, 3}, {4, 5, 6}}), 1e-16);
  CHECK(reconstruct_corrected(g) == outer(g.p, g.q));

  // The bias-removed estimate is clamped at zero.
  SecondMomentFactors h = init_factors(Matrix(1, 2, 10.0), 0.5);
  alternating_update(h, Matrix(1, 2, 0.0), 0.0);
  CHECK(reconstruct_corrected(h) == Matrix(1, 2, 0.0));
}

TEST_CASE("constant input is a fixed point of the corrected estimate") {
  for (double c : {0.25, 1.0, 9.0}) {
    for (double v0_scale : {1.0, 4.0, 0.01}) {
      SecondMomentFactors f = init_factors(Matrix(3, 5, std::sqrt(c * v0_scale)), 0.9);
      const Matrix root(3, 5, std::sqrt(c));
      std::size_t t = 0;
      while (std::pow(0.9, static_cast<double>(t)) >= 1e-10 || t < 2) {
        alternating_update(f, root, 1e-16);
        ++t;
        if (v0_scale == 1.0) {
          const Matrix u = reconstruct_corrected(f);
          for (double x : u.data()) CHECK(x == doctest::Approx(c).epsilon(1e-12));
        }
      }
      const Matrix u = reconstruct_corrected(f);
      for (double x : u.data()) CHECK(std::abs(x - c) <= 1e-8 * c);
    }
  }
}

TEST_CASE("an all-zero start is re-seeded by the first nonzero moment") {
  SecondMomentFactors f = init_factors(Matrix(2, 2, 0.0), 0.9);
  alternating_update(f, Matrix(2, 2, 0.0), 1e-16);
  CHECK(f.p == Vector(2, 0.0));
  CHECK(reconstruct_corrected(f) == Matrix(2, 2, 0.0));

  alternating_update(f, Matrix(2, 2, 3.0), 1e-16);
  CHECK(f.v0 == 9.0);
  CHECK(f.t == 1);
  const Matrix u = reconstruct_corrected(f);
  for (double x : u.data()) CHECK(x == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("alternating update allocates nothing") {
  std::mt19937_64 rng(37);
  SecondMomentFactors f = init_factors(random_matrix(rng, 30, 20, -1, 1), 0.9);
  const Matrix moment = random_matrix(rng, 30, 20, -1, 1);
  AllocationAudit audit;
  for (int k = 0; k < 6; ++k) alternating_update(f, moment, 2.0, 1e-16);
  const CorrectedSecondMoment u(f);
  double total = 0.0;
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 20; ++j) total += u(i, j);
  CHECK(total > 0.0);
  CHECK(audit.allocations() == 0);
}
