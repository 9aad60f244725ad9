#include "alada/theory.hpp"

#include <cmath>

#include "alada/errors.hpp"

namespace alada {
namespace {

void check_beta(double beta, const char* name) {
  if (!(beta >= 0.0 && beta < 1.0)) throw UsageError(std::string(name) + " must lie in [0, 1)");
}

double min_eps(std::size_t m, std::size_t n, double grad_bound) {
  return 2.0 * std::sqrt(static_cast<double>(m * n)) * grad_bound * grad_bound;
}

}  // namespace

double bound_gamma(std::size_t m, std::size_t n, double grad_bound, double eps, double beta2) {
  check_beta(beta2, "beta2");
  return std::sqrt((min_eps(m, n, grad_bound) + eps) / (1.0 - beta2));
}

double bound_phi(std::size_t m, std::size_t n, double grad_bound, double smoothness, double eps, double eta,
                 double beta1, std::size_t horizon) {
  check_beta(beta1, "beta1");
  if (horizon == 0) throw UsageError("horizon must be positive");
  const double mn_g2 = static_cast<double>(m * n) * grad_bound * grad_bound;
  const double keep = 1.0 - beta1;
  const double startup = 8.0 / (static_cast<double>(horizon) * keep);
  const double drift = eta * eta / (keep * keep) * 2.0 * smoothness * smoothness / eps;
  return mn_g2 * (startup + drift + keep);
}

double theorem_bound(const TheoryParams& p, double beta1, double beta2, double eps, double eta, std::size_t horizon,
                     std::size_t m, std::size_t n) {
  if (!(eps > 0.0) || !(eta > 0.0)) throw UsageError("theorem_bound: eps and eta must be positive");
  const double gamma = bound_gamma(m, n, p.grad_bound, eps, beta2);
  const double phi = bound_phi(m, n, p.grad_bound, p.smoothness, eps, eta, beta1, horizon);
  const double mn_g2 = static_cast<double>(m * n) * p.grad_bound * p.grad_bound;
  const double head = 2.0 * gamma * p.delta_f / (eta * static_cast<double>(horizon));
  const double drift = p.smoothness * mn_g2 * gamma * eta / eps;
  const double momentum = gamma * gamma * phi / eps;
  return head + drift + momentum;
}

CorollaryPrescription corollary_constant_beta(const TheoryParams& p, double beta1, double beta2, double eps,
                                              std::size_t horizon, std::size_t m, std::size_t n) {
  check_beta(beta1, "beta1");
  check_beta(beta2, "beta2");
  const double floor = min_eps(m, n, p.grad_bound);
  if (eps <= 0.0) eps = floor;
  if (eps < floor) throw UsageError("corollary requires eps >= 2 sqrt(mn) G^2");
  const double keep = 1.0 - beta1;
  const double eta = std::pow(keep, 1.5) / p.smoothness * std::sqrt(eps / 2.0);
  const double mn_g2 = static_cast<double>(m * n) * p.grad_bound * p.grad_bound;
  const double tail = 4.0 * p.smoothness * p.delta_f / (std::pow(keep, 1.5) * std::sqrt(1.0 - beta2)) +
                      16.0 * mn_g2 / (keep * (1.0 - beta2));
  const double bound = 5.0 * mn_g2 * keep / (1.0 - beta2) + tail / static_cast<double>(horizon);
  return {eps, eta, beta1, bound};
}

CorollaryPrescription corollary_horizon_beta(const TheoryParams& p, double beta2, double eps, std::size_t horizon,
                                             std::size_t m, std::size_t n) {
  check_beta(beta2, "beta2");
  if (horizon < 2) throw UsageError("corollary requires a horizon of at least 2");
  const double rate = std::pow(static_cast<double>(horizon), -1.0 / 2.5);
  const double beta1 = 1.0 - rate;
  CorollaryPrescription out = corollary_constant_beta(p, beta1, beta2, eps, horizon, m, n);
  const double mn_g2 = static_cast<double>(m * n) * p.grad_bound * p.grad_bound;
  out.bound = (4.0 * p.smoothness * p.delta_f / std::sqrt(1.0 - beta2) + 21.0 * mn_g2 / (1.0 - beta2)) * rate;
  return out;
}

}  // namespace alada
