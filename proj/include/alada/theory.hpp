#pragma once

#include <cstddef>

namespace alada {

/// Problem constants entering the non-convex convergence bound.
struct TheoryParams {
  double smoothness;  ///< L
  double grad_bound;  ///< G, l-infinity bound on stochastic gradients
  double f_star;      ///< lower bound of the objective
  double delta_f;     ///< f(X_0) - f_star
};

/// Gamma = sqrt((2 sqrt(mn) G^2 + eps) / (1 - beta2)). UsageError if beta2 >= 1.
double bound_gamma(std::size_t m, std::size_t n, double grad_bound, double eps, double beta2);

/// Phi = mn G^2 (8 / (T (1 - beta1)) + eta^2 / (1 - beta1)^2 * 2 L^2 / eps + 1 - beta1).
double bound_phi(std::size_t m, std::size_t n, double grad_bound, double smoothness, double eps, double eta,
                 double beta1, std::size_t horizon);

/// Right-hand side bounding (1/T) sum_t E|grad f(X_t)|^2 for Alada run with
/// eta_t = eta (1 - beta1^(t+1)):
///   2 Gamma Delta_f / (eta T) + L mn G^2 Gamma eta / eps + Gamma^2 Phi / eps.
double theorem_bound(const TheoryParams& params, double beta1, double beta2, double eps, double eta,
                     std::size_t horizon, std::size_t m, std::size_t n);

struct CorollaryPrescription {
  double eps;
  double eta;
  double beta1;
  double bound;
};

/// Constant betas, eps >= 2 sqrt(mn) G^2 and eta = (1 - beta1)^1.5 / L * sqrt(eps / 2):
///   5 mn G^2 (1 - beta1) / (1 - beta2)
///   + (4 L Delta_f / ((1 - beta1)^1.5 sqrt(1 - beta2)) + 16 mn G^2 / ((1 - beta1)(1 - beta2))) / T.
/// `eps` <= 0 selects the smallest admissible value. UsageError if eps is too small.
CorollaryPrescription corollary_constant_beta(const TheoryParams& params, double beta1, double beta2, double eps,
                                              std::size_t horizon, std::size_t m, std::size_t n);

/// beta1 = 1 - T^(-1/2.5) with the constant-beta eps and eta rule:
///   (4 L Delta_f / sqrt(1 - beta2) + 21 mn G^2 / (1 - beta2)) T^(-1/2.5).
CorollaryPrescription corollary_horizon_beta(const TheoryParams& params, double beta2, double eps,
                                             std::size_t horizon, std::size_t m, std::size_t n);

}  // namespace alada
