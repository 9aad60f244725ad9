#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "alada/problems.hpp"

namespace reference {

/// Central differences of the sample loss in every coordinate of every parameter.
inline std::vector<alada::Matrix> fd_gradient(const alada::Problem& problem, std::vector<alada::Matrix> params,
                                              const alada::Sample& sample, double delta) {
  std::vector<alada::Matrix> out = problem.zero_buffers();
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto x = params[k].data();
    for (std::size_t e = 0; e < x.size(); ++e) {
      const double saved = x[e];
      x[e] = saved + delta;
      const double up = problem.evaluate_loss(params, sample);
      x[e] = saved - delta;
      const double down = problem.evaluate_loss(params, sample);
      x[e] = saved;
      out[k].data()[e] = (up - down) / (2.0 * delta);
    }
  }
  return out;
}

/// |a - b|_F / |b|_F over all parameters, with an absolute floor for a zero gradient.
inline double relative_error(const std::vector<alada::Matrix>& a, const std::vector<alada::Matrix>& b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t e = 0; e < a[k].size(); ++e) {
      const double d = a[k].data()[e] - b[k].data()[e];
      diff += d * d;
      ref += b[k].data()[e] * b[k].data()[e];
    }
  return std::sqrt(diff) / std::max(std::sqrt(ref), 1e-8);
}

}  // namespace reference
