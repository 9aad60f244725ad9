#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

namespace alada {

enum class Schedule {
  constant,       ///< eta0
  linear_decay,   ///< eta0 (1 - t/T)
  theorem,        ///< eta0 (1 - beta1^(t+1))
  paper_literal,  ///< eta0 / (1 - t/T); grows with t
};

std::string_view to_string(Schedule s) noexcept;
std::optional<Schedule> parse_schedule(std::string_view name) noexcept;

/// Step size at iteration t of a T-step run. Requires 0 <= t < T (UsageError otherwise).
double step_size(Schedule schedule, double eta0, double beta1, std::size_t t, std::size_t horizon);

}  // namespace alada
