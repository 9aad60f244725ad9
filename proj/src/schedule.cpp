#include "alada/schedule.hpp"

#include <cmath>
#include <string>

#include "alada/errors.hpp"

namespace alada {

std::string_view to_string(Schedule s) noexcept {
  switch (s) {
    case Schedule::constant: return "constant";
    case Schedule::linear_decay: return "linear_decay";
    case Schedule::theorem: return "theorem";
    case Schedule::paper_literal: return "paper_literal";
  }
  return "unknown";
}

std::optional<Schedule> parse_schedule(std::string_view name) noexcept {
  for (Schedule s : {Schedule::constant, Schedule::linear_decay, Schedule::theorem, Schedule::paper_literal}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

double step_size(Schedule schedule, double eta0, double beta1, std::size_t t, std::size_t horizon) {
  if (t >= horizon) {
    throw UsageError("step_size: step " + std::to_string(t) + " is outside the horizon " + std::to_string(horizon));
  }
  const double frac = static_cast<double>(t) / static_cast<double>(horizon);
  switch (schedule) {
    case Schedule::constant: return eta0;
    case Schedule::linear_decay: return eta0 * (1.0 - frac);
    case Schedule::theorem: return eta0 * (1.0 - std::pow(beta1, static_cast<double>(t + 1)));
    case Schedule::paper_literal: return eta0 / (1.0 - frac);
  }
  return eta0;
}

}  // namespace alada
