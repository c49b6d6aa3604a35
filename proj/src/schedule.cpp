#include "schedule.hpp"

#include <string>

namespace isodiff {

void NoiseSchedule::check_t(int t, const char* where) const {
  if (t < 1 || t > T) {
    throw ShapeError(std::string(where) + ": timestep " + std::to_string(t) +
                     " outside [1," + std::to_string(T) + "]");
  }
}

NoiseSchedule schedule_linear(int T, double beta_start, double beta_end) {
  if (T < 1) throw ConfigError("schedule_linear: T must be >= 1");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
    throw ConfigError("schedule_linear: need 0 < beta_start <= beta_end < 1");
  }
  NoiseSchedule s;
  s.T = T;
  s.beta.resize(static_cast<std::size_t>(T));
  s.alpha.resize(static_cast<std::size_t>(T));
  s.alpha_bar.resize(static_cast<std::size_t>(T));
  double prod = 1.0;
  for (int t = 1; t <= T; ++t) {
    const double frac = (T == 1) ? 1.0 : static_cast<double>(t - 1) / static_cast<double>(T - 1);
    const double b = beta_start * (1.0 - frac) + beta_end * frac;
    const double a = 1.0 - b;
    prod *= a;
    s.beta[static_cast<std::size_t>(t - 1)] = b;
    s.alpha[static_cast<std::size_t>(t - 1)] = a;
    s.alpha_bar[static_cast<std::size_t>(t - 1)] = prod;
  }
  return s;
}

}  // namespace isodiff
