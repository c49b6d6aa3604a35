#pragma once

#include <vector>

#include "errors.hpp"

namespace isodiff {

// Discrete noise schedule over timesteps 1..T. alpha_bar(0) is defined as 1
// so that stepping to t=0 recovers the clean sample exactly.
struct NoiseSchedule {
  int T = 0;
  std::vector<double> beta;       // beta[t-1] for t in 1..T
  std::vector<double> alpha;      // 1 - beta
  std::vector<double> alpha_bar;  // cumulative product of alpha

  double beta_at(int t) const { return beta.at(static_cast<std::size_t>(t - 1)); }
  double alpha_at(int t) const { return alpha.at(static_cast<std::size_t>(t - 1)); }
  double alpha_bar_at(int t) const {
    if (t == 0) return 1.0;
    return alpha_bar.at(static_cast<std::size_t>(t - 1));
  }
  void check_t(int t, const char* where) const;
};

// Linear beta ramp: beta_start at t=1 up to beta_end at t=T. With T=1 the
// single point sits at the end of the ramp.
NoiseSchedule schedule_linear(int T, double beta_start, double beta_end);

}  // namespace isodiff
