#pragma once

#include <cstdint>
#include <vector>

#include "tensor.hpp"

namespace isodiff {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment accumulators are congruent with the parameter list; step strictly
// increases by one per update.
struct AdamState {
  AdamConfig cfg;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

AdamState adam_init(const std::vector<const Tensor*>& params, AdamConfig cfg);
void adam_step(const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads, AdamState& state);

// Exponential moving average over a parameter list (decay per update).
struct ParamEma {
  double decay = 0.9999;
  std::vector<Tensor> shadow;

  void init(const std::vector<const Tensor*>& params);
  void update(const std::vector<const Tensor*>& params);
};

}  // namespace isodiff
