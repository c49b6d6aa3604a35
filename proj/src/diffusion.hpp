#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mlp.hpp"
#include "schedule.hpp"

namespace isodiff {

// Encoder/decoder score network. The encoder output h is the semantic
// feature every metric reports; the decoder turns it into the noise
// prediction. Both take sinusoidal time features concatenated to their
// input.
struct ScoreNet {
  Mlp encoder;  // (n + d_time) -> m
  Mlp decoder;  // (m + d_time) -> n
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t d_time = 0;
};

ScoreNet scorenet_init(std::uint64_t seed, std::size_t n, std::size_t m,
                       std::size_t hidden, std::size_t d_time, Activation act);

// [t/T, sin(2^k pi t/T), cos(2^k pi t/T), ...] truncated to d_time entries.
Tensor time_features(int t, int T, std::size_t d_time);

Tensor scorenet_h(const ScoreNet& net, const Tensor& x, int t, int T);
Tensor scorenet_eps(const ScoreNet& net, const Tensor& x, int t, int T);
// Both in one pass, avoiding a duplicate encoder evaluation.
std::pair<Tensor, Tensor> scorenet_h_eps(const ScoreNet& net, const Tensor& x,
                                         int t, int T);

struct Batch {
  std::vector<Tensor> x0;   // B clean samples in R^n
  std::vector<Tensor> eps;  // B noise draws in R^n
  std::vector<int> t;       // per-row timestep in [1,T]

  std::size_t size() const { return x0.size(); }
  void validate(int T) const;
};

// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps.
Tensor perturb(const Tensor& x0, int t, const Tensor& eps, const NoiseSchedule& sched);

// Mean over the batch of |eps_hat - eps|^2, with parameter gradients.
struct DsmResult {
  double loss = 0.0;
  MlpGrads enc_grads;
  MlpGrads dec_grads;
};
DsmResult dsm_loss(const ScoreNet& net, const Batch& batch, const NoiseSchedule& sched);

// Records the DSM objective on an existing tape; used by the combined
// training loss so one backward pass covers every term.
Graph::Id dsm_on_graph(Graph& g, const ScoreNet& net, const MlpVars& enc,
                       const MlpVars& dec, const Batch& batch,
                       const NoiseSchedule& sched);

// Deterministic DDIM update from t to t_prev < t (alpha_bar(0) = 1).
Tensor ddim_step(const ScoreNet& net, const Tensor& x_t, int t, int t_prev,
                 const NoiseSchedule& sched);

struct Trajectory {
  std::vector<int> timesteps;       // visited grid, descending from T to 0
  std::vector<Tensor> states;       // num_steps + 1 states
  std::vector<Tensor> features;     // h at each stepped-from state (num_steps)
  std::vector<int> feature_times;   // timesteps the features were taken at
};

// Uniform sub-schedule over [0, T]; num_steps must divide T.
std::vector<int> ddim_grid(int T, int num_steps);

Trajectory ddim_sample(const ScoreNet& net, const Tensor& x_T, int num_steps,
                       const NoiseSchedule& sched);
Trajectory ddim_invert(const ScoreNet& net, const Tensor& x0, int num_steps,
                       const NoiseSchedule& sched);

}  // namespace isodiff
