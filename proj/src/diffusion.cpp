#include "diffusion.hpp"

#include <cmath>
#include <string>

namespace isodiff {

ScoreNet scorenet_init(std::uint64_t seed, std::size_t n, std::size_t m,
                       std::size_t hidden, std::size_t d_time, Activation act) {
  if (m >= n) throw ConfigError("scorenet_init: bottleneck m must be < n");
  ScoreNet net;
  net.n = n;
  net.m = m;
  net.d_time = d_time;
  net.encoder = mlp_init(seed ^ 0x9e3779b97f4a7c15ULL, {n + d_time, hidden, hidden, m}, act);
  net.decoder = mlp_init(seed ^ 0x7f4a7c159e3779b9ULL, {m + d_time, hidden, hidden, n}, act);
  return net;
}

Tensor time_features(int t, int T, std::size_t d_time) {
  if (d_time < 2 || d_time % 2 != 0) {
    throw ConfigError("time_features: d_time must be even and >= 2");
  }
  const double frac = static_cast<double>(t) / static_cast<double>(T);
  Tensor f({d_time});
  f[0] = frac;
  const double pi = 3.14159265358979323846;
  double freq = pi;  // 2^k * pi, k = 0, 1, ...
  std::size_t i = 1;
  while (i < d_time) {
    f[i++] = std::sin(freq * frac);
    if (i < d_time) f[i++] = std::cos(freq * frac);
    freq *= 2.0;
  }
  return f;
}

Tensor scorenet_h(const ScoreNet& net, const Tensor& x, int t, int T) {
  require_vector(x, net.n, "scorenet_h");
  return mlp_forward(net.encoder, concat(x, time_features(t, T, net.d_time)));
}

std::pair<Tensor, Tensor> scorenet_h_eps(const ScoreNet& net, const Tensor& x,
                                         int t, int T) {
  Tensor tf = time_features(t, T, net.d_time);
  Tensor h = mlp_forward(net.encoder, concat(x, tf));
  Tensor eps = mlp_forward(net.decoder, concat(h, tf));
  return {std::move(h), std::move(eps)};
}

Tensor scorenet_eps(const ScoreNet& net, const Tensor& x, int t, int T) {
  return scorenet_h_eps(net, x, t, T).second;
}

void Batch::validate(int T) const {
  if (x0.empty()) throw ShapeError("Batch: empty");
  if (eps.size() != x0.size() || t.size() != x0.size()) {
    throw ShapeError("Batch: column lengths differ");
  }
  for (std::size_t i = 0; i < x0.size(); ++i) {
    require_same_shape(x0[i], eps[i], "Batch");
    if (t[i] < 1 || t[i] > T) throw ShapeError("Batch: timestep out of range");
  }
}

Tensor perturb(const Tensor& x0, int t, const Tensor& eps, const NoiseSchedule& sched) {
  sched.check_t(t, "perturb");
  require_same_shape(x0, eps, "perturb");
  const double ab = sched.alpha_bar_at(t);
  const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
  Tensor out(x0.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + b * eps[i];
  return out;
}

Graph::Id dsm_on_graph(Graph& g, const ScoreNet& net, const MlpVars& enc,
                       const MlpVars& dec, const Batch& batch,
                       const NoiseSchedule& sched) {
  batch.validate(sched.T);
  Graph::Id total = -1;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Tensor xt = perturb(batch.x0[i], batch.t[i], batch.eps[i], sched);
    const Tensor tf = time_features(batch.t[i], sched.T, net.d_time);
    Graph::Id xin = g.constant(concat(xt, tf));
    Graph::Id h = forward_on_graph(g, net.encoder, enc, xin);
    Graph::Id din = g.concat_tail(h, tf);
    Graph::Id eps_hat = forward_on_graph(g, net.decoder, dec, din);
    Graph::Id li = g.sum_sq(g.sub_const(eps_hat, batch.eps[i]));
    total = (total < 0) ? li : g.add(total, li);
  }
  return g.scale(total, 1.0 / static_cast<double>(batch.size()));
}

DsmResult dsm_loss(const ScoreNet& net, const Batch& batch, const NoiseSchedule& sched) {
  Graph g;
  MlpVars enc = bind_params(g, net.encoder);
  MlpVars dec = bind_params(g, net.decoder);
  Graph::Id loss = dsm_on_graph(g, net, enc, dec, batch, sched);
  g.backward(loss);
  DsmResult res;
  res.loss = g.scalar_value(loss);
  res.enc_grads = collect_grads(g, net.encoder, enc);
  res.dec_grads = collect_grads(g, net.decoder, dec);
  return res;
}

namespace {

Tensor ddim_update(const Tensor& x, const Tensor& eps_hat, double ab_from, double ab_to) {
  const double scale = std::sqrt(ab_to / ab_from);
  const double shift =
      std::sqrt(ab_to) * (std::sqrt(1.0 / ab_to - 1.0) - std::sqrt(1.0 / ab_from - 1.0));
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * x[i] + shift * eps_hat[i];
  return out;
}

}  // namespace

Tensor ddim_step(const ScoreNet& net, const Tensor& x_t, int t, int t_prev,
                 const NoiseSchedule& sched) {
  if (!(t_prev < t) || t_prev < 0 || t > sched.T) {
    throw ShapeError("ddim_step: need 0 <= t_prev < t <= T");
  }
  Tensor eps_hat = scorenet_eps(net, x_t, t, sched.T);
  return ddim_update(x_t, eps_hat, sched.alpha_bar_at(t), sched.alpha_bar_at(t_prev));
}

std::vector<int> ddim_grid(int T, int num_steps) {
  if (num_steps < 1 || T % num_steps != 0) {
    throw ConfigError("ddim_grid: num_steps must be >= 1 and divide T (T=" +
                      std::to_string(T) + ", steps=" + std::to_string(num_steps) + ")");
  }
  std::vector<int> grid;
  const int stride = T / num_steps;
  for (int t = 0; t <= T; t += stride) grid.push_back(t);
  return grid;
}

Trajectory ddim_sample(const ScoreNet& net, const Tensor& x_T, int num_steps,
                       const NoiseSchedule& sched) {
  const std::vector<int> grid = ddim_grid(sched.T, num_steps);
  Trajectory traj;
  traj.states.push_back(x_T);
  for (std::size_t j = grid.size(); j-- > 0;) traj.timesteps.push_back(grid[j]);
  for (std::size_t j = grid.size() - 1; j > 0; --j) {
    const int t = grid[j], t_prev = grid[j - 1];
    const Tensor& x = traj.states.back();
    auto [h, eps_hat] = scorenet_h_eps(net, x, t, sched.T);
    traj.features.push_back(std::move(h));
    traj.feature_times.push_back(t);
    traj.states.push_back(
        ddim_update(x, eps_hat, sched.alpha_bar_at(t), sched.alpha_bar_at(t_prev)));
  }
  return traj;
}

Trajectory ddim_invert(const ScoreNet& net, const Tensor& x0, int num_steps,
                       const NoiseSchedule& sched) {
  const std::vector<int> grid = ddim_grid(sched.T, num_steps);
  Trajectory traj;
  traj.timesteps = grid;
  traj.states.push_back(x0);
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    const int t = grid[j], t_next = grid[j + 1];
    const Tensor& x = traj.states.back();
    auto [h, eps_hat] = scorenet_h_eps(net, x, t, sched.T);
    traj.features.push_back(std::move(h));
    traj.feature_times.push_back(t);
    traj.states.push_back(
        ddim_update(x, eps_hat, sched.alpha_bar_at(t), sched.alpha_bar_at(t_next)));
  }
  return traj;
}

}  // namespace isodiff
