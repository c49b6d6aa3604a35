#include "regularizers.hpp"

#include <cmath>
#include <string>

namespace isodiff {

void IsoConfig::validate() const {
  if (lambda_iso < 0.0) throw ConfigError("IsoConfig: lambda_iso must be >= 0");
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("IsoConfig: gamma must be in [0,1]");
  if (num_probes < 1) throw ConfigError("IsoConfig: num_probes must be >= 1");
}

ChartEncoderMap::ChartEncoderMap(const Mlp& encoder, SphereChart chart, Tensor tail)
    : encoder_(&encoder), chart_(chart), tail_(std::move(tail)) {
  if (encoder.in_dim() != chart.n + tail_.size()) {
    throw ShapeError("ChartEncoderMap: encoder input != ambient dim + tail");
  }
}

Tensor ChartEncoderMap::input_at(const Tensor& z) const {
  return concat(unproject(chart_, z), tail_);
}

Tensor ChartEncoderMap::jvp(const Tensor& z, const Tensor& v) const {
  Tensor vt = unproject_jvp(chart_, z, v);
  Tensor seed({encoder_->in_dim()});
  for (std::size_t i = 0; i < vt.size(); ++i) seed[i] = vt[i];
  return mlp_jvp(*encoder_, input_at(z), seed);
}

Tensor ChartEncoderMap::vjp(const Tensor& z, const Tensor& u) const {
  Tensor w = mlp_vjp(*encoder_, input_at(z), u);
  return unproject_vjp(chart_, z, head(w, chart_.n));
}

AmbientEncoderMap::AmbientEncoderMap(const Mlp& encoder, std::size_t x_dim, Tensor tail)
    : encoder_(&encoder), x_dim_(x_dim), tail_(std::move(tail)) {
  if (encoder.in_dim() != x_dim_ + tail_.size()) {
    throw ShapeError("AmbientEncoderMap: encoder input != x dim + tail");
  }
}

Tensor AmbientEncoderMap::jvp(const Tensor& x, const Tensor& v) const {
  Tensor seed({encoder_->in_dim()});
  for (std::size_t i = 0; i < v.size(); ++i) seed[i] = v[i];
  return mlp_jvp(*encoder_, concat(x, tail_), seed);
}

Tensor AmbientEncoderMap::vjp(const Tensor& x, const Tensor& u) const {
  return head(mlp_vjp(*encoder_, concat(x, tail_), u), x_dim_);
}

Tensor dense_jacobian(const DiffMap& f, const Tensor& z) {
  const std::size_t d = f.in_dim(), m = f.out_dim();
  Tensor jac({m, d});
  if (m <= d) {
    Tensor e({m});
    for (std::size_t r = 0; r < m; ++r) {
      e.fill(0.0);
      e[r] = 1.0;
      Tensor row = f.vjp(z, e);
      for (std::size_t c = 0; c < d; ++c) jac.at(r, c) = row[c];
    }
  } else {
    Tensor e({d});
    for (std::size_t c = 0; c < d; ++c) {
      e.fill(0.0);
      e[c] = 1.0;
      Tensor col = f.jvp(z, e);
      for (std::size_t r = 0; r < m; ++r) jac.at(r, c) = col[r];
    }
  }
  return jac;
}

Tensor riso_exact(const DiffMap& f, const Tensor& z, double g_scalar) {
  const Tensor jac = dense_jacobian(f, z);
  const std::size_t d = f.in_dim(), m = f.out_dim();
  Tensor r({d, d});
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += jac.at(k, i) * jac.at(k, j);
      s /= g_scalar;
      r.at(i, j) = s;
      r.at(j, i) = s;
    }
  }
  return r;
}

namespace {

// Tr(R) and Tr(R^2) from the Jacobian without forming R: Tr(R) = |J|_F^2/g,
// Tr(R^2) = |J^T J|_F^2 / g^2.
void exact_traces(const DiffMap& f, const IsoPoint& p, double* tr, double* tr2) {
  const Tensor jac = dense_jacobian(f, p.z);
  const std::size_t d = f.in_dim(), m = f.out_dim();
  double fro = 0.0;
  for (std::size_t i = 0; i < jac.size(); ++i) fro += jac[i] * jac[i];
  *tr = fro / p.g;
  double fro2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += jac.at(k, i) * jac.at(k, j);
      fro2 += s * s;
    }
  }
  *tr2 = fro2 / (p.g * p.g);
}

constexpr double kDenGuard = 1e-18;

Tensor draw_probe(std::size_t d, ProbeDist dist, RngStream& rng) {
  Tensor v({d});
  for (std::size_t i = 0; i < d; ++i) {
    v[i] = (dist == ProbeDist::gaussian) ? rng.normal() : rng.rademacher();
  }
  return v;
}

}  // namespace

double iso_loss_exact(const DiffMap& f, const std::vector<IsoPoint>& pts) {
  if (pts.empty()) throw ShapeError("iso_loss_exact: empty batch");
  double num = 0.0, den = 0.0;
  for (const IsoPoint& p : pts) {
    double tr = 0.0, tr2 = 0.0;
    exact_traces(f, p, &tr, &tr2);
    num += tr2;
    den += tr;
  }
  num /= static_cast<double>(pts.size());
  den /= static_cast<double>(pts.size());
  const double den2 = den * den;
  if (den2 < kDenGuard) {
    throw NumericError("iso_loss: trace denominator collapsed (dead encoder)");
  }
  return num / den2;
}

double iso_loss_stochastic(const DiffMap& f, const std::vector<IsoPoint>& pts,
                           int num_probes, ProbeDist dist, RngStream& rng) {
  if (pts.empty()) throw ShapeError("iso_loss_stochastic: empty batch");
  if (num_probes < 1) throw ConfigError("iso_loss_stochastic: num_probes >= 1");
  double num = 0.0, den = 0.0;
  std::size_t count = 0;
  for (const IsoPoint& p : pts) {
    const double gi = 1.0 / std::sqrt(p.g);
    for (int k = 0; k < num_probes; ++k) {
      Tensor v = draw_probe(f.in_dim(), dist, rng);
      Tensor u = f.jvp(p.z, v * gi);       // J_f sqrt(G^-1) v
      Tensor w = f.vjp(p.z, u) * gi;       // sqrt(G^-1) J_f^T u
      den += sum_sq(u);                    // v^T R v
      num += sum_sq(w);                    // v^T R^2 v
      ++count;
    }
  }
  num /= static_cast<double>(count);
  den /= static_cast<double>(count);
  const double den2 = den * den;
  if (den2 < kDenGuard) {
    throw NumericError("iso_loss: trace denominator collapsed (dead encoder)");
  }
  return num / den2;
}

Graph::Id iso_loss_on_graph(Graph& g, const Mlp& encoder, const MlpVars& vars,
                            const std::vector<IsoGraphSample>& samples,
                            int num_probes, ProbeDist dist, RngStream& rng) {
  if (samples.empty()) throw ShapeError("iso_loss_on_graph: empty batch");
  Graph::Id num_acc = -1, den_acc = -1;
  std::size_t count = 0;
  for (const IsoGraphSample& s : samples) {
    const std::size_t d = s.sphere ? s.chart.n - 1 : s.x_dim;
    const double gi = 1.0 / std::sqrt(s.g);
    Graph::Id xin = g.constant(s.input);
    MlpTrace trace;
    forward_on_graph(g, encoder, vars, xin, &trace);
    for (int k = 0; k < num_probes; ++k) {
      Tensor v = draw_probe(d, dist, rng);
      Tensor seed({encoder.in_dim()});
      if (s.sphere) {
        Tensor vt = unproject_jvp(s.chart, s.z, v * gi);
        for (std::size_t i = 0; i < vt.size(); ++i) seed[i] = vt[i];
      } else {
        for (std::size_t i = 0; i < d; ++i) seed[i] = v[i];
      }
      Graph::Id u = jvp_on_graph(g, encoder, vars, trace, g.constant(seed));
      Graph::Id den_i = g.sum_sq(u);
      Graph::Id w_full = vjp_on_graph(g, encoder, vars, trace, u);
      Graph::Id w_x = g.front(w_full, s.x_dim);
      Graph::Id w = s.sphere ? g.chart_pullback(w_x, s.chart, s.z, gi) : w_x;
      Graph::Id num_i = g.sum_sq(w);
      num_acc = (num_acc < 0) ? num_i : g.add(num_acc, num_i);
      den_acc = (den_acc < 0) ? den_i : g.add(den_acc, den_i);
      ++count;
    }
  }
  const double inv = 1.0 / static_cast<double>(count);
  Graph::Id num_mean = g.scale(num_acc, inv);
  Graph::Id den_mean = g.scale(den_acc, inv);
  Graph::Id den2 = g.mul(den_mean, den_mean);
  if (g.scalar_value(den2) < kDenGuard) {
    throw NumericError("iso_loss: trace denominator collapsed (dead encoder)");
  }
  return g.div_scalar(num_mean, den2);
}

IsoLossResult iso_loss(const Mlp& encoder, const std::vector<IsoGraphSample>& samples,
                       int num_probes, ProbeDist dist, RngStream& rng) {
  Graph g;
  MlpVars vars = bind_params(g, encoder);
  Graph::Id loss = iso_loss_on_graph(g, encoder, vars, samples, num_probes, dist, rng);
  g.backward(loss);
  IsoLossResult res;
  res.loss = g.scalar_value(loss);
  res.grads = collect_grads(g, encoder, vars);
  return res;
}

Graph::Id path_length_on_graph(Graph& g, const Mlp& f, const MlpVars& vars,
                               const std::vector<Tensor>& inputs, std::size_t x_dim,
                               double a, RngStream& rng,
                               std::vector<double>* norms_out) {
  if (inputs.empty()) throw ShapeError("path_length_reg: empty batch");
  Graph::Id acc = -1;
  for (const Tensor& input : inputs) {
    Graph::Id xin = g.constant(input);
    MlpTrace trace;
    forward_on_graph(g, f, vars, xin, &trace);
    Tensor y({f.out_dim()});
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = rng.normal();
    Graph::Id w_full = vjp_on_graph(g, f, vars, trace, g.constant(y));
    Graph::Id w = (x_dim == f.in_dim()) ? w_full : g.front(w_full, x_dim);
    Graph::Id nrm = g.sqrt_scalar(g.sum_sq(w));
    if (norms_out) norms_out->push_back(g.scalar_value(nrm));
    Graph::Id dev = g.sub_const(nrm, Tensor::scalar(a));
    Graph::Id li = g.mul(dev, dev);
    acc = (acc < 0) ? li : g.add(acc, li);
  }
  return g.scale(acc, 1.0 / static_cast<double>(inputs.size()));
}

PathLenResult path_length_reg(const Mlp& f, const std::vector<Tensor>& inputs,
                              std::size_t x_dim, PathLenState& state,
                              RngStream& rng) {
  Graph g;
  MlpVars vars = bind_params(g, f);
  std::vector<double> norms;
  Graph::Id loss =
      path_length_on_graph(g, f, vars, inputs, x_dim, state.a, rng, &norms);
  g.backward(loss);
  PathLenResult res;
  res.loss = g.scalar_value(loss);
  res.grads = collect_grads(g, f, vars);
  double mean = 0.0;
  for (double v : norms) mean += v;
  mean /= static_cast<double>(norms.size());
  state.a = state.decay * state.a + (1.0 - state.decay) * mean;
  return res;
}

TotalLossResult total_loss(const ScoreNet& net, const Batch& batch,
                           const NoiseSchedule& sched, const IsoConfig& cfg,
                           RngStream& probe_rng) {
  cfg.validate();
  batch.validate(sched.T);
  Graph g;
  MlpVars enc = bind_params(g, net.encoder);
  MlpVars dec = bind_params(g, net.decoder);
  Graph::Id dsm = dsm_on_graph(g, net, enc, dec, batch, sched);

  std::vector<IsoGraphSample> gated;
  if (cfg.lambda_iso > 0.0) {
    const double cutoff = cfg.gamma * static_cast<double>(sched.T);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (static_cast<double>(batch.t[i]) <= cutoff) continue;
      const Tensor xt = perturb(batch.x0[i], batch.t[i], batch.eps[i], sched);
      const Tensor tf = time_features(batch.t[i], sched.T, net.d_time);
      IsoGraphSample s;
      s.x_dim = net.n;
      if (cfg.metric == IsoMetric::sphere) {
        const double r = radius_at(sched, batch.t[i], static_cast<int>(net.n));
        s.sphere = true;
        s.chart = SphereChart(net.n, r);
        s.z = project(s.chart, xt);
        s.g = metric_scalar(s.chart, s.z);
        s.input = concat(unproject(s.chart, s.z), tf);
      } else {
        s.sphere = false;
        s.input = concat(xt, tf);
      }
      gated.push_back(std::move(s));
    }
  }

  Graph::Id loss = dsm;
  TotalLossResult res;
  if (!gated.empty()) {
    Graph::Id iso =
        iso_loss_on_graph(g, net.encoder, enc, gated, cfg.num_probes, cfg.probes, probe_rng);
    res.iso = g.scalar_value(iso);
    res.iso_active = true;
    loss = g.add(dsm, g.scale(iso, cfg.lambda_iso));
  }
  g.backward(loss);
  res.total = g.scalar_value(loss);
  res.dsm = g.scalar_value(dsm);
  res.enc_grads = collect_grads(g, net.encoder, enc);
  res.dec_grads = collect_grads(g, net.decoder, dec);
  return res;
}

}  // namespace isodiff
