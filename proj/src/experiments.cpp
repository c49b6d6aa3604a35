#include "experiments.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace isodiff {

namespace {

constexpr double kDivergenceGuard = 1e6;

void check_divergence(double loss, const char* where) {
  if (!std::isfinite(loss) || loss > kDivergenceGuard) {
    throw DivergenceError(std::string(where) + ": loss diverged");
  }
}

std::vector<Tensor*> param_ptrs(Mlp& m) {
  std::vector<Tensor*> ps;
  for (Tensor& w : m.weights) ps.push_back(&w);
  for (Tensor& b : m.biases) ps.push_back(&b);
  return ps;
}

std::vector<const Tensor*> param_cptrs(const Mlp& m) {
  std::vector<const Tensor*> ps;
  for (const Tensor& w : m.weights) ps.push_back(&w);
  for (const Tensor& b : m.biases) ps.push_back(&b);
  return ps;
}

std::vector<const Tensor*> grad_cptrs(const MlpGrads& g) {
  std::vector<const Tensor*> ps;
  for (const Tensor& w : g.weights) ps.push_back(&w);
  for (const Tensor& b : g.biases) ps.push_back(&b);
  return ps;
}

void append(std::vector<Tensor*>& dst, std::vector<Tensor*> src) {
  dst.insert(dst.end(), src.begin(), src.end());
}
void append(std::vector<const Tensor*>& dst, std::vector<const Tensor*> src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

}  // namespace

void ToyS2Config::validate() const {
  if (num_points < 1) throw ConfigError("ToyS2Config: num_points must be >= 1");
  if (epochs < 1 || batch_size < 1) throw ConfigError("ToyS2Config: bad training sizes");
  if (!(lr > 0.0)) throw ConfigError("ToyS2Config: lr must be positive");
  if (lambda_iso < 0.0) throw ConfigError("ToyS2Config: lambda_iso must be >= 0");
  if (num_probes < 1) throw ConfigError("ToyS2Config: num_probes must be >= 1");
}

const char* s2_mode_name(S2LossMode mode) {
  switch (mode) {
    case S2LossMode::recon: return "recon";
    case S2LossMode::iso_euclid: return "iso_euclid";
    case S2LossMode::iso_sphere: return "iso_sphere";
  }
  return "?";
}

const char* iso_metric_name(IsoMetric m) {
  return m == IsoMetric::sphere ? "sphere" : "euclidean";
}

namespace {

// Latitude/longitude lines on S^2 staying clear of the excluded polar cap.
std::vector<Tensor> s2_grid_line(bool latitude, int index, int count, int points) {
  const double theta_min = kS2PolarCap + 0.1;
  const double theta_max = 3.141592653589793 - 0.05;
  std::vector<Tensor> line;
  line.reserve(static_cast<std::size_t>(points));
  for (int p = 0; p < points; ++p) {
    const double frac = static_cast<double>(p) / static_cast<double>(points - 1);
    double theta, phi;
    if (latitude) {
      theta = theta_min + (theta_max - theta_min) * (index + 0.5) / count;
      phi = 6.283185307179586 * frac;
    } else {
      theta = theta_min + (theta_max - theta_min) * frac;
      phi = 6.283185307179586 * index / count;
    }
    Tensor x({3});
    x[0] = std::sin(theta) * std::cos(phi);
    x[1] = std::sin(theta) * std::sin(phi);
    x[2] = std::cos(theta);
    line.push_back(std::move(x));
  }
  return line;
}

double s2_recon_mse(const Mlp& enc, const Mlp& dec, const std::vector<Tensor>& data) {
  double acc = 0.0;
  for (const Tensor& x : data) {
    acc += sum_sq(mlp_forward(dec, mlp_forward(enc, x)) - x);
  }
  return acc / static_cast<double>(data.size());
}

}  // namespace

ToyS2Result train_toy_autoencoder(const ToyS2Config& cfg) {
  cfg.validate();
  const std::vector<Tensor> data = gen_s2_dataset(cfg.seed, cfg.num_points);
  const SphereChart chart(3, 1.0);

  Mlp enc = mlp_init(RngStream::derive(cfg.seed, "s2_init.enc"),
                     {3, cfg.hidden, 2}, Activation::tanh);
  Mlp dec = mlp_init(RngStream::derive(cfg.seed, "s2_init.dec"),
                     {2, cfg.hidden, 3}, Activation::tanh);

  AdamConfig acfg;
  acfg.lr = cfg.lr;
  std::vector<const Tensor*> all_params = param_cptrs(enc);
  append(all_params, param_cptrs(dec));
  AdamState adam = adam_init(all_params, acfg);

  RngStream shuffle_rng = RngStream::named(cfg.seed, "s2_shuffle");
  RngStream probe_rng = RngStream::named(cfg.seed, "s2_probe");

  const bool use_iso = cfg.loss_mode != S2LossMode::recon && cfg.lambda_iso > 0.0;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  const int steps_per_epoch = cfg.num_points / cfg.batch_size;
  if (steps_per_epoch < 1) throw ConfigError("ToyS2Config: batch larger than dataset");

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates from the shuffle stream.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(
          shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }
    for (int step = 0; step < steps_per_epoch; ++step) {
      Graph g;
      MlpVars ev = bind_params(g, enc);
      MlpVars dv = bind_params(g, dec);
      Graph::Id recon_acc = -1;
      std::vector<IsoGraphSample> iso_samples;
      for (int b = 0; b < cfg.batch_size; ++b) {
        const Tensor& x = data[order[static_cast<std::size_t>(step * cfg.batch_size + b)]];
        Graph::Id xin = g.constant(x);
        Graph::Id h = forward_on_graph(g, enc, ev, xin);
        Graph::Id xr = forward_on_graph(g, dec, dv, h);
        Graph::Id li = g.sum_sq(g.sub_const(xr, x));
        recon_acc = (recon_acc < 0) ? li : g.add(recon_acc, li);
        if (use_iso) {
          IsoGraphSample s;
          s.x_dim = 3;
          s.sphere = true;  // both iso modes work in chart coordinates
          s.chart = chart;
          s.z = project(chart, x);
          s.g = (cfg.loss_mode == S2LossMode::iso_sphere) ? metric_scalar(chart, s.z) : 1.0;
          s.input = x;
          iso_samples.push_back(std::move(s));
        }
      }
      Graph::Id loss = g.scale(recon_acc, 1.0 / static_cast<double>(cfg.batch_size));
      if (use_iso) {
        Graph::Id iso = iso_loss_on_graph(g, enc, ev, iso_samples, cfg.num_probes,
                                          ProbeDist::gaussian, probe_rng);
        loss = g.add(loss, g.scale(iso, cfg.lambda_iso));
      }
      check_divergence(g.scalar_value(loss), "train_toy_autoencoder");
      g.backward(loss);
      MlpGrads eg = collect_grads(g, enc, ev);
      MlpGrads dg = collect_grads(g, dec, dv);
      std::vector<Tensor*> params = param_ptrs(enc);
      append(params, param_ptrs(dec));
      std::vector<const Tensor*> grads = grad_cptrs(eg);
      append(grads, grad_cptrs(dg));
      adam_step(params, grads, adam);
    }
  }

  ToyS2Result res;
  res.recon_mse = s2_recon_mse(enc, dec, data);

  // Metric-aware encoder spectra: J_f(z) / sqrt(g) with f = enc o unproject.
  ChartEncoderMap fmap(enc, chart, Tensor(std::vector<std::size_t>{0}));
  std::vector<Tensor> jacobians;
  const std::size_t eval_count = std::min<std::size_t>(data.size(), 512);
  for (std::size_t i = 0; i < eval_count; ++i) {
    const Tensor z = project(chart, data[i]);
    const double gi = 1.0 / std::sqrt(metric_scalar(chart, z));
    jacobians.push_back(dense_jacobian(fmap, z) * gi);
  }
  res.mcn = mcn_from_jacobians(jacobians);
  res.vor = vor_from_jacobians(jacobians);

  const int lines = 12, points = 128;
  for (int i = 0; i < lines; ++i) {
    Polyline pl;
    pl.line_id = i;
    for (const Tensor& x : s2_grid_line(true, i, lines, points)) {
      const Tensor h = mlp_forward(enc, x);
      pl.points.push_back({h[0], h[1]});
    }
    res.contours.push_back(std::move(pl));
  }
  for (int i = 0; i < lines; ++i) {
    Polyline pl;
    pl.line_id = lines + i;
    for (const Tensor& x : s2_grid_line(false, i, lines, points)) {
      const Tensor h = mlp_forward(enc, x);
      pl.points.push_back({h[0], h[1]});
    }
    res.contours.push_back(std::move(pl));
  }

  res.encoder = std::move(enc);
  res.decoder = std::move(dec);
  return res;
}

void Toy2DConfig::validate() const {
  if (ambient_n < 8) throw ConfigError("Toy2DConfig: ambient_n must be >= 8");
  if (bottleneck_m >= ambient_n) throw ConfigError("Toy2DConfig: m must be < n");
  if (train_size < batch_size || batch_size < 1) throw ConfigError("Toy2DConfig: bad sizes");
  if (epochs < 1) throw ConfigError("Toy2DConfig: epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("Toy2DConfig: lr must be positive");
  if (T < 1) throw ConfigError("Toy2DConfig: T must be >= 1");
  if (ddim_steps < 1 || T % ddim_steps != 0) {
    throw ConfigError("Toy2DConfig: ddim_steps must divide T");
  }
  if (ema_decay < 0.0 || ema_decay >= 1.0) {
    throw ConfigError("Toy2DConfig: ema_decay must be in [0,1)");
  }
  if (lambda_pl < 0.0) throw ConfigError("Toy2DConfig: lambda_pl must be >= 0");
  iso.validate();
}

TrainDiffusionResult train_toy_diffusion(const Toy2DConfig& cfg) {
  cfg.validate();
  Toy2dSpec dspec{cfg.dataset, cfg.ambient_n, cfg.noise_scale, cfg.train_size, cfg.seed};
  const std::vector<Tensor> data = gen_toy2d_dataset(dspec);

  TrainDiffusionResult res;
  res.sched = schedule_linear(cfg.T, cfg.beta_start, cfg.beta_end);
  res.net = scorenet_init(RngStream::derive(cfg.seed, "init"), cfg.ambient_n,
                          cfg.bottleneck_m, cfg.hidden, cfg.d_time, Activation::tanh);
  ScoreNet& net = res.net;

  AdamConfig acfg;
  acfg.lr = cfg.lr;
  std::vector<const Tensor*> all_params = param_cptrs(net.encoder);
  append(all_params, param_cptrs(net.decoder));
  AdamState adam = adam_init(all_params, acfg);

  ParamEma ema;
  const bool use_ema = cfg.ema_decay > 0.0;
  if (use_ema) {
    ema.decay = cfg.ema_decay;
    ema.init(all_params);
  }

  RngStream shuffle_rng = RngStream::named(cfg.seed, "shuffle");
  RngStream noise_rng = RngStream::named(cfg.seed, "noise");
  RngStream time_rng = RngStream::named(cfg.seed, "timesteps");
  RngStream probe_rng = RngStream::named(cfg.seed, "iso_probe");
  RngStream pl_rng = RngStream::named(cfg.seed, "pl_y");

  PathLenState pl_state;
  pl_state.decay = cfg.pl_decay;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const int steps_per_epoch = cfg.train_size / cfg.batch_size;

  const auto t_start = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(
          shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }
    double dsm_sum = 0.0, iso_sum = 0.0;
    int iso_steps = 0;
    for (int step = 0; step < steps_per_epoch; ++step) {
      Batch batch;
      for (int b = 0; b < cfg.batch_size; ++b) {
        const Tensor& x0 = data[order[static_cast<std::size_t>(step * cfg.batch_size + b)]];
        Tensor eps(x0.shape());
        for (std::size_t k = 0; k < eps.size(); ++k) eps[k] = noise_rng.normal();
        batch.x0.push_back(x0);
        batch.eps.push_back(std::move(eps));
        batch.t.push_back(static_cast<int>(time_rng.uniform_int(1, cfg.T)));
      }

      MlpGrads enc_g, dec_g;
      double dsm_val = 0.0;
      if (cfg.regularizer == RegKind::iso && cfg.iso.lambda_iso > 0.0) {
        TotalLossResult tl = total_loss(net, batch, res.sched, cfg.iso, probe_rng);
        check_divergence(tl.total, "train_toy_diffusion");
        dsm_val = tl.dsm;
        if (tl.iso_active) {
          iso_sum += tl.iso;
          ++iso_steps;
        }
        enc_g = std::move(tl.enc_grads);
        dec_g = std::move(tl.dec_grads);
      } else if (cfg.regularizer == RegKind::path_length && cfg.lambda_pl > 0.0) {
        DsmResult dr = dsm_loss(net, batch, res.sched);
        check_divergence(dr.loss, "train_toy_diffusion");
        dsm_val = dr.loss;
        enc_g = std::move(dr.enc_grads);
        dec_g = std::move(dr.dec_grads);
        // Same timestep gate as the isometry loss so the comparison isolates
        // the regularizer form.
        std::vector<Tensor> pl_inputs;
        const double cutoff = cfg.iso.gamma * static_cast<double>(cfg.T);
        for (std::size_t b = 0; b < batch.size(); ++b) {
          if (static_cast<double>(batch.t[b]) <= cutoff) continue;
          const Tensor xt = perturb(batch.x0[b], batch.t[b], batch.eps[b], res.sched);
          pl_inputs.push_back(
              concat(xt, time_features(batch.t[b], cfg.T, net.d_time)));
        }
        if (!pl_inputs.empty()) {
          PathLenResult pr =
              path_length_reg(net.encoder, pl_inputs, net.n, pl_state, pl_rng);
          check_divergence(pr.loss, "train_toy_diffusion(pl)");
          iso_sum += pr.loss;
          ++iso_steps;
          enc_g.add(pr.grads, cfg.lambda_pl);
        }
      } else {
        DsmResult dr = dsm_loss(net, batch, res.sched);
        check_divergence(dr.loss, "train_toy_diffusion");
        dsm_val = dr.loss;
        enc_g = std::move(dr.enc_grads);
        dec_g = std::move(dr.dec_grads);
      }
      dsm_sum += dsm_val;

      std::vector<Tensor*> params = param_ptrs(net.encoder);
      append(params, param_ptrs(net.decoder));
      std::vector<const Tensor*> grads = grad_cptrs(enc_g);
      append(grads, grad_cptrs(dec_g));
      adam_step(params, grads, adam);
      if (use_ema) {
        std::vector<const Tensor*> cur = param_cptrs(net.encoder);
        append(cur, param_cptrs(net.decoder));
        ema.update(cur);
      }
    }
    EpochLog log;
    log.epoch = epoch;
    log.dsm = dsm_sum / static_cast<double>(steps_per_epoch);
    log.iso = iso_steps > 0 ? iso_sum / static_cast<double>(iso_steps) : 0.0;
    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    res.log.push_back(log);
  }
  res.initial_dsm = res.log.front().dsm;
  res.final_dsm = res.log.back().dsm;

  if (use_ema) {
    ScoreNet shadow = net;
    std::size_t idx = 0;
    for (Tensor& w : shadow.encoder.weights) w = ema.shadow[idx++];
    for (Tensor& b : shadow.encoder.biases) b = ema.shadow[idx++];
    for (Tensor& w : shadow.decoder.weights) w = ema.shadow[idx++];
    for (Tensor& b : shadow.decoder.biases) b = ema.shadow[idx++];
    res.ema_net = std::move(shadow);
  }
  return res;
}

std::vector<SweepRow> run_sweep(const Toy2DConfig& base,
                                const std::vector<double>& lambdas,
                                const std::vector<double>& gammas,
                                const std::vector<IsoMetric>& metrics_list,
                                const MetricsOptions& eval_opt) {
  if (lambdas.empty() || gammas.empty() || metrics_list.empty()) {
    throw ConfigError("run_sweep: empty grid");
  }
  std::vector<SweepRow> rows;
  for (double lambda : lambdas) {
    for (double gamma : gammas) {
      for (IsoMetric metric : metrics_list) {
        SweepRow row;
        row.cell = SweepCell{lambda, gamma, metric};
        row.seed = base.seed;
        try {
          Toy2DConfig cfg = base;
          cfg.regularizer = RegKind::iso;
          cfg.iso.lambda_iso = lambda;
          cfg.iso.gamma = gamma;
          cfg.iso.metric = metric;
          TrainDiffusionResult tr = train_toy_diffusion(cfg);
          const ScoreNet& eval_net = tr.ema_net ? *tr.ema_net : tr.net;
          Toy2dSpec dspec{cfg.dataset, cfg.ambient_n, cfg.noise_scale,
                          cfg.train_size, cfg.seed};
          const std::vector<Tensor> data = gen_toy2d_dataset(dspec);
          row.dsm_final = tr.final_dsm;
          row.metrics = compute_metrics(eval_net, tr.sched, data, eval_opt);
        } catch (const Error& e) {
          row.failed = true;
          row.error = e.what();
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace isodiff
