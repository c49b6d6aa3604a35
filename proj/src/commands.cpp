#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>

#include "checkpoint.hpp"
#include "csvio.hpp"
#include "metrics.hpp"

namespace isodiff {

namespace fs = std::filesystem;

int run_guarded(const std::string& what, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const ShapeError& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const CapacityError& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return kExitDiverged;
  } catch (const NumericError& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return kExitDiverged;
  } catch (const SingularityError& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return kExitDiverged;
  } catch (const IoError& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return kExitConfig;
  }
}

namespace {

Toy2dKind dataset_from_string(const std::string& s) {
  if (s == "two_gaussians") return Toy2dKind::two_gaussians;
  if (s == "ring") return Toy2dKind::ring;
  if (s == "two_moons_embedded") return Toy2dKind::two_moons_embedded;
  throw ConfigError("unknown dataset: " + s);
}

IsoMetric metric_from_string(const std::string& s) {
  if (s == "sphere") return IsoMetric::sphere;
  if (s == "euclidean") return IsoMetric::euclidean;
  throw ConfigError("unknown metric: " + s);
}

RegKind regularizer_from_string(const std::string& s) {
  if (s == "none") return RegKind::none;
  if (s == "iso") return RegKind::iso;
  if (s == "path_length") return RegKind::path_length;
  throw ConfigError("unknown regularizer: " + s);
}

ProbeDist probes_from_string(const std::string& s) {
  if (s == "gaussian") return ProbeDist::gaussian;
  if (s == "rademacher") return ProbeDist::rademacher;
  throw ConfigError("unknown probe_dist: " + s);
}

S2LossMode s2_mode_from_string(const std::string& s) {
  if (s == "recon") return S2LossMode::recon;
  if (s == "iso_euclid") return S2LossMode::iso_euclid;
  if (s == "iso_sphere") return S2LossMode::iso_sphere;
  throw ConfigError("unknown s2_mode: " + s);
}

fs::path ensure_out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.get_string("out_dir"));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir.string());
  return dir;
}

std::string require_ckpt(const RunConfig& cfg) {
  const std::string& path = cfg.get_string("ckpt");
  if (path.empty()) throw ConfigError("checkpoint path required (key 'ckpt')");
  return path;
}

void save_mlp(Checkpoint& ck, const std::string& prefix, const Mlp& m) {
  std::vector<double> dims;
  for (std::size_t d : m.layer_dims) dims.push_back(static_cast<double>(d));
  ck.put(prefix + ".dims", Tensor::vec(dims));
  ck.put(prefix + ".act", Tensor::scalar(static_cast<double>(static_cast<int>(m.hidden_act))));
  for (std::size_t k = 0; k < m.num_layers(); ++k) {
    ck.put(prefix + ".w" + std::to_string(k), m.weights[k]);
    ck.put(prefix + ".b" + std::to_string(k), m.biases[k]);
  }
}

Mlp load_mlp(const Checkpoint& ck, const std::string& prefix) {
  const Tensor& dims = ck.get(prefix + ".dims");
  Mlp m;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    m.layer_dims.push_back(static_cast<std::size_t>(dims[i]));
  }
  const int act = static_cast<int>(ck.get(prefix + ".act")[0]);
  if (act < 0 || act > 2) throw IoError("checkpoint: bad activation code");
  m.hidden_act = static_cast<Activation>(act);
  for (std::size_t k = 0; k + 1 < m.layer_dims.size(); ++k) {
    Tensor w = ck.get(prefix + ".w" + std::to_string(k));
    Tensor b = ck.get(prefix + ".b" + std::to_string(k));
    if (w.rank() != 2 || w.rows() != m.layer_dims[k + 1] || w.cols() != m.layer_dims[k]) {
      throw IoError("checkpoint: inconsistent layer shape in " + prefix);
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  return m;
}

std::vector<Tensor> regen_data(const RunConfig& cfg) {
  Toy2dSpec spec;
  spec.kind = dataset_from_string(cfg.get_string("dataset"));
  spec.ambient_n = static_cast<std::size_t>(cfg.get_int("ambient_n"));
  spec.noise_scale = cfg.get_real("noise_scale");
  spec.count = static_cast<int>(cfg.get_int("train_size"));
  spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  return gen_toy2d_dataset(spec);
}

}  // namespace

Toy2DConfig toy2d_from_config(const RunConfig& cfg) {
  Toy2DConfig c;
  c.dataset = dataset_from_string(cfg.get_string("dataset"));
  c.ambient_n = static_cast<std::size_t>(cfg.get_int("ambient_n"));
  c.noise_scale = cfg.get_real("noise_scale");
  c.train_size = static_cast<int>(cfg.get_int("train_size"));
  c.T = static_cast<int>(cfg.get_int("T"));
  c.beta_start = cfg.get_real("beta_start");
  c.beta_end = cfg.get_real("beta_end");
  c.ddim_steps = static_cast<int>(cfg.get_int("ddim_steps"));
  c.bottleneck_m = static_cast<std::size_t>(cfg.get_int("bottleneck_m"));
  c.hidden = static_cast<std::size_t>(cfg.get_int("hidden"));
  c.d_time = static_cast<std::size_t>(cfg.get_int("d_time"));
  c.regularizer = regularizer_from_string(cfg.get_string("regularizer"));
  c.iso.lambda_iso = cfg.get_real("lambda_iso");
  c.iso.gamma = cfg.get_real("gamma");
  c.iso.num_probes = static_cast<int>(cfg.get_int("num_probes"));
  c.iso.metric = metric_from_string(cfg.get_string("iso_metric"));
  c.iso.probes = probes_from_string(cfg.get_string("probe_dist"));
  c.lambda_pl = cfg.get_real("lambda_pl");
  c.pl_decay = cfg.get_real("pl_decay");
  c.epochs = static_cast<int>(cfg.get_int("epochs"));
  c.batch_size = static_cast<int>(cfg.get_int("batch_size"));
  c.lr = cfg.get_real("lr");
  c.ema_decay = cfg.get_real("ema_decay");
  c.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  return c;
}

MetricsOptions metrics_options_from_config(const RunConfig& cfg) {
  MetricsOptions opt;
  opt.ppl_pairs = static_cast<int>(cfg.get_int("ppl_pairs"));
  opt.ppl_epsilon = cfg.get_real("ppl_epsilon");
  opt.mrtl_pairs = static_cast<int>(cfg.get_int("mrtl_pairs"));
  opt.rtl_segments = static_cast<int>(cfg.get_int("rtl_segments"));
  opt.jac_samples = static_cast<int>(cfg.get_int("jac_samples"));
  opt.ddim_steps = static_cast<int>(cfg.get_int("ddim_steps"));
  opt.coords = metric_from_string(cfg.get_string("metric_coords"));
  opt.seed = static_cast<std::uint64_t>(cfg.get_int("eval_seed"));
  return opt;
}

void save_model(const std::string& path, const ScoreNet& net,
                const NoiseSchedule& sched, const std::optional<ScoreNet>& ema) {
  Checkpoint ck;
  ck.put("model.meta", Tensor::vec({static_cast<double>(net.n),
                                    static_cast<double>(net.m),
                                    static_cast<double>(net.d_time)}));
  ck.put("sched.meta", Tensor::vec({static_cast<double>(sched.T),
                                    sched.beta.front(), sched.beta.back()}));
  save_mlp(ck, "enc", net.encoder);
  save_mlp(ck, "dec", net.decoder);
  if (ema) {
    save_mlp(ck, "ema.enc", ema->encoder);
    save_mlp(ck, "ema.dec", ema->decoder);
  }
  ck.save(path);
}

LoadedModel load_model(const std::string& path) {
  Checkpoint ck = Checkpoint::load(path);
  const Tensor& meta = ck.get("model.meta");
  const Tensor& smeta = ck.get("sched.meta");
  LoadedModel lm;
  lm.net.n = static_cast<std::size_t>(meta[0]);
  lm.net.m = static_cast<std::size_t>(meta[1]);
  lm.net.d_time = static_cast<std::size_t>(meta[2]);
  lm.net.encoder = load_mlp(ck, "enc");
  lm.net.decoder = load_mlp(ck, "dec");
  lm.sched = schedule_linear(static_cast<int>(smeta[0]), smeta[1], smeta[2]);
  lm.eval_net = lm.net;
  if (ck.has("ema.enc.dims")) {
    lm.has_ema = true;
    lm.eval_net.encoder = load_mlp(ck, "ema.enc");
    lm.eval_net.decoder = load_mlp(ck, "ema.dec");
  }
  return lm;
}

int cmd_train(const RunConfig& cfg) {
  return run_guarded("train", [&] {
    const Toy2DConfig tc = toy2d_from_config(cfg);
    const fs::path dir = ensure_out_dir(cfg);
    TrainDiffusionResult tr = train_toy_diffusion(tc);
    save_model((dir / "model.ckpt").string(), tr.net, tr.sched, tr.ema_net);

    CsvWriter log({"epoch", "dsm_loss", "iso_loss", "wall_seconds"});
    for (const EpochLog& e : tr.log) {
      log.add_row({std::to_string(e.epoch), fmt_real(e.dsm), fmt_real(e.iso),
                   fmt_real(e.wall_seconds)});
    }
    log.write((dir / "train_log.csv").string());

    // Held-out pool for inversion studies, drawn from an independent stream.
    Toy2dSpec hspec{tc.dataset, tc.ambient_n, tc.noise_scale,
                    static_cast<int>(cfg.get_int("heldout_count")),
                    RngStream::derive(tc.seed, "heldout")};
    const std::vector<Tensor> held = gen_toy2d_dataset(hspec);
    std::vector<std::string> header{"sample_id"};
    for (std::size_t j = 0; j < tc.ambient_n; ++j) header.push_back("x" + std::to_string(j));
    CsvWriter hw(std::move(header));
    for (std::size_t i = 0; i < held.size(); ++i) {
      std::vector<std::string> row{std::to_string(i)};
      for (std::size_t j = 0; j < held[i].size(); ++j) row.push_back(fmt_real(held[i][j]));
      hw.add_row(std::move(row));
    }
    hw.write((dir / "heldout.csv").string());
  });
}

int cmd_metrics(const RunConfig& cfg) {
  return run_guarded("metrics", [&] {
    const fs::path dir = ensure_out_dir(cfg);
    LoadedModel lm = load_model(require_ckpt(cfg));
    const std::vector<Tensor> data = regen_data(cfg);
    const MetricsOptions opt = metrics_options_from_config(cfg);
    const MetricsReport rep = compute_metrics(lm.eval_net, lm.sched, data, opt);

    const std::string seed_s = std::to_string(opt.seed);
    CsvWriter mw({"metric", "value", "num_samples", "seed"});
    mw.add_row({"ppl", fmt_real(rep.ppl), std::to_string(rep.ppl_pairs), seed_s});
    mw.add_row({"mrtl", fmt_real(rep.mrtl), std::to_string(rep.mrtl_pairs), seed_s});
    mw.add_row({"mcn", fmt_real(rep.mcn), std::to_string(rep.jac_samples), seed_s});
    mw.add_row({"vor", fmt_real(rep.vor), std::to_string(rep.jac_samples), seed_s});
    mw.write((dir / "metrics.csv").string());

    CsvWriter rw({"t", "rtl"});
    for (const auto& [t, v] : rep.rtl_per_t) {
      rw.add_row({std::to_string(t), fmt_real(v)});
    }
    rw.write((dir / "rtl.csv").string());
  });
}

int cmd_interpolate(const RunConfig& cfg) {
  return run_guarded("interpolate", [&] {
    const fs::path dir = ensure_out_dir(cfg);
    LoadedModel lm = load_model(require_ckpt(cfg));
    const std::string mode = cfg.get_string("interp_mode");
    if (mode != "slerp" && mode != "lerp") {
      throw ConfigError("interp_mode must be slerp or lerp");
    }
    const int pairs = static_cast<int>(cfg.get_int("interp_pairs"));
    const int steps = static_cast<int>(cfg.get_int("interp_steps"));
    const int ddim_steps = static_cast<int>(cfg.get_int("ddim_steps"));
    if (pairs < 1 || steps < 1) throw ConfigError("interp_pairs/interp_steps must be >= 1");
    RngStream rng = RngStream::named(
        static_cast<std::uint64_t>(cfg.get_int("eval_seed")), "interp");

    std::vector<std::string> header{"pair_id", "s"};
    for (std::size_t j = 0; j < lm.net.n; ++j) header.push_back("x" + std::to_string(j));
    header.push_back("adj_dist2");
    CsvWriter w(std::move(header));
    for (int p = 0; p < pairs; ++p) {
      Tensor xa({lm.net.n}), xb({lm.net.n});
      for (std::size_t i = 0; i < lm.net.n; ++i) xa[i] = rng.normal();
      for (std::size_t i = 0; i < lm.net.n; ++i) xb[i] = rng.normal();
      Tensor prev;
      for (int j = 0; j <= steps; ++j) {
        const double s = static_cast<double>(j) / static_cast<double>(steps);
        const Tensor latent = (mode == "slerp") ? slerp(xa, xb, s) : lerp(xa, xb, s);
        const Tensor y = ddim_sample(lm.eval_net, latent, ddim_steps, lm.sched).states.back();
        const double d2 = (j == 0) ? 0.0 : sum_sq(y - prev);
        std::vector<std::string> row{std::to_string(p), fmt_real(s)};
        for (std::size_t i = 0; i < y.size(); ++i) row.push_back(fmt_real(y[i]));
        row.push_back(fmt_real(d2));
        w.add_row(std::move(row));
        prev = y;
      }
    }
    w.write((dir / "interp.csv").string());
  });
}

int cmd_invert(const RunConfig& cfg) {
  return run_guarded("invert", [&] {
    const fs::path dir = ensure_out_dir(cfg);
    LoadedModel lm = load_model(require_ckpt(cfg));
    const std::string samples_path = cfg.get_string("samples_file");
    if (samples_path.empty()) throw ConfigError("samples_file required");
    const int ddim_steps = static_cast<int>(cfg.get_int("ddim_steps"));

    std::vector<std::vector<double>> rows = read_numeric_csv(samples_path);
    if (rows.empty()) throw IoError("invert: no samples in " + samples_path);

    std::vector<std::string> header{"sample_id", "mse"};
    for (std::size_t j = 0; j < lm.net.n; ++j) header.push_back("x" + std::to_string(j));
    CsvWriter w(std::move(header));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::vector<double> coords = rows[i];
      // Tolerate a leading sample_id column (heldout.csv layout).
      if (coords.size() == lm.net.n + 1) coords.erase(coords.begin());
      if (coords.size() != lm.net.n) {
        throw IoError("invert: row " + std::to_string(i) + " has wrong width");
      }
      Tensor x0 = Tensor::vec(std::move(coords));
      const Tensor x_T = ddim_invert(lm.eval_net, x0, ddim_steps, lm.sched).states.back();
      const Tensor rec = ddim_sample(lm.eval_net, x_T, ddim_steps, lm.sched).states.back();
      const double mse = sum_sq(rec - x0) / static_cast<double>(lm.net.n);
      std::vector<std::string> row{std::to_string(i), fmt_real(mse)};
      for (std::size_t j = 0; j < rec.size(); ++j) row.push_back(fmt_real(rec[j]));
      w.add_row(std::move(row));
    }
    w.write((dir / "inversion.csv").string());
  });
}

namespace {

void run_s2_mode(const RunConfig& cfg, S2LossMode mode, const fs::path& dir,
                 CsvWriter& report) {
  ToyS2Config sc;
  sc.num_points = static_cast<int>(cfg.get_int("s2_points"));
  sc.hidden = static_cast<std::size_t>(cfg.get_int("s2_hidden"));
  sc.loss_mode = mode;
  sc.lambda_iso = cfg.get_real("s2_lambda");
  sc.epochs = static_cast<int>(cfg.get_int("s2_epochs"));
  sc.batch_size = static_cast<int>(cfg.get_int("s2_batch"));
  sc.lr = cfg.get_real("s2_lr");
  sc.num_probes = static_cast<int>(cfg.get_int("s2_probes"));
  sc.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  const ToyS2Result res = train_toy_autoencoder(sc);

  CsvWriter cw({"line_id", "point_idx", "u", "v"});
  for (const Polyline& pl : res.contours) {
    for (std::size_t p = 0; p < pl.points.size(); ++p) {
      cw.add_row({std::to_string(pl.line_id), std::to_string(p),
                  fmt_real(pl.points[p][0]), fmt_real(pl.points[p][1])});
    }
  }
  cw.write((dir / ("contours_" + std::string(s2_mode_name(mode)) + ".csv")).string());
  report.add_row({s2_mode_name(mode), fmt_real(res.recon_mse), fmt_real(res.mcn),
                  fmt_real(res.vor)});
}

}  // namespace

int cmd_toy_s2(const RunConfig& cfg) {
  return run_guarded("toy-s2", [&] {
    const fs::path dir = ensure_out_dir(cfg);
    const std::string mode = cfg.get_string("s2_mode");
    CsvWriter report({"mode", "recon_mse", "mcn", "vor"});
    if (mode == "all") {
      run_s2_mode(cfg, S2LossMode::recon, dir, report);
      run_s2_mode(cfg, S2LossMode::iso_euclid, dir, report);
      run_s2_mode(cfg, S2LossMode::iso_sphere, dir, report);
    } else {
      run_s2_mode(cfg, s2_mode_from_string(mode), dir, report);
    }
    report.write((dir / "s2_report.csv").string());
  });
}

int cmd_trace_study(const RunConfig& cfg) {
  return run_guarded("trace-study", [&] {
    const fs::path dir = ensure_out_dir(cfg);
    const std::vector<int> dims = parse_int_list(cfg.get_string("ts_dims"), "ts_dims");
    const std::vector<int> probes =
        parse_int_list(cfg.get_string("ts_probes"), "ts_probes");
    const int trials = static_cast<int>(cfg.get_int("ts_trials"));
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
    CsvWriter w({"n", "N", "mean_abs_err", "std_err"});
    for (int n : dims) {
      for (const TraceStudyRow& row : trace_study(n, probes, trials, seed)) {
        w.add_row({std::to_string(row.n), std::to_string(row.num_probes),
                   fmt_real(row.mean_abs_err), fmt_real(row.std_err)});
      }
    }
    w.write((dir / "trace_study.csv").string());
  });
}

int cmd_sweep(const RunConfig& cfg) {
  return run_guarded("sweep", [&] {
    const fs::path dir = ensure_out_dir(cfg);
    const Toy2DConfig base = toy2d_from_config(cfg);
    const MetricsOptions opt = metrics_options_from_config(cfg);
    const std::vector<double> lambdas =
        parse_real_list(cfg.get_string("sweep_lambdas"), "sweep_lambdas");
    const std::vector<double> gammas =
        parse_real_list(cfg.get_string("sweep_gammas"), "sweep_gammas");
    std::vector<IsoMetric> metrics_list;
    for (const std::string& s : parse_string_list(cfg.get_string("sweep_metrics"))) {
      metrics_list.push_back(metric_from_string(s));
    }
    const std::vector<SweepRow> rows = run_sweep(base, lambdas, gammas, metrics_list, opt);

    CsvWriter w({"lambda_iso", "gamma", "metric", "dsm_final", "ppl", "mrtl", "mcn",
                 "vor", "seed"});
    for (const SweepRow& row : rows) {
      const double nan = std::nan("");
      w.add_row({fmt_real(row.cell.lambda_iso), fmt_real(row.cell.gamma),
                 iso_metric_name(row.cell.metric),
                 fmt_real(row.failed ? nan : row.dsm_final),
                 fmt_real(row.failed ? nan : row.metrics.ppl),
                 fmt_real(row.failed ? nan : row.metrics.mrtl),
                 fmt_real(row.failed ? nan : row.metrics.mcn),
                 fmt_real(row.failed ? nan : row.metrics.vor),
                 std::to_string(row.seed)});
    }
    w.write((dir / "sweep.csv").string());
  });
}

}  // namespace isodiff
