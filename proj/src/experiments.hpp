#pragma once

#include <array>
#include <optional>
#include <string>

#include "datasets.hpp"
#include "metrics.hpp"
#include "optim.hpp"
#include "regularizers.hpp"

namespace isodiff {

// --- toy S^2 autoencoder (flattening study) --------------------------------

enum class S2LossMode { recon, iso_euclid, iso_sphere };

struct ToyS2Config {
  int num_points = 2048;
  std::size_t hidden = 48;
  S2LossMode loss_mode = S2LossMode::recon;
  double lambda_iso = 0.2;
  int epochs = 300;
  int batch_size = 64;
  double lr = 2e-3;
  int num_probes = 2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Polyline {
  int line_id = 0;
  std::vector<std::array<double, 2>> points;
};

struct ToyS2Result {
  Mlp encoder;  // 3 -> hidden -> 2
  Mlp decoder;  // 2 -> hidden -> 3
  double recon_mse = 0.0;
  double mcn = 0.0;
  double vor = 0.0;
  std::vector<Polyline> contours;  // 12 latitude + 12 longitude lines, 128 pts
};

ToyS2Result train_toy_autoencoder(const ToyS2Config& cfg);

const char* s2_mode_name(S2LossMode mode);

// --- toy diffusion -----------------------------------------------------------

enum class RegKind { none, iso, path_length };

struct Toy2DConfig {
  Toy2dKind dataset = Toy2dKind::two_gaussians;
  std::size_t ambient_n = 64;
  double noise_scale = 0.01;
  int train_size = 2048;
  int T = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  int ddim_steps = 20;
  std::size_t bottleneck_m = 16;
  std::size_t hidden = 128;
  std::size_t d_time = 8;
  RegKind regularizer = RegKind::iso;
  IsoConfig iso;
  double lambda_pl = 1e-4;
  double pl_decay = 0.99;
  int epochs = 40;
  int batch_size = 32;
  double lr = 1e-4;
  double ema_decay = 0.0;  // 0 disables the parameter EMA
  std::uint64_t seed = 1;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double dsm = 0.0;
  double iso = 0.0;
  double wall_seconds = 0.0;
};

struct TrainDiffusionResult {
  ScoreNet net;
  NoiseSchedule sched;
  std::optional<ScoreNet> ema_net;
  std::vector<EpochLog> log;
  double initial_dsm = 0.0;
  double final_dsm = 0.0;
};

// Trains on the dataset declared in the config (regenerated from the seed).
// Throws DivergenceError when the guard trips.
TrainDiffusionResult train_toy_diffusion(const Toy2DConfig& cfg);

// --- sweep ---------------------------------------------------------------------

struct SweepCell {
  double lambda_iso = 0.0;
  double gamma = 0.5;
  IsoMetric metric = IsoMetric::sphere;
};

struct SweepRow {
  SweepCell cell;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double dsm_final = 0.0;
  MetricsReport metrics;
};

std::vector<SweepRow> run_sweep(const Toy2DConfig& base,
                                const std::vector<double>& lambdas,
                                const std::vector<double>& gammas,
                                const std::vector<IsoMetric>& metrics_list,
                                const MetricsOptions& eval_opt);

const char* iso_metric_name(IsoMetric m);

}  // namespace isodiff
