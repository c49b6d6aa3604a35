// Command-line front end. Links only the public C API.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isodiff.h"

namespace {

struct ConfigDeleter {
  void operator()(isodiff_config* c) const { isodiff_config_free(c); }
};
using ConfigPtr = std::unique_ptr<isodiff_config, ConfigDeleter>;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
  auto* opt = cmd->add_option("-c,--config", args.config_path,
                              "plain-text key=value config file");
  if (config_required) opt->required();
  cmd->add_option("--set", args.sets, "override: key=value (repeatable)");
  cmd->add_option("-o,--out", args.out_dir, "output directory (overrides out_dir)");
}

// Builds the handle from defaults + file + overrides. Returns nullptr after
// printing a diagnostic; the caller exits with the config error code.
ConfigPtr build_config(const CommonArgs& args,
                       const std::vector<std::pair<std::string, std::string>>& extra) {
  ConfigPtr cfg(isodiff_config_new());
  if (!cfg) {
    std::fprintf(stderr, "isodiff: out of memory\n");
    return nullptr;
  }
  if (!args.config_path.empty()) {
    if (isodiff_config_load(cfg.get(), args.config_path.c_str()) != ISODIFF_OK) {
      std::fprintf(stderr, "isodiff: %s\n", isodiff_last_error());
      return nullptr;
    }
  }
  for (const std::string& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "isodiff: --set expects key=value, got '%s'\n", kv.c_str());
      return nullptr;
    }
    if (isodiff_config_set(cfg.get(), kv.substr(0, eq).c_str(),
                           kv.substr(eq + 1).c_str()) != ISODIFF_OK) {
      std::fprintf(stderr, "isodiff: %s\n", isodiff_last_error());
      return nullptr;
    }
  }
  for (const auto& [key, value] : extra) {
    if (value.empty()) continue;
    if (isodiff_config_set(cfg.get(), key.c_str(), value.c_str()) != ISODIFF_OK) {
      std::fprintf(stderr, "isodiff: %s\n", isodiff_last_error());
      return nullptr;
    }
  }
  if (!args.out_dir.empty()) {
    if (isodiff_config_set(cfg.get(), "out_dir", args.out_dir.c_str()) != ISODIFF_OK) {
      std::fprintf(stderr, "isodiff: %s\n", isodiff_last_error());
      return nullptr;
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isodiff — toy diffusion with isometric regularization"};
  app.require_subcommand(1);

  CommonArgs train_args, metrics_args, interp_args, invert_args, s2_args, ts_args,
      sweep_args;
  std::string ckpt, interp_mode, samples_file, s2_mode, steps;

  auto* train = app.add_subcommand("train", "train a toy diffusion model");
  add_common(train, train_args, /*config_required=*/true);

  auto* metrics = app.add_subcommand("metrics", "PPL/mRTL/MCN/VoR of a checkpoint");
  add_common(metrics, metrics_args, /*config_required=*/true);
  metrics->add_option("--checkpoint", ckpt, "model checkpoint path");

  auto* interp = app.add_subcommand("interpolate", "latent traversal samples");
  add_common(interp, interp_args, /*config_required=*/false);
  interp->add_option("--checkpoint", ckpt, "model checkpoint path");
  interp->add_option("--mode", interp_mode, "slerp | lerp");
  interp->add_option("--steps", steps, "interpolation steps");

  auto* invert = app.add_subcommand("invert", "DDIM inversion round trip");
  add_common(invert, invert_args, /*config_required=*/false);
  invert->add_option("--checkpoint", ckpt, "model checkpoint path");
  invert->add_option("--samples", samples_file, "CSV of sample coordinates");

  auto* s2 = app.add_subcommand("toy-s2", "S^2 autoencoder flattening study");
  add_common(s2, s2_args, /*config_required=*/false);
  s2->add_option("--mode", s2_mode, "recon | iso_euclid | iso_sphere | all");

  auto* ts = app.add_subcommand("trace-study", "Hutchinson estimator error study");
  add_common(ts, ts_args, /*config_required=*/false);

  auto* sweep = app.add_subcommand("sweep", "lambda/gamma/metric grid study");
  add_common(sweep, sweep_args, /*config_required=*/true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ISODIFF_ERR_CONFIG;
  }

  auto run = [](const CommonArgs& args,
                std::vector<std::pair<std::string, std::string>> extra,
                isodiff_status (*fn)(const isodiff_config*)) -> int {
    ConfigPtr cfg = build_config(args, extra);
    if (!cfg) return ISODIFF_ERR_CONFIG;
    const isodiff_status rc = fn(cfg.get());
    if (rc != ISODIFF_OK && isodiff_last_error()[0] != '\0') {
      std::fprintf(stderr, "isodiff: %s\n", isodiff_last_error());
    }
    return rc;
  };

  if (*train) return run(train_args, {}, isodiff_cmd_train);
  if (*metrics) return run(metrics_args, {{"ckpt", ckpt}}, isodiff_cmd_metrics);
  if (*interp) {
    return run(interp_args,
               {{"ckpt", ckpt}, {"interp_mode", interp_mode}, {"interp_steps", steps}},
               isodiff_cmd_interpolate);
  }
  if (*invert) {
    return run(invert_args, {{"ckpt", ckpt}, {"samples_file", samples_file}},
               isodiff_cmd_invert);
  }
  if (*s2) return run(s2_args, {{"s2_mode", s2_mode}}, isodiff_cmd_toy_s2);
  if (*ts) return run(ts_args, {}, isodiff_cmd_trace_study);
  if (*sweep) return run(sweep_args, {}, isodiff_cmd_sweep);
  return ISODIFF_ERR_CONFIG;
}
