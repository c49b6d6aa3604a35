#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace isodiff {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::vector<RunConfig::KeySpec> build_schema() {
  using T = RunConfig::Type;
  return {
      // general
      {"seed", T::integer, "1234", "master seed; all streams derive from it"},
      {"out_dir", T::string, "out", "output directory for checkpoints and CSVs"},
      // dataset
      {"dataset", T::string, "two_gaussians",
       "two_gaussians | ring | two_moons_embedded"},
      {"ambient_n", T::integer, "64", "ambient dimension n (>= 8)"},
      {"noise_scale", T::real, "0.01", "isotropic noise added before standardization"},
      {"train_size", T::integer, "2048", "number of training samples"},
      {"heldout_count", T::integer, "256", "held-out samples written by train"},
      // model
      {"bottleneck_m", T::integer, "16", "semantic feature dimension m (< n)"},
      {"hidden", T::integer, "128", "hidden width of encoder/decoder"},
      {"d_time", T::integer, "8", "time-feature dimension (even, >= 2)"},
      // diffusion
      {"T", T::integer, "1000", "number of diffusion timesteps"},
      {"beta_start", T::real, "1e-4", "linear schedule start"},
      {"beta_end", T::real, "0.02", "linear schedule end"},
      {"ddim_steps", T::integer, "20", "DDIM steps (must divide T)"},
      // training
      {"epochs", T::integer, "40", "training epochs"},
      {"batch_size", T::integer, "32", "batch size"},
      {"lr", T::real, "1e-4", "Adam learning rate"},
      {"ema_decay", T::real, "0", "parameter EMA decay; 0 disables"},
      // regularizer
      {"regularizer", T::string, "iso", "none | iso | path_length"},
      {"lambda_iso", T::real, "1e-4", "isometry loss weight"},
      {"gamma", T::real, "0.5", "skip ratio; loss applies for t > gamma*T"},
      {"num_probes", T::integer, "1", "Hutchinson probes per sample"},
      {"probe_dist", T::string, "gaussian", "gaussian | rademacher"},
      {"iso_metric", T::string, "sphere", "euclidean | sphere"},
      {"lambda_pl", T::real, "1e-4", "path length regularizer weight"},
      {"pl_decay", T::real, "0.99", "path length EMA decay"},
      // metrics
      {"eval_seed", T::integer, "99", "seed for metric evaluation streams"},
      {"ppl_pairs", T::integer, "64", "latent pairs for PPL"},
      {"ppl_epsilon", T::real, "1e-2", "PPL finite-difference step"},
      {"mrtl_pairs", T::integer, "8", "latent pairs for mRTL"},
      {"rtl_segments", T::integer, "16", "slerp path segments K for RTL"},
      {"jac_samples", T::integer, "128", "samples for MCN/VoR"},
      {"metric_coords", T::string, "sphere",
       "Jacobian coordinates for MCN/VoR: sphere | euclidean"},
      // files
      {"ckpt", T::string, "", "checkpoint path (metrics/interpolate/invert)"},
      {"samples_file", T::string, "", "CSV of sample coordinates for invert"},
      // interpolate
      {"interp_mode", T::string, "slerp", "slerp | lerp"},
      {"interp_pairs", T::integer, "4", "latent pairs to interpolate"},
      {"interp_steps", T::integer, "16", "interpolation grid steps"},
      // toy s2
      {"s2_mode", T::string, "all", "recon | iso_euclid | iso_sphere | all"},
      {"s2_points", T::integer, "2048", "points on the sphere"},
      {"s2_hidden", T::integer, "48", "autoencoder hidden width"},
      {"s2_epochs", T::integer, "300", "autoencoder epochs"},
      {"s2_batch", T::integer, "64", "autoencoder batch size"},
      {"s2_lr", T::real, "2e-3", "autoencoder learning rate"},
      {"s2_lambda", T::real, "0.2", "isometry weight for the S2 study"},
      {"s2_probes", T::integer, "2", "probes per sample for the S2 study"},
      // trace study
      {"ts_dims", T::string, "256", "comma list of matrix dims"},
      {"ts_probes", T::string, "1,4,16,64,256", "comma list of probe counts"},
      {"ts_trials", T::integer, "200", "trials per probe count"},
      // sweep
      {"sweep_lambdas", T::string, "0,1e-4,1e-3", "comma list of lambda_iso"},
      {"sweep_gammas", T::string, "0.5", "comma list of gamma"},
      {"sweep_metrics", T::string, "sphere", "comma list of euclidean|sphere"},
  };
}

const std::vector<RunConfig::KeySpec>& schema_ref() {
  static const std::vector<RunConfig::KeySpec> s = build_schema();
  return s;
}

}  // namespace

RunConfig::RunConfig() {
  for (const KeySpec& k : schema_ref()) values_[k.name] = k.default_value;
}

const std::vector<RunConfig::KeySpec>& RunConfig::schema() { return schema_ref(); }

bool RunConfig::is_known(const std::string& key) const {
  return values_.find(key) != values_.end();
}

const RunConfig::KeySpec& RunConfig::spec_for(const std::string& key) const {
  for (const KeySpec& k : schema_ref()) {
    if (k.name == key) return k;
  }
  throw ConfigError("unknown config key: " + key);
}

void RunConfig::check_value(const KeySpec& spec, const std::string& value) const {
  const char* begin = value.c_str();
  char* end = nullptr;
  switch (spec.type) {
    case Type::integer: {
      (void)std::strtoll(begin, &end, 10);
      if (end == begin || *end != '\0') {
        throw ConfigError("config key '" + spec.name + "' expects an integer, got '" +
                          value + "'");
      }
      break;
    }
    case Type::real: {
      (void)std::strtod(begin, &end);
      if (end == begin || *end != '\0') {
        throw ConfigError("config key '" + spec.name + "' expects a real, got '" +
                          value + "'");
      }
      break;
    }
    case Type::string:
      break;
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec& spec = spec_for(key);
  check_value(spec, value);
  values_[key] = value;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  const KeySpec& spec = spec_for(key);
  if (spec.type != Type::integer) throw ConfigError("config key is not integer: " + key);
  return std::strtoll(values_.at(key).c_str(), nullptr, 10);
}

double RunConfig::get_real(const std::string& key) const {
  const KeySpec& spec = spec_for(key);
  if (spec.type == Type::string) throw ConfigError("config key is not numeric: " + key);
  return std::strtod(values_.at(key).c_str(), nullptr);
}

const std::string& RunConfig::get_string(const std::string& key) const {
  spec_for(key);
  return values_.at(key);
}

std::vector<std::string> parse_string_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_real_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  for (const std::string& item : parse_string_list(s)) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0') {
      throw ConfigError("config key '" + key + "': bad real '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& key) {
  std::vector<int> out;
  for (double v : parse_real_list(s, key)) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace isodiff
