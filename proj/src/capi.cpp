#include "isodiff.h"

#include <string>

#include "commands.hpp"
#include "config.hpp"

using isodiff::RunConfig;

struct isodiff_config {
  RunConfig cfg;
  std::string scratch;  // backing storage for isodiff_config_get
};

namespace {

thread_local std::string g_last_error;

isodiff_status guard(const char* what, const std::function<int()>& body) {
  g_last_error.clear();
  try {
    const int code = body();
    if (code != 0) g_last_error = std::string(what) + " failed";
    return static_cast<isodiff_status>(code);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ISODIFF_ERR_CONFIG;
  }
}

}  // namespace

extern "C" {

isodiff_config* isodiff_config_new(void) {
  try {
    return new isodiff_config();
  } catch (...) {
    return nullptr;
  }
}

void isodiff_config_free(isodiff_config* cfg) { delete cfg; }

isodiff_status isodiff_config_load(isodiff_config* cfg, const char* path) {
  if (!cfg || !path) return ISODIFF_ERR_INVALID;
  g_last_error.clear();
  try {
    cfg->cfg.load_file(path);
    return ISODIFF_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ISODIFF_ERR_CONFIG;
  }
}

isodiff_status isodiff_config_set(isodiff_config* cfg, const char* key,
                                  const char* value) {
  if (!cfg || !key || !value) return ISODIFF_ERR_INVALID;
  g_last_error.clear();
  try {
    cfg->cfg.set(key, value);
    return ISODIFF_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ISODIFF_ERR_CONFIG;
  }
}

const char* isodiff_config_get(isodiff_config* cfg, const char* key) {
  if (!cfg || !key) return nullptr;
  try {
    cfg->scratch = cfg->cfg.get_string(key);
    return cfg->scratch.c_str();
  } catch (...) {
    return nullptr;
  }
}

#define ISODIFF_DEFINE_CMD(name, fn)                                   \
  isodiff_status name(const isodiff_config* cfg) {                     \
    if (!cfg) return ISODIFF_ERR_INVALID;                              \
    return guard(#fn, [&] { return isodiff::fn(cfg->cfg); });          \
  }

ISODIFF_DEFINE_CMD(isodiff_cmd_train, cmd_train)
ISODIFF_DEFINE_CMD(isodiff_cmd_metrics, cmd_metrics)
ISODIFF_DEFINE_CMD(isodiff_cmd_interpolate, cmd_interpolate)
ISODIFF_DEFINE_CMD(isodiff_cmd_invert, cmd_invert)
ISODIFF_DEFINE_CMD(isodiff_cmd_toy_s2, cmd_toy_s2)
ISODIFF_DEFINE_CMD(isodiff_cmd_trace_study, cmd_trace_study)
ISODIFF_DEFINE_CMD(isodiff_cmd_sweep, cmd_sweep)

#undef ISODIFF_DEFINE_CMD

const char* isodiff_last_error(void) { return g_last_error.c_str(); }

const char* isodiff_version(void) { return "1.0.0"; }

}  // extern "C"
