#pragma once

#include <functional>
#include <optional>
#include <string>

#include "config.hpp"
#include "experiments.hpp"

namespace isodiff {

// Exit-code contract shared by the C API and the CLI:
//   0 success, 2 config error, 3 divergence/degenerate numerics,
//   4 I/O error or corruption.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitIo = 4;

int cmd_train(const RunConfig& cfg);
int cmd_metrics(const RunConfig& cfg);
int cmd_interpolate(const RunConfig& cfg);
int cmd_invert(const RunConfig& cfg);
int cmd_toy_s2(const RunConfig& cfg);
int cmd_trace_study(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);

// Model checkpoint bridge. save_model stores the raw network, the schedule,
// and (when present) the parameter-EMA shadow; load_model prefers the EMA
// weights for evaluation.
void save_model(const std::string& path, const ScoreNet& net,
                const NoiseSchedule& sched, const std::optional<ScoreNet>& ema);

struct LoadedModel {
  ScoreNet net;       // raw trained parameters
  ScoreNet eval_net;  // EMA shadow when stored, otherwise same as net
  NoiseSchedule sched;
  bool has_ema = false;
};
LoadedModel load_model(const std::string& path);

// Translates exceptions to the exit-code contract, printing to stderr.
int run_guarded(const std::string& what, const std::function<void()>& body);

Toy2DConfig toy2d_from_config(const RunConfig& cfg);
MetricsOptions metrics_options_from_config(const RunConfig& cfg);

}  // namespace isodiff
