#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "diffusion.hpp"
#include "regularizers.hpp"
#include "rng.hpp"

namespace isodiff {

struct MetricsReport {
  double ppl = 0.0;
  double mrtl = 0.0;
  double mcn = 0.0;
  double vor = 0.0;
  std::vector<std::pair<int, double>> rtl_per_t;
  int ppl_pairs = 0;
  int mrtl_pairs = 0;
  int jac_samples = 0;
  int jac_excluded = 0;
};

// --- PPL -------------------------------------------------------------------

using Generator = std::function<Tensor(const Tensor&)>;
using LatentSampler = std::function<Tensor(RngStream&)>;

// PPL = E[(1/eps^2) |g(slerp(x,x',s)) - g(slerp(x,x',s+eps))|^2] with
// s ~ U[0, 1-eps]. Distance is squared Euclidean in sample space.
double ppl_core(const Generator& gen, const LatentSampler& sample_latent,
                int num_pairs, double epsilon, RngStream& rng);

double ppl(const ScoreNet& net, const NoiseSchedule& sched, int num_pairs,
           double epsilon, int num_steps, std::uint64_t seed);

// --- RTL / mRTL --------------------------------------------------------------

// Ratio of polyline length to endpoint chord for features h_0..h_K collected
// at one timestep. Errors when the chord degenerates.
double rtl_from_features(const std::vector<Tensor>& h_path);

// RTL(t) for one latent pair: K-1 interior slerp latents, K+1 trajectories.
double rtl(const ScoreNet& net, const NoiseSchedule& sched, const Tensor& x_a,
           const Tensor& x_b, int t, int K, int num_steps);

struct MrtlResult {
  double mrtl = 0.0;
  std::vector<std::pair<int, double>> per_t;
};

MrtlResult mrtl(const ScoreNet& net, const NoiseSchedule& sched, int num_pairs,
                int K, int num_steps, std::uint64_t seed);

// --- MCN / VoR ----------------------------------------------------------------

// mean of sigma_max/sigma_min over Jacobians; samples with sigma_min below
// 1e-12 are excluded and counted.
double mcn_from_jacobians(const std::vector<Tensor>& jacobians, int* excluded = nullptr);
// sum over i of Var over samples of the i-th sorted singular value.
double vor_from_jacobians(const std::vector<Tensor>& jacobians, int* excluded = nullptr);

// Measured encoder Jacobian at x_t. Chart coordinates apply the sqrt(G^-1)
// scaling so the matrix is the square root factor of the loss's R; ambient
// coordinates are the ablation option.
Tensor encoder_jacobian(const ScoreNet& net, const NoiseSchedule& sched,
                        const Tensor& x_t, int t, IsoMetric coords);

double mcn(const ScoreNet& net, const NoiseSchedule& sched,
           const std::vector<Tensor>& data, int num_samples, std::uint64_t seed,
           IsoMetric coords, int* excluded = nullptr);
double vor(const ScoreNet& net, const NoiseSchedule& sched,
           const std::vector<Tensor>& data, int num_samples, std::uint64_t seed,
           IsoMetric coords, int* excluded = nullptr);

// --- Hutchinson estimator error study ----------------------------------------

struct TraceStudyRow {
  int n = 0;
  int num_probes = 0;
  double mean_abs_err = 0.0;
  double std_err = 0.0;
};

// For one random A (N(0,1) entries), estimate Tr(A) with N probes and
// report |estimate - Tr(A)| mean and std over trials, per probe count.
std::vector<TraceStudyRow> trace_study(int n, const std::vector<int>& probe_counts,
                                       int trials, std::uint64_t seed);

// --- full report ---------------------------------------------------------------

struct MetricsOptions {
  int ppl_pairs = 64;
  double ppl_epsilon = 1e-2;
  int mrtl_pairs = 8;
  int rtl_segments = 16;  // K
  int jac_samples = 128;
  int ddim_steps = 20;
  IsoMetric coords = IsoMetric::sphere;
  std::uint64_t seed = 0;
};

MetricsReport compute_metrics(const ScoreNet& net, const NoiseSchedule& sched,
                              const std::vector<Tensor>& data,
                              const MetricsOptions& opt);

}  // namespace isodiff
