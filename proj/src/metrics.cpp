#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svd.hpp"

namespace isodiff {

double ppl_core(const Generator& gen, const LatentSampler& sample_latent,
                int num_pairs, double epsilon, RngStream& rng) {
  if (!(epsilon > 0.0) || epsilon > 0.1) {
    throw ConfigError("ppl: epsilon must be in (0, 0.1]");
  }
  if (num_pairs < 1) throw ConfigError("ppl: num_pairs must be >= 1");
  double acc = 0.0;
  for (int i = 0; i < num_pairs; ++i) {
    const Tensor xa = sample_latent(rng);
    const Tensor xb = sample_latent(rng);
    const double s = rng.uniform(0.0, 1.0 - epsilon);
    const Tensor ya = gen(slerp(xa, xb, s));
    const Tensor yb = gen(slerp(xa, xb, s + epsilon));
    acc += sum_sq(ya - yb) / (epsilon * epsilon);
  }
  return acc / static_cast<double>(num_pairs);
}

double ppl(const ScoreNet& net, const NoiseSchedule& sched, int num_pairs,
           double epsilon, int num_steps, std::uint64_t seed) {
  RngStream rng = RngStream::named(seed, "metric.ppl");
  const std::size_t n = net.n;
  Generator gen = [&](const Tensor& x_T) {
    return ddim_sample(net, x_T, num_steps, sched).states.back();
  };
  LatentSampler sampler = [n](RngStream& r) {
    Tensor x({n});
    for (std::size_t i = 0; i < n; ++i) x[i] = r.normal();
    return x;
  };
  return ppl_core(gen, sampler, num_pairs, epsilon, rng);
}

double rtl_from_features(const std::vector<Tensor>& h_path) {
  if (h_path.size() < 2) throw ShapeError("rtl: need at least two feature points");
  double polyline = 0.0;
  for (std::size_t k = 0; k + 1 < h_path.size(); ++k) {
    polyline += norm2(h_path[k + 1] - h_path[k]);
  }
  const double chord = norm2(h_path.back() - h_path.front());
  if (chord < 1e-12) throw NumericError("rtl: degenerate pair (zero feature chord)");
  return polyline / chord;
}

namespace {

// Features along the K+1 slerp trajectories: result[step][k] = h of path k
// at visited timestep feature_times[step].
struct PathFeatureTable {
  std::vector<int> feature_times;
  std::vector<std::vector<Tensor>> at_time;
};

PathFeatureTable path_features(const ScoreNet& net, const NoiseSchedule& sched,
                               const Tensor& x_a, const Tensor& x_b, int K,
                               int num_steps) {
  if (K < 2) throw ConfigError("rtl: K must be >= 2");
  PathFeatureTable table;
  for (int k = 0; k <= K; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(K);
    Trajectory traj = ddim_sample(net, slerp(x_a, x_b, s), num_steps, sched);
    if (k == 0) {
      table.feature_times = traj.feature_times;
      table.at_time.resize(traj.features.size());
    }
    for (std::size_t j = 0; j < traj.features.size(); ++j) {
      table.at_time[j].push_back(std::move(traj.features[j]));
    }
  }
  return table;
}

}  // namespace

double rtl(const ScoreNet& net, const NoiseSchedule& sched, const Tensor& x_a,
           const Tensor& x_b, int t, int K, int num_steps) {
  PathFeatureTable table = path_features(net, sched, x_a, x_b, K, num_steps);
  for (std::size_t j = 0; j < table.feature_times.size(); ++j) {
    if (table.feature_times[j] == t) return rtl_from_features(table.at_time[j]);
  }
  throw ConfigError("rtl: timestep " + std::to_string(t) + " is not on the DDIM grid");
}

MrtlResult mrtl(const ScoreNet& net, const NoiseSchedule& sched, int num_pairs,
                int K, int num_steps, std::uint64_t seed) {
  if (num_pairs < 1) throw ConfigError("mrtl: num_pairs must be >= 1");
  RngStream rng = RngStream::named(seed, "metric.mrtl");
  MrtlResult res;
  std::vector<double> sums;
  std::vector<int> counts;
  for (int p = 0; p < num_pairs; ++p) {
    Tensor xa({net.n}), xb({net.n});
    for (std::size_t i = 0; i < net.n; ++i) xa[i] = rng.normal();
    for (std::size_t i = 0; i < net.n; ++i) xb[i] = rng.normal();
    PathFeatureTable table = path_features(net, sched, xa, xb, K, num_steps);
    if (sums.empty()) {
      sums.assign(table.feature_times.size(), 0.0);
      counts.assign(table.feature_times.size(), 0);
      res.per_t.clear();
      for (int t : table.feature_times) res.per_t.emplace_back(t, 0.0);
    }
    for (std::size_t j = 0; j < table.at_time.size(); ++j) {
      sums[j] += rtl_from_features(table.at_time[j]);
      counts[j] += 1;
    }
  }
  double total = 0.0;
  for (std::size_t j = 0; j < sums.size(); ++j) {
    const double mean = sums[j] / static_cast<double>(counts[j]);
    res.per_t[j].second = mean;
    total += mean;
  }
  res.mrtl = total / static_cast<double>(sums.size());
  return res;
}

namespace {

constexpr double kRankTol = 1e-12;

std::vector<std::vector<double>> collect_spectra(const std::vector<Tensor>& jacobians,
                                                 int* excluded) {
  if (jacobians.empty()) throw ShapeError("mcn/vor: no Jacobians");
  std::vector<std::vector<double>> spectra;
  int skipped = 0;
  for (const Tensor& j : jacobians) {
    std::vector<double> s = singular_values(j);
    if (s.back() < kRankTol) {
      ++skipped;
      continue;
    }
    spectra.push_back(std::move(s));
  }
  if (excluded) *excluded = skipped;
  if (spectra.empty()) throw NumericError("mcn/vor: every sample was rank-deficient");
  return spectra;
}

}  // namespace

double mcn_from_jacobians(const std::vector<Tensor>& jacobians, int* excluded) {
  const auto spectra = collect_spectra(jacobians, excluded);
  double acc = 0.0;
  for (const auto& s : spectra) acc += s.front() / s.back();
  return acc / static_cast<double>(spectra.size());
}

double vor_from_jacobians(const std::vector<Tensor>& jacobians, int* excluded) {
  const auto spectra = collect_spectra(jacobians, excluded);
  const std::size_t count = spectra.size(), dims = spectra.front().size();
  double total = 0.0;
  for (std::size_t i = 0; i < dims; ++i) {
    double mean = 0.0;
    for (const auto& s : spectra) mean += s[i];
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (const auto& s : spectra) var += (s[i] - mean) * (s[i] - mean);
    total += var / static_cast<double>(count);
  }
  return total;
}

Tensor encoder_jacobian(const ScoreNet& net, const NoiseSchedule& sched,
                        const Tensor& x_t, int t, IsoMetric coords) {
  const Tensor tf = time_features(t, sched.T, net.d_time);
  if (coords == IsoMetric::sphere) {
    const double r = radius_at(sched, t, static_cast<int>(net.n));
    SphereChart chart(net.n, r);
    const Tensor z = project(chart, x_t);
    ChartEncoderMap f(net.encoder, chart, tf);
    const double gi = 1.0 / std::sqrt(metric_scalar(chart, z));
    return dense_jacobian(f, z) * gi;
  }
  AmbientEncoderMap f(net.encoder, net.n, tf);
  return dense_jacobian(f, x_t);
}

namespace {

std::vector<Tensor> sample_jacobians(const ScoreNet& net, const NoiseSchedule& sched,
                                     const std::vector<Tensor>& data, int num_samples,
                                     std::uint64_t seed, IsoMetric coords,
                                     std::string_view label) {
  if (data.empty()) throw ShapeError("mcn/vor: empty data pool");
  RngStream rng = RngStream::named(seed, label);
  std::vector<Tensor> jacobians;
  jacobians.reserve(static_cast<std::size_t>(num_samples));
  for (int i = 0; i < num_samples; ++i) {
    const Tensor& x0 = data[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(data.size()) - 1))];
    const int t = static_cast<int>(rng.uniform_int(1, sched.T));
    Tensor eps(x0.shape());
    for (std::size_t j = 0; j < eps.size(); ++j) eps[j] = rng.normal();
    jacobians.push_back(encoder_jacobian(net, sched, perturb(x0, t, eps, sched), t, coords));
  }
  return jacobians;
}

}  // namespace

double mcn(const ScoreNet& net, const NoiseSchedule& sched,
           const std::vector<Tensor>& data, int num_samples, std::uint64_t seed,
           IsoMetric coords, int* excluded) {
  return mcn_from_jacobians(
      sample_jacobians(net, sched, data, num_samples, seed, coords, "metric.mcn"),
      excluded);
}

double vor(const ScoreNet& net, const NoiseSchedule& sched,
           const std::vector<Tensor>& data, int num_samples, std::uint64_t seed,
           IsoMetric coords, int* excluded) {
  return vor_from_jacobians(
      sample_jacobians(net, sched, data, num_samples, seed, coords, "metric.vor"),
      excluded);
}

std::vector<TraceStudyRow> trace_study(int n, const std::vector<int>& probe_counts,
                                       int trials, std::uint64_t seed) {
  if (n < 1 || n > 1024) throw ConfigError("trace_study: n must be in [1, 1024]");
  for (std::size_t i = 1; i < probe_counts.size(); ++i) {
    if (probe_counts[i] <= probe_counts[i - 1]) {
      throw ConfigError("trace_study: probe counts must be ascending");
    }
  }
  RngStream rng = RngStream::named(seed, "trace_study");
  Tensor a({static_cast<std::size_t>(n), static_cast<std::size_t>(n)});
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.normal();
  double trace = 0.0;
  for (int i = 0; i < n; ++i) trace += a.at(static_cast<std::size_t>(i), static_cast<std::size_t>(i));

  std::vector<TraceStudyRow> rows;
  for (int num_probes : probe_counts) {
    std::vector<double> errs;
    errs.reserve(static_cast<std::size_t>(trials));
    for (int trial = 0; trial < trials; ++trial) {
      double est = 0.0;
      for (int p = 0; p < num_probes; ++p) {
        Tensor v({static_cast<std::size_t>(n)});
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.normal();
        est += dot(v, matvec(a, v));
      }
      est /= static_cast<double>(num_probes);
      errs.push_back(std::abs(est - trace));
    }
    TraceStudyRow row;
    row.n = n;
    row.num_probes = num_probes;
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= static_cast<double>(errs.size());
    double var = 0.0;
    for (double e : errs) var += (e - mean) * (e - mean);
    row.mean_abs_err = mean;
    row.std_err = std::sqrt(var / static_cast<double>(errs.size()));
    rows.push_back(row);
  }
  return rows;
}

MetricsReport compute_metrics(const ScoreNet& net, const NoiseSchedule& sched,
                              const std::vector<Tensor>& data,
                              const MetricsOptions& opt) {
  MetricsReport rep;
  rep.ppl = ppl(net, sched, opt.ppl_pairs, opt.ppl_epsilon, opt.ddim_steps, opt.seed);
  MrtlResult mr = mrtl(net, sched, opt.mrtl_pairs, opt.rtl_segments, opt.ddim_steps, opt.seed);
  rep.mrtl = mr.mrtl;
  rep.rtl_per_t = std::move(mr.per_t);
  int excluded_m = 0, excluded_v = 0;
  rep.mcn = mcn(net, sched, data, opt.jac_samples, opt.seed, opt.coords, &excluded_m);
  rep.vor = vor(net, sched, data, opt.jac_samples, opt.seed, opt.coords, &excluded_v);
  rep.ppl_pairs = opt.ppl_pairs;
  rep.mrtl_pairs = opt.mrtl_pairs;
  rep.jac_samples = opt.jac_samples;
  rep.jac_excluded = excluded_m + excluded_v;
  return rep;
}

}  // namespace isodiff
