#include "datasets.hpp"

#include <cmath>

namespace isodiff {

std::vector<Tensor> gen_s2_dataset(std::uint64_t seed, int count) {
  if (count < 1) throw ConfigError("gen_s2_dataset: count must be >= 1");
  RngStream rng = RngStream::named(seed, "s2_data");
  const double cap_cos = std::cos(kS2PolarCap);
  std::vector<Tensor> pts;
  pts.reserve(static_cast<std::size_t>(count));
  while (pts.size() < static_cast<std::size_t>(count)) {
    Tensor x({3});
    x[0] = rng.normal();
    x[1] = rng.normal();
    x[2] = rng.normal();
    const double n = norm2(x);
    if (n < 1e-12) continue;
    for (int i = 0; i < 3; ++i) x[i] /= n;
    if (x[2] > cap_cos) continue;  // inside the excluded polar cap
    pts.push_back(std::move(x));
  }
  return pts;
}

Tensor embedding_matrix(std::uint64_t seed, std::size_t n) {
  RngStream rng = RngStream::named(seed, "embedding");
  Tensor q({n, 2});
  // Two Gaussian columns, Gram-Schmidt.
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = rng.normal();
  for (std::size_t i = 0; i < n; ++i) b[i] = rng.normal();
  double na = 0.0;
  for (double v : a) na += v * v;
  na = std::sqrt(na);
  for (double& v : a) v /= na;
  double ab = 0.0;
  for (std::size_t i = 0; i < n; ++i) ab += a[i] * b[i];
  for (std::size_t i = 0; i < n; ++i) b[i] -= ab * a[i];
  double nb = 0.0;
  for (double v : b) nb += v * v;
  nb = std::sqrt(nb);
  for (double& v : b) v /= nb;
  for (std::size_t i = 0; i < n; ++i) {
    q.at(i, 0) = a[i];
    q.at(i, 1) = b[i];
  }
  return q;
}

namespace {

void intrinsic_sample(Toy2dKind kind, RngStream& rng, double* u, double* v) {
  switch (kind) {
    case Toy2dKind::two_gaussians: {
      const double cx = (rng.next_u64() & 1u) ? 2.0 : -2.0;
      *u = cx + 0.5 * rng.normal();
      *v = 0.5 * rng.normal();
      break;
    }
    case Toy2dKind::ring: {
      const double phi = rng.uniform(0.0, 6.283185307179586);
      const double rad = 1.0 + 0.05 * rng.normal();
      *u = rad * std::cos(phi);
      *v = rad * std::sin(phi);
      break;
    }
    case Toy2dKind::two_moons_embedded: {
      const double t = rng.uniform(0.0, 3.141592653589793);
      if (rng.next_u64() & 1u) {
        *u = std::cos(t);
        *v = std::sin(t);
      } else {
        *u = 1.0 - std::cos(t);
        *v = 0.5 - std::sin(t);
      }
      *u += 0.05 * rng.normal();
      *v += 0.05 * rng.normal();
      break;
    }
  }
}

}  // namespace

std::vector<Tensor> gen_toy2d_dataset(const Toy2dSpec& spec) {
  if (spec.ambient_n < 8) throw ConfigError("gen_toy2d_dataset: ambient_n must be >= 8");
  if (spec.count < 2) throw ConfigError("gen_toy2d_dataset: count must be >= 2");
  const Tensor q = embedding_matrix(spec.seed, spec.ambient_n);
  RngStream rng = RngStream::named(spec.seed, "toy2d_data");
  std::vector<Tensor> xs;
  xs.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    double u = 0.0, v = 0.0;
    intrinsic_sample(spec.kind, rng, &u, &v);
    Tensor x({spec.ambient_n});
    for (std::size_t j = 0; j < spec.ambient_n; ++j) {
      x[j] = q.at(j, 0) * u + q.at(j, 1) * v + spec.noise_scale * rng.normal();
    }
    xs.push_back(std::move(x));
  }
  // Standardize each coordinate to zero mean, unit variance.
  const double inv_count = 1.0 / static_cast<double>(spec.count);
  for (std::size_t j = 0; j < spec.ambient_n; ++j) {
    double mean = 0.0;
    for (const Tensor& x : xs) mean += x[j];
    mean *= inv_count;
    double var = 0.0;
    for (const Tensor& x : xs) var += (x[j] - mean) * (x[j] - mean);
    var *= inv_count;
    if (var < 1e-24) throw NumericError("gen_toy2d_dataset: degenerate coordinate");
    const double inv_std = 1.0 / std::sqrt(var);
    for (Tensor& x : xs) x[j] = (x[j] - mean) * inv_std;
  }
  return xs;
}

}  // namespace isodiff
