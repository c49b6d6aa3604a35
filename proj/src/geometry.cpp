#include "geometry.hpp"

#include <cmath>
#include <string>

namespace isodiff {

SphereChart::SphereChart(std::size_t ambient_dim, double radius)
    : n(ambient_dim), r(radius) {
  if (n < 2) throw ConfigError("SphereChart: ambient dimension must be >= 2");
  if (!(r > 0.0)) throw ConfigError("SphereChart: radius must be positive");
}

double chi_mean_radius(int n) {
  if (n < 1) throw ConfigError("chi_mean_radius: n must be >= 1");
  return std::sqrt(static_cast<double>(n) - 0.5);
}

double radius_at(const NoiseSchedule& sched, int t, int n) {
  sched.check_t(t, "radius_at");
  if (n < 1) throw ConfigError("radius_at: n must be >= 1");
  return std::sqrt((1.0 - sched.alpha_bar_at(t)) * static_cast<double>(n));
}

Tensor project(const SphereChart& chart, const Tensor& x) {
  require_vector(x, chart.n, "project");
  const double xn = x[chart.n - 1];
  const double denom = chart.r - xn;
  if (std::abs(denom) <= 1e-9 * chart.r) {
    throw SingularityError("project: input too close to the north pole");
  }
  Tensor z({chart.n - 1});
  const double k = chart.r / denom;
  for (std::size_t i = 0; i + 1 < chart.n; ++i) z[i] = k * x[i];
  return z;
}

Tensor unproject(const SphereChart& chart, const Tensor& z) {
  require_vector(z, chart.n - 1, "unproject");
  const double s = sum_sq(z);
  const double r = chart.r;
  const double d = s + r * r;
  Tensor x({chart.n});
  const double k = 2.0 * r * r / d;
  for (std::size_t i = 0; i + 1 < chart.n; ++i) x[i] = k * z[i];
  x[chart.n - 1] = r * (s - r * r) / d;
  return x;
}

double metric_scalar(const SphereChart& chart, const Tensor& z) {
  require_vector(z, chart.n - 1, "metric_scalar");
  const double r2 = chart.r * chart.r;
  const double d = sum_sq(z) + r2;
  return 4.0 * r2 * r2 / (d * d);
}

Tensor unproject_jvp(const SphereChart& chart, const Tensor& z, const Tensor& v) {
  require_vector(z, chart.n - 1, "unproject_jvp");
  require_same_shape(z, v, "unproject_jvp");
  const double r = chart.r;
  const double d = sum_sq(z) + r * r;
  const double zv = dot(z, v);
  Tensor out({chart.n});
  const double a = 2.0 * r * r / d;
  const double b = 4.0 * r * r * zv / (d * d);
  for (std::size_t i = 0; i + 1 < chart.n; ++i) out[i] = a * v[i] - b * z[i];
  out[chart.n - 1] = 4.0 * r * r * r * zv / (d * d);
  return out;
}

Tensor unproject_vjp(const SphereChart& chart, const Tensor& z, const Tensor& u) {
  require_vector(z, chart.n - 1, "unproject_vjp");
  require_vector(u, chart.n, "unproject_vjp");
  const double r = chart.r;
  const double d = sum_sq(z) + r * r;
  double zu = 0.0;
  for (std::size_t i = 0; i + 1 < chart.n; ++i) zu += z[i] * u[i];
  const double a = 2.0 * r * r / d;
  const double b = 4.0 * r * r / (d * d) * zu;
  const double c = 4.0 * r * r * r / (d * d) * u[chart.n - 1];
  Tensor out({chart.n - 1});
  for (std::size_t i = 0; i + 1 < chart.n; ++i) {
    out[i] = a * u[i] - b * z[i] + c * z[i];
  }
  return out;
}

Tensor slerp(const Tensor& x, const Tensor& y, double s) {
  require_same_shape(x, y, "slerp");
  const double nx = norm2(x), ny = norm2(y);
  if (nx == 0.0 || ny == 0.0) throw NumericError("slerp: zero-length input");
  double c = dot(x, y) / (nx * ny);
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  const double theta = std::acos(c);
  if (theta >= 3.14159265358979323846 - 1e-6) {
    throw NumericError("slerp: antipodal inputs have no unique great circle");
  }
  if (theta < 1e-7) {
    // Nearly parallel: lerp then restore the interpolated norm.
    Tensor out = lerp(x, y, s);
    const double want = (1.0 - s) * nx + s * ny;
    const double have = norm2(out);
    if (have > 0.0) {
      const double k = want / have;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] *= k;
    }
    return out;
  }
  const double st = std::sin(theta);
  const double a = std::sin((1.0 - s) * theta) / st;
  const double b = std::sin(s * theta) / st;
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

Tensor lerp(const Tensor& x, const Tensor& y, double s) {
  require_same_shape(x, y, "lerp");
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - s) * x[i] + s * y[i];
  }
  return out;
}

}  // namespace isodiff
