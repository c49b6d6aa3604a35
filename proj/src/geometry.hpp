#pragma once

#include "schedule.hpp"
#include "tensor.hpp"

namespace isodiff {

// Stereographic chart of the sphere S^{n-1}(r) with the north pole removed.
//
// The chart is the r-scaled variant
//     z = r * x_{1:n-1} / (r - x_n),
// whose inverse is
//     x = r/(|z|^2 + r^2) * (2r*z, |z|^2 - r^2),
// and whose pullback metric is the conformal scalar
//     g(z) = 4 r^4 / (|z|^2 + r^2)^2
// times the identity on R^{n-1}. At r=1 this coincides with the textbook
// projection.
struct SphereChart {
  std::size_t n = 0;  // ambient dimension, >= 2
  double r = 1.0;     // radius, > 0

  SphereChart() = default;
  SphereChart(std::size_t ambient_dim, double radius);
};

// Mean of the chi(n) distribution in the sqrt(n - 1/2) approximation; the
// norm of a standard Gaussian vector in R^n concentrates at this value.
double chi_mean_radius(int n);

// Sphere radius of the perturbed marginal at timestep t: sqrt((1-alpha_bar_t)*n).
double radius_at(const NoiseSchedule& sched, int t, int n);

Tensor project(const SphereChart& chart, const Tensor& x);
Tensor unproject(const SphereChart& chart, const Tensor& z);
double metric_scalar(const SphereChart& chart, const Tensor& z);

// Exact directional derivatives of the inverse projection. unproject_vjp is
// the adjoint (transposed Jacobian applied to an ambient vector).
Tensor unproject_jvp(const SphereChart& chart, const Tensor& z, const Tensor& v);
Tensor unproject_vjp(const SphereChart& chart, const Tensor& z, const Tensor& u);

// Great-circle interpolation; falls back to normalized lerp for nearly
// parallel inputs. Errors on zero-length or antipodal inputs.
Tensor slerp(const Tensor& x, const Tensor& y, double s);
Tensor lerp(const Tensor& x, const Tensor& y, double s);

}  // namespace isodiff
