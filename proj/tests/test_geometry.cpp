#include <doctest.h>

#include <cmath>

#include "geometry.hpp"
#include "testutil.hpp"

using namespace isodiff;
using testutil::fd_jvp;
using testutil::max_abs_diff;
using testutil::random_vec;

TEST_CASE("chi_mean_radius closed form") {
  CHECK(chi_mean_radius(1) == doctest::Approx(std::sqrt(0.5)));
  CHECK(chi_mean_radius(2) == doctest::Approx(std::sqrt(1.5)));
  CHECK(chi_mean_radius(196608) == doctest::Approx(std::sqrt(196607.5)));
  CHECK_THROWS_AS(chi_mean_radius(0), ConfigError);
}

TEST_CASE("chi_mean_radius Monte-Carlo oracle (reduced n)") {
  const int n = 512, draws = 20000;
  RngStream rng(1234);
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      const double x = rng.normal();
      s += x * x;
    }
    const double r = std::sqrt(s);
    sum += r;
    sum2 += r * r;
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  const double se = std::sqrt(var / draws);
  CHECK(std::abs(mean - chi_mean_radius(n)) < 3.0 * se);
}

TEST_CASE("radius_at formula and limits") {
  NoiseSchedule s = schedule_linear(1000, 1e-4, 0.02);
  // alpha_bar = 3/4, n = 4 -> exactly 1 (constructed schedule)
  NoiseSchedule tiny = schedule_linear(1, 0.25, 0.25);
  CHECK(tiny.alpha_bar_at(1) == doctest::Approx(0.75));
  CHECK(radius_at(tiny, 1, 4) == doctest::Approx(1.0));

  const double r = radius_at(s, 1000, 64);
  CHECK(r > 7.9);
  CHECK(r < 8.0);
  CHECK_THROWS_AS(radius_at(s, 0, 64), ShapeError);
  CHECK_THROWS_AS(radius_at(s, 1001, 64), ShapeError);
}

TEST_CASE("project/unproject hand values") {
  SphereChart c1(3, 1.0);
  Tensor south = Tensor::vec({0.0, 0.0, -1.0});
  Tensor z = project(c1, south);
  CHECK(norm2(z) == 0.0);

  // equator point at r=1 coincides with the textbook chart
  Tensor eq = Tensor::vec({1.0, 0.0, 0.0});
  Tensor zeq = project(c1, eq);
  CHECK(zeq[0] == doctest::Approx(1.0));
  CHECK(zeq[1] == doctest::Approx(0.0));

  SphereChart c2(3, 2.0);
  Tensor x = Tensor::vec({2.0, 0.0, 0.0});
  Tensor z2 = project(c2, x);
  CHECK(z2[0] == doctest::Approx(2.0));
  CHECK(z2[1] == doctest::Approx(0.0));

  Tensor org({2});
  Tensor back = unproject(c2, org);
  CHECK(back[0] == doctest::Approx(0.0));
  CHECK(back[1] == doctest::Approx(0.0));
  CHECK(back[2] == doctest::Approx(-2.0));

  // r=2, z=(2,0) -> 2/8*(8,0,0)
  Tensor zz = Tensor::vec({2.0, 0.0});
  Tensor xx = unproject(c2, zz);
  CHECK(xx[0] == doctest::Approx(2.0));
  CHECK(xx[1] == doctest::Approx(0.0));
  CHECK(xx[2] == doctest::Approx(0.0).epsilon(1e-15));

  // north pole rejection
  Tensor pole = Tensor::vec({0.0, 0.0, 2.0});
  CHECK_THROWS_AS(project(c2, pole), SingularityError);
}

TEST_CASE("chart round trip and sphere membership") {
  RngStream rng(5);
  SphereChart chart(6, 3.5);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor z = random_vec(rng, 5, 2.0);
    Tensor x = unproject(chart, z);
    CHECK(std::abs(norm2(x) - chart.r) < 1e-12 * chart.r);
    Tensor z2 = project(chart, x);
    CHECK(max_abs_diff(z, z2) <= 1e-9 * (1.0 + norm2(z)));
  }
}

TEST_CASE("metric scalar special values and FD pullback oracle") {
  SphereChart chart(4, 1.7);
  Tensor zero({3});
  CHECK(metric_scalar(chart, zero) == doctest::Approx(4.0));
  Tensor at_r = Tensor::vec({1.7, 0.0, 0.0});
  CHECK(metric_scalar(chart, at_r) == doctest::Approx(1.0));

  // J_sigma^T J_sigma == g(z) I, J assembled by finite differences
  RngStream rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor z = random_vec(rng, 3, 1.5);
    const double g = metric_scalar(chart, z);
    Tensor jac({4, 3});
    for (std::size_t c = 0; c < 3; ++c) {
      Tensor e({3});
      e[c] = 1.0;
      Tensor col = fd_jvp([&](const Tensor& p) { return unproject(chart, p); }, z, e, 1e-6);
      for (std::size_t r = 0; r < 4; ++r) jac.at(r, c) = col[r];
    }
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < 4; ++r) s += jac.at(r, i) * jac.at(r, j);
        CHECK(std::abs(s - (i == j ? g : 0.0)) < 1e-8 * std::max(1.0, g));
      }
    }
  }
}

TEST_CASE("unproject_jvp: zero, isometry scaling, FD agreement, adjoint") {
  RngStream rng(7);
  SphereChart chart(5, 2.3);
  Tensor z = random_vec(rng, 4);
  Tensor zero({4});
  CHECK(norm2(unproject_jvp(chart, z, zero)) == 0.0);

  for (int trial = 0; trial < 20; ++trial) {
    Tensor zt = random_vec(rng, 4, 1.3);
    Tensor v = random_vec(rng, 4);
    Tensor jv = unproject_jvp(chart, zt, v);
    // |J v|^2 = g |v|^2 (conformality)
    const double g = metric_scalar(chart, zt);
    CHECK(sum_sq(jv) == doctest::Approx(g * sum_sq(v)).epsilon(1e-8));
    // finite differences
    Tensor fd = fd_jvp([&](const Tensor& p) { return unproject(chart, p); }, zt, v);
    CHECK(max_abs_diff(jv, fd) < 1e-6);
    // vjp is the exact adjoint
    Tensor u = random_vec(rng, 5);
    CHECK(dot(u, jv) == doctest::Approx(dot(unproject_vjp(chart, zt, u), v)).epsilon(1e-12));
  }
}

TEST_CASE("slerp endpoints, quarter circle, norm preservation") {
  Tensor x = Tensor::vec({1.0, 0.0});
  Tensor y = Tensor::vec({0.0, 1.0});
  CHECK(max_abs_diff(slerp(x, y, 0.0), x) < 1e-15);
  CHECK(max_abs_diff(slerp(x, y, 1.0), y) < 1e-15);
  Tensor mid = slerp(x, y, 0.5);
  CHECK(mid[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(mid[1] == doctest::Approx(std::sqrt(0.5)));

  RngStream rng(8);
  Tensor a = random_vec(rng, 6);
  Tensor b = random_vec(rng, 6);
  const double r = 2.2;
  const double na = norm2(a), nb = norm2(b);
  Tensor ar = a * (r / na), br = b * (r / nb);
  for (int i = 0; i <= 16; ++i) {
    const double s = i / 16.0;
    CHECK(std::abs(norm2(slerp(ar, br, s)) - r) < 1e-9);
  }

  CHECK_THROWS_AS(slerp(Tensor({6}), br, 0.5), NumericError);
  Tensor anti = ar * -1.0;
  CHECK_THROWS_AS(slerp(ar, anti, 0.5), NumericError);
}

TEST_CASE("slerp geodesic arc length") {
  RngStream rng(9);
  Tensor a = random_vec(rng, 5);
  Tensor b = random_vec(rng, 5);
  const double r = 3.0;
  a = a * (r / norm2(a));
  b = b * (r / norm2(b));
  double cosang = dot(a, b) / (r * r);
  cosang = std::min(1.0, std::max(-1.0, cosang));
  const double theta = std::acos(cosang);

  const int k = 128;
  double len = 0.0;
  Tensor prev = a;
  for (int i = 1; i <= k; ++i) {
    Tensor cur = slerp(a, b, static_cast<double>(i) / k);
    len += norm2(cur - prev);
    prev = cur;
  }
  CHECK(std::abs(len - r * theta) / (r * theta) < 1e-4);
}

TEST_CASE("lerp basics and chord comparison") {
  Tensor x = Tensor::vec({1.0, 2.0});
  CHECK(norm2(lerp(x, x * -1.0, 0.5)) == 0.0);
  CHECK(max_abs_diff(lerp(x, x * 3.0, 0.0), x) == 0.0);

  RngStream rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor a = random_vec(rng, 4);
    Tensor b = random_vec(rng, 4);
    const double r = 1.5;
    a = a * (r / norm2(a));
    b = b * (r / norm2(b));
    CHECK(norm2(lerp(a, b, 0.5)) <= norm2(slerp(a, b, 0.5)) + 1e-12);
  }
}
