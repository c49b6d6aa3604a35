#include <doctest.h>

#include <cmath>

#include "datasets.hpp"
#include "testutil.hpp"

using namespace isodiff;
using testutil::max_abs_diff;

TEST_CASE("s2 dataset: norms, cap exclusion, mean, determinism") {
  const int count = 10000;
  auto pts = gen_s2_dataset(11, count);
  REQUIRE(pts.size() == static_cast<std::size_t>(count));
  const double cap_cos = std::cos(kS2PolarCap);
  double mean[3] = {0, 0, 0};
  for (const Tensor& p : pts) {
    CHECK(std::abs(norm2(p) - 1.0) < 1e-12);
    CHECK(p[2] <= cap_cos + 1e-15);
    for (int i = 0; i < 3; ++i) mean[i] += p[i];
  }
  const double tol = 3.0 / std::sqrt(static_cast<double>(count)) + 0.006;
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] / count) < tol);

  auto again = gen_s2_dataset(11, 100);
  auto first = gen_s2_dataset(11, 100);
  for (int i = 0; i < 100; ++i) CHECK(max_abs_diff(again[i], first[i]) == 0.0);
}

TEST_CASE("toy2d embedding is orthonormal") {
  Tensor q = embedding_matrix(3, 64);
  double g00 = 0, g01 = 0, g11 = 0;
  for (std::size_t i = 0; i < 64; ++i) {
    g00 += q.at(i, 0) * q.at(i, 0);
    g01 += q.at(i, 0) * q.at(i, 1);
    g11 += q.at(i, 1) * q.at(i, 1);
  }
  CHECK(std::abs(g00 - 1.0) < 1e-12);
  CHECK(std::abs(g11 - 1.0) < 1e-12);
  CHECK(std::abs(g01) < 1e-12);
}

TEST_CASE("toy2d datasets are standardized exactly") {
  for (Toy2dKind kind : {Toy2dKind::two_gaussians, Toy2dKind::ring,
                         Toy2dKind::two_moons_embedded}) {
    Toy2dSpec spec;
    spec.kind = kind;
    spec.ambient_n = 16;
    spec.count = 512;
    spec.seed = 5;
    auto xs = gen_toy2d_dataset(spec);
    REQUIRE(xs.size() == 512);
    for (std::size_t j = 0; j < spec.ambient_n; ++j) {
      double mean = 0.0;
      for (const Tensor& x : xs) mean += x[j];
      mean /= 512.0;
      CHECK(std::abs(mean) < 1e-10);
      double var = 0.0;
      for (const Tensor& x : xs) var += (x[j] - mean) * (x[j] - mean);
      var /= 512.0;
      CHECK(std::abs(var - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("ring dataset concentrates around unit intrinsic radius") {
  // Before embedding the intrinsic radii are N(1, 0.05); after the
  // orthonormal embedding (noise off) the ambient norm equals the intrinsic
  // norm, up to the final standardization. Check pre-standardization
  // geometry by regenerating the intrinsic draw through the embedding Gram.
  Toy2dSpec spec;
  spec.kind = Toy2dKind::ring;
  spec.ambient_n = 12;
  spec.count = 2048;
  spec.noise_scale = 0.0;
  spec.seed = 9;
  auto xs = gen_toy2d_dataset(spec);
  // Standardization is affine per coordinate, so the data still lies on a
  // 2-d ellipse; verify the points stay on a 2-d plane (rank 2 Gram).
  // Cheap check: distances from the centroid vary little along the ring.
  Tensor centroid({12});
  for (const Tensor& x : xs) axpy(1.0 / 2048.0, x, centroid);
  double mn = 1e300, mx = 0.0;
  for (const Tensor& x : xs) {
    const double d = norm2(x - centroid);
    mn = std::min(mn, d);
    mx = std::max(mx, d);
  }
  CHECK(mx / mn < 2.0);  // a ring, not a blob through the origin
}

TEST_CASE("dataset errors") {
  Toy2dSpec spec;
  spec.ambient_n = 4;
  CHECK_THROWS_AS(gen_toy2d_dataset(spec), ConfigError);
  CHECK_THROWS_AS(gen_s2_dataset(1, 0), ConfigError);
}
