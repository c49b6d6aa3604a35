#include <doctest.h>

#include "rng.hpp"
#include "tensor.hpp"
#include "testutil.hpp"

using namespace isodiff;

TEST_CASE("tensor shape and data invariants") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);

  t.at(1, 2) = 5.0;
  CHECK(t[5] == 5.0);  // row-major
  CHECK(t.all_finite());
  t[0] = std::nan("");
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("matvec against hand computation") {
  Tensor m({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor x = Tensor::vec({1, 0, -1});
  Tensor y = matvec(m, x);
  CHECK(y[0] == doctest::Approx(-2.0));
  CHECK(y[1] == doctest::Approx(-2.0));
  Tensor u = Tensor::vec({1, 1});
  Tensor z = matvec_t(m, u);
  CHECK(z[0] == doctest::Approx(5.0));
  CHECK(z[1] == doctest::Approx(7.0));
  CHECK(z[2] == doctest::Approx(9.0));
}

TEST_CASE("rng streams are deterministic and label-disjoint") {
  RngStream a = RngStream::named(42, "alpha");
  RngStream a2 = RngStream::named(42, "alpha");
  RngStream b = RngStream::named(42, "beta");
  bool all_equal = true, any_equal_cross = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t va = a.next_u64();
    all_equal = all_equal && (va == a2.next_u64());
    any_equal_cross = any_equal_cross || (va == b.next_u64());
  }
  CHECK(all_equal);
  CHECK_FALSE(any_equal_cross);
}

TEST_CASE("rng normal moments") {
  RngStream rng(7);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng uniform_int covers range uniformly enough") {
  RngStream rng(3);
  int counts[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < 50000; ++i) counts[rng.uniform_int(0, 4)]++;
  for (int c : counts) CHECK(c > 9000);
}
