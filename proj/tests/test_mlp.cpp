#include <doctest.h>

#include "mlp.hpp"
#include "optim.hpp"
#include "testutil.hpp"

using namespace isodiff;
using testutil::fd_jvp;
using testutil::max_abs_diff;
using testutil::naive_mlp_forward;
using testutil::random_vec;
using testutil::rel_err;

namespace {

Mlp linear_from(const Tensor& w) {
  Mlp m;
  m.layer_dims = {w.cols(), w.rows()};
  m.weights = {w};
  m.biases = {Tensor({w.rows()})};
  m.hidden_act = Activation::identity;
  return m;
}

}  // namespace

TEST_CASE("mlp_init contract") {
  CHECK_THROWS_AS(mlp_init(1, {4}, Activation::tanh), ConfigError);
  CHECK_THROWS_AS(mlp_init(1, {4, 0, 2}, Activation::tanh), ConfigError);

  // zero biases: forward(0) = 0 for an identity-activation net
  Mlp m = mlp_init(7, {2, 2}, Activation::identity);
  Tensor zero({2});
  CHECK(norm2(mlp_forward(m, zero)) == 0.0);

  // determinism and seed sensitivity
  Mlp m2 = mlp_init(7, {2, 2}, Activation::identity);
  CHECK(max_abs_diff(m.weights[0], m2.weights[0]) == 0.0);
  Mlp m3 = mlp_init(8, {2, 2}, Activation::identity);
  CHECK(max_abs_diff(m.weights[0], m3.weights[0]) > 0.0);
}

TEST_CASE("mlp_forward affine and tanh-at-zero cases") {
  Tensor w({2, 2}, {1, 2, 3, 4});
  Mlp m = linear_from(w);
  m.biases[0] = Tensor::vec({0.5, -0.5});
  Tensor x = Tensor::vec({1.0, -1.0});
  Tensor y = mlp_forward(m, x);
  CHECK(y[0] == doctest::Approx(-0.5));
  CHECK(y[1] == doctest::Approx(-1.5));

  Mlp t = mlp_init(3, {3, 5, 2}, Activation::tanh);
  CHECK(norm2(mlp_forward(t, Tensor({3}))) == 0.0);  // biases are zero

  CHECK_THROWS_AS(mlp_forward(t, Tensor({4})), ShapeError);
}

TEST_CASE("mlp_forward matches an independent evaluator") {
  RngStream rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    Mlp m = mlp_init(100 + trial, {4, 7, 5, 3},
                     trial % 2 ? Activation::tanh : Activation::softplus);
    Tensor x = random_vec(rng, 4);
    CHECK(max_abs_diff(mlp_forward(m, x), naive_mlp_forward(m, x)) < 1e-12);
  }
}

TEST_CASE("mlp_jvp exactness") {
  RngStream rng(22);
  Tensor w({3, 4}, {1, 0, 2, -1, 3, 1, 0, 0, -2, 1, 1, 4});
  Mlp lin = linear_from(w);
  Tensor x = random_vec(rng, 4), v = random_vec(rng, 4);
  CHECK(max_abs_diff(mlp_jvp(lin, x, v), matvec(w, v)) < 1e-14);

  Mlp m = mlp_init(33, {4, 8, 8, 2}, Activation::tanh);
  Tensor zero({4});
  CHECK(norm2(mlp_jvp(m, x, zero)) == 0.0);

  // central finite differences
  for (int trial = 0; trial < 5; ++trial) {
    Tensor xt = random_vec(rng, 4), vt = random_vec(rng, 4);
    Tensor got = mlp_jvp(m, xt, vt);
    Tensor fd = fd_jvp([&](const Tensor& p) { return mlp_forward(m, p); }, xt, vt);
    CHECK(max_abs_diff(got, fd) / (norm2(fd) + 1e-12) < 1e-5);
  }

  // linearity in v
  Tensor v1 = random_vec(rng, 4), v2 = random_vec(rng, 4);
  Tensor lhs = mlp_jvp(m, x, v1 * 2.0 + v2 * -3.0);
  Tensor rhs = mlp_jvp(m, x, v1) * 2.0 + mlp_jvp(m, x, v2) * -3.0;
  CHECK(max_abs_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("mlp_vjp adjoint identity and jacobian assembly agreement") {
  RngStream rng(23);
  Tensor w({3, 4}, {1, 0, 2, -1, 3, 1, 0, 0, -2, 1, 1, 4});
  Mlp lin = linear_from(w);
  Tensor x = random_vec(rng, 4), u3 = random_vec(rng, 3);
  CHECK(max_abs_diff(mlp_vjp(lin, x, u3), matvec_t(w, u3)) < 1e-14);

  Mlp m = mlp_init(44, {5, 9, 4}, Activation::tanh);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor xt = random_vec(rng, 5);
    Tensor v = random_vec(rng, 5);
    Tensor u = random_vec(rng, 4);
    const double a = dot(u, mlp_jvp(m, xt, v));
    const double b = dot(mlp_vjp(m, xt, u), v);
    CHECK(std::abs(a - b) < 1e-10);
  }

  // vjp-assembled Jacobian equals jvp-assembled Jacobian (transposed)
  Tensor xt = random_vec(rng, 5);
  Tensor j_fwd = full_jacobian(m, xt);
  Tensor e({4});
  for (std::size_t r = 0; r < 4; ++r) {
    e.fill(0.0);
    e[r] = 1.0;
    Tensor row = mlp_vjp(m, xt, e);
    for (std::size_t c = 0; c < 5; ++c) {
      CHECK(std::abs(j_fwd.at(r, c) - row[c]) < 1e-10);
    }
  }
}

TEST_CASE("full_jacobian identity, linear, and capacity guard") {
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Mlp ident = linear_from(eye);
  Tensor x = Tensor::vec({0.3, -0.7});
  CHECK(max_abs_diff(full_jacobian(ident, x), eye) == 0.0);

  Tensor w({3, 2}, {1, 2, 3, 4, 5, 6});
  CHECK(max_abs_diff(full_jacobian(linear_from(w), Tensor({2})), w) == 0.0);

  Mlp huge;
  huge.layer_dims = {4000, 4000};
  CHECK_THROWS_AS(full_jacobian(huge, Tensor({4000})), CapacityError);
}

TEST_CASE("param_grads analytic case and finite differences") {
  // single linear layer, loss <u, Wx>: dW = u x^T
  Tensor w({2, 3}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  Mlp lin = linear_from(w);
  Tensor x = Tensor::vec({1.0, -2.0, 0.5});
  Tensor u = Tensor::vec({2.0, -1.0});
  MlpGrads g = param_grads(lin, x, u);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(g.weights[0].at(r, c) == doctest::Approx(u[r] * x[c]));
  CHECK(max_abs_diff(g.biases[0], u) < 1e-14);

  // zero upstream -> zero grads
  MlpGrads gz = param_grads(lin, x, Tensor({2}));
  CHECK(norm2(gz.weights[0]) == 0.0);

  // random net vs finite differences
  RngStream rng(55);
  Mlp m = mlp_init(66, {3, 6, 4, 2}, Activation::tanh);
  Tensor xt = random_vec(rng, 3);
  Tensor ut = random_vec(rng, 2);
  MlpGrads got = param_grads(m, xt, ut);
  for (std::size_t layer = 0; layer < m.num_layers(); ++layer) {
    for (std::size_t i = 0; i < m.weights[layer].size(); ++i) {
      const double h = 1e-6;
      Mlp mp = m, mm = m;
      mp.weights[layer][i] += h;
      mm.weights[layer][i] -= h;
      const double fd =
          (dot(ut, mlp_forward(mp, xt)) - dot(ut, mlp_forward(mm, xt))) / (2 * h);
      if (std::abs(fd) > 1e-8) {
        CHECK(rel_err(got.weights[layer][i], fd) < 1e-4);
      } else {
        CHECK(std::abs(got.weights[layer][i] - fd) < 1e-7);
      }
    }
  }
}

TEST_CASE("reverse-over-forward: gradient of a jvp-containing loss") {
  // loss(theta) = |J_theta(x) v|^2 must differentiate through the tangent
  // stream; checked against parameter finite differences.
  RngStream rng(77);
  Mlp m = mlp_init(88, {3, 5, 2}, Activation::tanh);
  const Tensor x = random_vec(rng, 3);
  const Tensor v = random_vec(rng, 3);

  auto loss_value = [&](const Mlp& net) { return sum_sq(mlp_jvp(net, x, v)); };

  Graph g;
  MlpVars vars = bind_params(g, m);
  MlpTrace trace;
  forward_on_graph(g, m, vars, g.constant(x), &trace);
  auto t = jvp_on_graph(g, m, vars, trace, g.constant(v));
  auto loss = g.sum_sq(t);
  CHECK(g.scalar_value(loss) == doctest::Approx(loss_value(m)));
  g.backward(loss);
  MlpGrads got = collect_grads(g, m, vars);

  for (std::size_t layer = 0; layer < m.num_layers(); ++layer) {
    for (std::size_t i = 0; i < m.weights[layer].size(); ++i) {
      const double h = 1e-6;
      Mlp mp = m, mm = m;
      mp.weights[layer][i] += h;
      mm.weights[layer][i] -= h;
      const double fd = (loss_value(mp) - loss_value(mm)) / (2 * h);
      if (std::abs(fd) > 1e-7) {
        CHECK(rel_err(got.weights[layer][i], fd) < 1e-4);
      }
    }
  }
}

TEST_CASE("adam_step basics") {
  Tensor w = Tensor::vec({1.0, -2.0});
  Tensor g({2});
  std::vector<Tensor*> params{&w};
  std::vector<const Tensor*> grads{&g};
  AdamState st = adam_init({&w}, AdamConfig{});

  adam_step(params, grads, st);  // zero grads -> no movement
  CHECK(w[0] == 1.0);
  CHECK(w[1] == -2.0);
  CHECK(st.step == 1);

  // constant positive gradient decreases the parameter monotonically
  Tensor g1 = Tensor::vec({0.5, 0.5});
  std::vector<const Tensor*> grads1{&g1};
  double prev = w[0];
  for (int i = 0; i < 20; ++i) {
    adam_step(params, grads1, st);
    CHECK(w[0] < prev);
    prev = w[0];
  }
}

TEST_CASE("adam on a quadratic bowl") {
  Tensor w({8});
  w.fill(1.0);
  AdamConfig cfg;
  cfg.lr = 1e-2;
  AdamState st = adam_init({&w}, cfg);
  std::vector<Tensor*> params{&w};
  for (int i = 0; i < 2000; ++i) {
    Tensor g = w * 2.0;  // d|w|^2/dw
    std::vector<const Tensor*> grads{&g};
    adam_step(params, grads, st);
  }
  CHECK(norm2(w) < 1e-3);
}
