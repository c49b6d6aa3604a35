#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "mlp.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace testutil {

using isodiff::Mlp;
using isodiff::RngStream;
using isodiff::Tensor;

inline double rel_err(double got, double want) {
  const double denom = std::max(std::abs(want), 1e-12);
  return std::abs(got - want) / denom;
}

inline Tensor random_vec(RngStream& rng, std::size_t n, double scale = 1.0) {
  Tensor v({n});
  for (std::size_t i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

inline Tensor random_mat(RngStream& rng, std::size_t rows, std::size_t cols,
                         double scale = 1.0) {
  Tensor m({rows, cols});
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = scale * rng.normal();
  return m;
}

using VecFn = std::function<Tensor(const Tensor&)>;

// Central finite-difference directional derivative (f(x+hv) - f(x-hv)) / 2h.
inline Tensor fd_jvp(const VecFn& f, const Tensor& x, const Tensor& v, double h = 1e-5) {
  Tensor xp = x, xm = x;
  isodiff::axpy(h, v, xp);
  isodiff::axpy(-h, v, xm);
  Tensor d = f(xp) - f(xm);
  return d * (1.0 / (2.0 * h));
}

// Central finite-difference gradient of a scalar function of one tensor,
// entry by entry.
inline Tensor fd_grad(const std::function<double(const Tensor&)>& f, const Tensor& x,
                      double h = 1e-6) {
  Tensor g(x.shape());
  Tensor work = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = work[i];
    work[i] = keep + h;
    const double fp = f(work);
    work[i] = keep - h;
    const double fm = f(work);
    work[i] = keep;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Straightforward per-neuron MLP forward, written independently of the
// library's vectorized path.
inline Tensor naive_mlp_forward(const Mlp& m, const Tensor& x) {
  std::vector<double> a(x.data(), x.data() + x.size());
  for (std::size_t layer = 0; layer < m.num_layers(); ++layer) {
    const Tensor& w = m.weights[layer];
    const Tensor& b = m.biases[layer];
    std::vector<double> next(w.rows());
    for (std::size_t r = 0; r < w.rows(); ++r) {
      double s = b[r];
      for (std::size_t c = 0; c < w.cols(); ++c) s += w.at(r, c) * a[c];
      next[r] = m.is_hidden(layer) ? isodiff::act_value(m.hidden_act, s) : s;
    }
    a = std::move(next);
  }
  return Tensor::vec(a);
}

// Eigenvalues of a symmetric matrix by classic two-sided Jacobi rotations,
// ascending. Independent of the library's one-sided SVD.
inline std::vector<double> jacobi_eigenvalues(const Tensor& sym) {
  const std::size_t n = sym.rows();
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = sym.at(i, j);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-26) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testutil
