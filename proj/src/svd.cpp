#include "svd.hpp"

#include <algorithm>
#include <cmath>

namespace isodiff {

std::vector<double> singular_values(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("singular_values: matrix expected");
  // Work on a tall copy so the one-sided sweep runs over min(rows, cols)
  // columns; singular values are transpose-invariant.
  const bool transpose = a.rows() < a.cols();
  const std::size_t p = transpose ? a.cols() : a.rows();
  const std::size_t q = transpose ? a.rows() : a.cols();
  std::vector<std::vector<double>> col(q, std::vector<double>(p));
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      const double v = a.at(r, c);
      if (transpose) {
        col[r][c] = v;
      } else {
        col[c][r] = v;
      }
    }
  }

  const double tol = 1e-14;
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < q; ++i) {
      for (std::size_t j = i + 1; j < q; ++j) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          alpha += col[i][k] * col[i][k];
          beta += col[j][k] * col[j][k];
          gamma += col[i][k] * col[j][k];
        }
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < p; ++k) {
          const double vi = col[i][k], vj = col[j][k];
          col[i][k] = c * vi - s * vj;
          col[j][k] = s * vi + c * vj;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(q);
  for (std::size_t i = 0; i < q; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < p; ++k) s += col[i][k] * col[i][k];
    sigma[i] = std::sqrt(s);
  }
  std::sort(sigma.begin(), sigma.end(), std::greater<double>());
  return sigma;
}

}  // namespace isodiff
