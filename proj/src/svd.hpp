#pragma once

#include <vector>

#include "tensor.hpp"

namespace isodiff {

// Singular values of a small dense matrix by one-sided Jacobi rotations,
// sorted in descending order. Returns min(rows, cols) values. Intended for
// the encoder Jacobians measured by the metrics (dimensions up to a few
// hundred).
std::vector<double> singular_values(const Tensor& a);

}  // namespace isodiff
