#include "tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace isodiff {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != data_.size()) {
    throw ShapeError("Tensor: shape/data size mismatch");
  }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::vec(std::vector<double> data) {
  std::size_t n = data.size();
  return Tensor({n}, std::move(data));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols) {
  return Tensor({rows, cols});
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ShapeError("Tensor::rows: not a matrix");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ShapeError("Tensor::cols: not a matrix");
  return shape_[1];
}

double& Tensor::at(std::size_t r, std::size_t c) {
  return data_[r * shape_[1] + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return data_[r * shape_[1] + c];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(where) + ": shape mismatch " + shape_str(a) +
                     " vs " + shape_str(b));
  }
}

void require_vector(const Tensor& a, std::size_t dim, const char* where) {
  if (a.rank() != 1 || a.size() != dim) {
    throw ShapeError(std::string(where) + ": expected vector of length " +
                     std::to_string(dim) + ", got " + shape_str(a));
  }
}

void require_finite(const Tensor& a, const char* where) {
  if (!a.all_finite()) {
    throw NumericError(std::string(where) + ": non-finite entries");
  }
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sum_sq(const Tensor& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * a[i];
  return s;
}

double norm2(const Tensor& a) { return std::sqrt(sum_sq(a)); }

Tensor operator+(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "operator+");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "operator-");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor operator*(const Tensor& a, double k) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= k;
  return out;
}

void axpy(double k, const Tensor& x, Tensor& y) {
  require_same_shape(x, y, "axpy");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += k * x[i];
}

Tensor matvec(const Tensor& m, const Tensor& x) {
  if (m.rank() != 2) throw ShapeError("matvec: not a matrix");
  require_vector(x, m.cols(), "matvec");
  Tensor y({m.rows()});
  const double* md = m.data();
  const std::size_t rows = m.rows(), cols = m.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    const double* row = md + r * cols;
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
    y[r] = s;
  }
  return y;
}

Tensor matvec_t(const Tensor& m, const Tensor& x) {
  if (m.rank() != 2) throw ShapeError("matvec_t: not a matrix");
  require_vector(x, m.rows(), "matvec_t");
  Tensor y({m.cols()});
  const double* md = m.data();
  const std::size_t rows = m.rows(), cols = m.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const double xr = x[r];
    const double* row = md + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
  }
  return y;
}

Tensor concat(const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1) throw ShapeError("concat: vectors only");
  Tensor out({a.size() + b.size()});
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[a.size() + i] = b[i];
  return out;
}

Tensor head(const Tensor& a, std::size_t len) {
  if (a.rank() != 1 || a.size() < len) throw ShapeError("head: out of range");
  Tensor out({len});
  for (std::size_t i = 0; i < len; ++i) out[i] = a[i];
  return out;
}

std::string shape_str(const Tensor& a) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < a.shape().size(); ++i) {
    if (i) os << ",";
    os << a.shape()[i];
  }
  os << ")";
  return os.str();
}

}  // namespace isodiff
