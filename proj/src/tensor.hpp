#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace isodiff {

// Dense row-major array of 64-bit reals. Rank 1 vectors and rank 2 matrices
// cover everything this project needs; higher ranks are stored but only the
// checkpoint code ever round-trips them.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor vec(std::vector<double> data);
  static Tensor matrix(std::size_t rows, std::size_t cols);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t rows() const;
  std::size_t cols() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  void fill(double v);

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// Shape checks used at module boundaries.
void require_same_shape(const Tensor& a, const Tensor& b, const char* where);
void require_vector(const Tensor& a, std::size_t dim, const char* where);
void require_finite(const Tensor& a, const char* where);

double dot(const Tensor& a, const Tensor& b);
double norm2(const Tensor& a);   // Euclidean norm
double sum_sq(const Tensor& a);  // squared Euclidean norm

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, double k);
void axpy(double k, const Tensor& x, Tensor& y);  // y += k*x

// y = M x and y = M^T x for rank-2 M.
Tensor matvec(const Tensor& m, const Tensor& x);
Tensor matvec_t(const Tensor& m, const Tensor& x);

Tensor concat(const Tensor& a, const Tensor& b);
Tensor head(const Tensor& a, std::size_t len);

std::string shape_str(const Tensor& a);

}  // namespace isodiff
