#pragma once

#include <cstdint>
#include <vector>

#include "geometry.hpp"
#include "tensor.hpp"

namespace isodiff {

enum class Activation : std::uint8_t { identity, tanh, softplus };

double act_value(Activation a, double z);
double act_deriv(Activation a, double z);
double act_deriv2(Activation a, double z);

// Reverse-mode tape over whole vectors and matrices. Nodes are appended in
// evaluation order; backward() runs one reverse sweep seeding d(loss)=1.
//
// Forward-tangent (JVP) computations are recorded as ordinary nodes: the
// tangent stream of an MLP layer is matvec + act_grad + mul, so losses
// built from directional derivatives stay differentiable with respect to
// the parameter leaves (reverse-over-forward). act_grad's backward rule is
// where the second derivative of the activation enters.
class Graph {
 public:
  using Id = int;

  Id leaf(Tensor value, bool requires_grad);
  Id constant(Tensor value) { return leaf(std::move(value), false); }

  Id affine(Id w, Id x, Id b);   // W x + b
  Id matvec(Id w, Id x);         // W x
  Id matvec_t(Id w, Id x);       // W^T x
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);            // elementwise
  Id scale(Id a, double k);
  Id activation(Id z, Activation f);
  Id activation_grad(Id z, Activation f);
  Id concat_tail(Id a, Tensor tail);  // [a; tail] with constant tail
  Id front(Id a, std::size_t len);    // first len entries
  Id sub_const(Id a, Tensor c);       // a - c
  // k * J_unproject(z)^T a, with constant chart point z.
  Id chart_pullback(Id a, SphereChart chart, Tensor z, double k);
  Id dot(Id a, Id b);            // scalar
  Id sum_sq(Id a);               // scalar
  Id sqrt_scalar(Id a);
  Id div_scalar(Id num, Id den);

  const Tensor& value(Id id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  double scalar_value(Id id) const { return value(id)[0]; }

  // Gradient of the last backward() target w.r.t. node id; zeros if the
  // node was not reached.
  Tensor gradient(Id id) const;

  void backward(Id loss);
  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  enum class Op : std::uint8_t {
    leaf, affine, matvec, matvec_t, add, sub, mul, scale, act, act_grad,
    concat_tail, front, sub_const, chart_pullback, dot, sum_sq, sqrt_scalar,
    div_scalar,
  };

  struct Node {
    Op op = Op::leaf;
    Activation act = Activation::identity;
    Id a = -1, b = -1, c = -1;
    double k = 0.0;
    int aux = -1;  // index into consts_ / charts_
    bool needs_grad = false;
    Tensor value;
    Tensor grad;
  };

  struct ChartCtx {
    SphereChart chart;
    Tensor z;
  };

  Id push(Node n);
  bool parent_needs(Id id) const {
    return id >= 0 && nodes_[static_cast<std::size_t>(id)].needs_grad;
  }
  Tensor& grad_of(Id id);
  void accumulate(Id id, const Tensor& g);

  std::vector<Node> nodes_;
  std::vector<Tensor> consts_;
  std::vector<ChartCtx> charts_;
};

}  // namespace isodiff
