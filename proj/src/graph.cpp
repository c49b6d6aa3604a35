#include "graph.hpp"

#include <cmath>

namespace isodiff {

double act_value(Activation a, double z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::tanh: return std::tanh(z);
    case Activation::softplus:
      // log(1+exp(z)) evaluated stably on both tails.
      return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  return z;
}

double act_deriv(Activation a, double z) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::softplus:
      return 1.0 / (1.0 + std::exp(-z));
  }
  return 1.0;
}

double act_deriv2(Activation a, double z) {
  switch (a) {
    case Activation::identity: return 0.0;
    case Activation::tanh: {
      const double t = std::tanh(z);
      return -2.0 * t * (1.0 - t * t);
    }
    case Activation::softplus: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
  }
  return 0.0;
}

Graph::Id Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

Graph::Id Graph::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.op = Op::leaf;
  n.needs_grad = requires_grad;
  n.value = std::move(value);
  return push(std::move(n));
}

Graph::Id Graph::affine(Id w, Id x, Id b) {
  const Tensor& wm = value(w);
  Node n;
  n.op = Op::affine;
  n.a = w;
  n.b = x;
  n.c = b;
  n.needs_grad = parent_needs(w) || parent_needs(x) || parent_needs(b);
  n.value = isodiff::matvec(wm, value(x));
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] += value(b)[i];
  return push(std::move(n));
}

Graph::Id Graph::matvec(Id w, Id x) {
  Node n;
  n.op = Op::matvec;
  n.a = w;
  n.b = x;
  n.needs_grad = parent_needs(w) || parent_needs(x);
  n.value = isodiff::matvec(value(w), value(x));
  return push(std::move(n));
}

Graph::Id Graph::matvec_t(Id w, Id x) {
  Node n;
  n.op = Op::matvec_t;
  n.a = w;
  n.b = x;
  n.needs_grad = parent_needs(w) || parent_needs(x);
  n.value = isodiff::matvec_t(value(w), value(x));
  return push(std::move(n));
}

Graph::Id Graph::add(Id a, Id b) {
  Node n;
  n.op = Op::add;
  n.a = a;
  n.b = b;
  n.needs_grad = parent_needs(a) || parent_needs(b);
  n.value = value(a) + value(b);
  return push(std::move(n));
}

Graph::Id Graph::sub(Id a, Id b) {
  Node n;
  n.op = Op::sub;
  n.a = a;
  n.b = b;
  n.needs_grad = parent_needs(a) || parent_needs(b);
  n.value = value(a) - value(b);
  return push(std::move(n));
}

Graph::Id Graph::mul(Id a, Id b) {
  require_same_shape(value(a), value(b), "Graph::mul");
  Node n;
  n.op = Op::mul;
  n.a = a;
  n.b = b;
  n.needs_grad = parent_needs(a) || parent_needs(b);
  n.value = value(a);
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] *= value(b)[i];
  return push(std::move(n));
}

Graph::Id Graph::scale(Id a, double k) {
  Node n;
  n.op = Op::scale;
  n.a = a;
  n.k = k;
  n.needs_grad = parent_needs(a);
  n.value = value(a) * k;
  return push(std::move(n));
}

Graph::Id Graph::activation(Id z, Activation f) {
  Node n;
  n.op = Op::act;
  n.a = z;
  n.act = f;
  n.needs_grad = parent_needs(z);
  n.value = value(z);
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = act_value(f, value(z)[i]);
  return push(std::move(n));
}

Graph::Id Graph::activation_grad(Id z, Activation f) {
  Node n;
  n.op = Op::act_grad;
  n.a = z;
  n.act = f;
  n.needs_grad = parent_needs(z);
  n.value = value(z);
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = act_deriv(f, value(z)[i]);
  return push(std::move(n));
}

Graph::Id Graph::concat_tail(Id a, Tensor tail) {
  Node n;
  n.op = Op::concat_tail;
  n.a = a;
  n.needs_grad = parent_needs(a);
  n.value = concat(value(a), tail);
  n.aux = static_cast<int>(consts_.size());
  consts_.push_back(std::move(tail));
  return push(std::move(n));
}

Graph::Id Graph::front(Id a, std::size_t len) {
  Node n;
  n.op = Op::front;
  n.a = a;
  n.k = static_cast<double>(len);
  n.needs_grad = parent_needs(a);
  n.value = head(value(a), len);
  return push(std::move(n));
}

Graph::Id Graph::sub_const(Id a, Tensor c) {
  require_same_shape(value(a), c, "Graph::sub_const");
  Node n;
  n.op = Op::sub_const;
  n.a = a;
  n.needs_grad = parent_needs(a);
  n.value = value(a) - c;
  n.aux = static_cast<int>(consts_.size());
  consts_.push_back(std::move(c));
  return push(std::move(n));
}

Graph::Id Graph::chart_pullback(Id a, SphereChart chart, Tensor z, double k) {
  Node n;
  n.op = Op::chart_pullback;
  n.a = a;
  n.k = k;
  n.needs_grad = parent_needs(a);
  n.value = unproject_vjp(chart, z, value(a)) * k;
  n.aux = static_cast<int>(charts_.size());
  charts_.push_back(ChartCtx{chart, std::move(z)});
  return push(std::move(n));
}

Graph::Id Graph::dot(Id a, Id b) {
  Node n;
  n.op = Op::dot;
  n.a = a;
  n.b = b;
  n.needs_grad = parent_needs(a) || parent_needs(b);
  n.value = Tensor::scalar(isodiff::dot(value(a), value(b)));
  return push(std::move(n));
}

Graph::Id Graph::sum_sq(Id a) {
  Node n;
  n.op = Op::sum_sq;
  n.a = a;
  n.needs_grad = parent_needs(a);
  n.value = Tensor::scalar(isodiff::sum_sq(value(a)));
  return push(std::move(n));
}

Graph::Id Graph::sqrt_scalar(Id a) {
  Node n;
  n.op = Op::sqrt_scalar;
  n.a = a;
  n.needs_grad = parent_needs(a);
  n.value = Tensor::scalar(std::sqrt(value(a)[0]));
  return push(std::move(n));
}

Graph::Id Graph::div_scalar(Id num, Id den) {
  Node n;
  n.op = Op::div_scalar;
  n.a = num;
  n.b = den;
  n.needs_grad = parent_needs(num) || parent_needs(den);
  n.value = Tensor::scalar(value(num)[0] / value(den)[0]);
  return push(std::move(n));
}

Tensor Graph::gradient(Id id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.empty()) return Tensor(n.value.shape());
  return n.grad;
}

Tensor& Graph::grad_of(Id id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Graph::accumulate(Id id, const Tensor& g) {
  if (id < 0) return;
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.needs_grad) return;
  Tensor& dst = grad_of(id);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
}

void Graph::backward(Id loss) {
  Node& top = nodes_[static_cast<std::size_t>(loss)];
  if (top.value.size() != 1) throw ShapeError("Graph::backward: loss must be scalar");
  for (Node& n : nodes_) {
    if (!n.grad.empty()) n.grad.fill(0.0);
  }
  grad_of(loss)[0] = 1.0;

  for (Id id = loss; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad || n.grad.empty()) continue;
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::leaf:
        break;
      case Op::affine:
      case Op::matvec: {
        // y = W x (+ b). dW += g x^T, dx += W^T g, db += g.
        const Tensor& x = value(n.b);
        if (parent_needs(n.a)) {
          Tensor& dw = grad_of(n.a);
          const std::size_t rows = dw.rows(), cols = dw.cols();
          double* dwp = dw.data();
          for (std::size_t r = 0; r < rows; ++r) {
            const double gr = g[r];
            double* row = dwp + r * cols;
            for (std::size_t c = 0; c < cols; ++c) row[c] += gr * x[c];
          }
        }
        if (parent_needs(n.b)) {
          Tensor dx = isodiff::matvec_t(value(n.a), g);
          accumulate(n.b, dx);
        }
        if (n.op == Op::affine && parent_needs(n.c)) accumulate(n.c, g);
        break;
      }
      case Op::matvec_t: {
        // y = W^T x. dW += x g^T, dx += W g.
        const Tensor& x = value(n.b);
        if (parent_needs(n.a)) {
          Tensor& dw = grad_of(n.a);
          const std::size_t rows = dw.rows(), cols = dw.cols();
          double* dwp = dw.data();
          for (std::size_t r = 0; r < rows; ++r) {
            const double xr = x[r];
            double* row = dwp + r * cols;
            for (std::size_t c = 0; c < cols; ++c) row[c] += xr * g[c];
          }
        }
        if (parent_needs(n.b)) {
          Tensor dx = isodiff::matvec(value(n.a), g);
          accumulate(n.b, dx);
        }
        break;
      }
      case Op::add:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::sub: {
        accumulate(n.a, g);
        if (parent_needs(n.b)) {
          Tensor neg = g * -1.0;
          accumulate(n.b, neg);
        }
        break;
      }
      case Op::mul: {
        if (parent_needs(n.a)) {
          Tensor da = g;
          const Tensor& bv = value(n.b);
          for (std::size_t i = 0; i < da.size(); ++i) da[i] *= bv[i];
          accumulate(n.a, da);
        }
        if (parent_needs(n.b)) {
          Tensor db = g;
          const Tensor& av = value(n.a);
          for (std::size_t i = 0; i < db.size(); ++i) db[i] *= av[i];
          accumulate(n.b, db);
        }
        break;
      }
      case Op::scale: {
        if (parent_needs(n.a)) {
          Tensor da = g * n.k;
          accumulate(n.a, da);
        }
        break;
      }
      case Op::act: {
        if (parent_needs(n.a)) {
          const Tensor& z = value(n.a);
          Tensor dz = g;
          for (std::size_t i = 0; i < dz.size(); ++i) dz[i] *= act_deriv(n.act, z[i]);
          accumulate(n.a, dz);
        }
        break;
      }
      case Op::act_grad: {
        if (parent_needs(n.a)) {
          const Tensor& z = value(n.a);
          Tensor dz = g;
          for (std::size_t i = 0; i < dz.size(); ++i) dz[i] *= act_deriv2(n.act, z[i]);
          accumulate(n.a, dz);
        }
        break;
      }
      case Op::concat_tail: {
        if (parent_needs(n.a)) {
          const std::size_t len = nodes_[static_cast<std::size_t>(n.a)].value.size();
          Tensor da = head(g, len);
          accumulate(n.a, da);
        }
        break;
      }
      case Op::front: {
        if (parent_needs(n.a)) {
          const Node& p = nodes_[static_cast<std::size_t>(n.a)];
          Tensor da(p.value.shape());
          for (std::size_t i = 0; i < g.size(); ++i) da[i] = g[i];
          accumulate(n.a, da);
        }
        break;
      }
      case Op::sub_const:
        accumulate(n.a, g);
        break;
      case Op::chart_pullback: {
        // y = k * A^T x with A = J_unproject(z), so dx += k * A g.
        if (parent_needs(n.a)) {
          const ChartCtx& ctx = charts_[static_cast<std::size_t>(n.aux)];
          Tensor da = unproject_jvp(ctx.chart, ctx.z, g) * n.k;
          accumulate(n.a, da);
        }
        break;
      }
      case Op::dot: {
        const double gs = g[0];
        if (parent_needs(n.a)) {
          Tensor da = value(n.b) * gs;
          accumulate(n.a, da);
        }
        if (parent_needs(n.b)) {
          Tensor db = value(n.a) * gs;
          accumulate(n.b, db);
        }
        break;
      }
      case Op::sum_sq: {
        if (parent_needs(n.a)) {
          Tensor da = value(n.a) * (2.0 * g[0]);
          accumulate(n.a, da);
        }
        break;
      }
      case Op::sqrt_scalar: {
        if (parent_needs(n.a)) {
          Tensor da = Tensor::scalar(0.5 / n.value[0] * g[0]);
          accumulate(n.a, da);
        }
        break;
      }
      case Op::div_scalar: {
        const double den = value(n.b)[0];
        if (parent_needs(n.a)) accumulate(n.a, Tensor::scalar(g[0] / den));
        if (parent_needs(n.b)) {
          accumulate(n.b, Tensor::scalar(-g[0] * value(n.a)[0] / (den * den)));
        }
        break;
      }
    }
  }
}

void Graph::clear() {
  nodes_.clear();
  consts_.clear();
  charts_.clear();
}

}  // namespace isodiff
