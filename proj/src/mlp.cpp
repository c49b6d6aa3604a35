#include "mlp.hpp"

#include <cmath>
#include <string>

#include "rng.hpp"

namespace isodiff {

Mlp mlp_init(std::uint64_t seed, const std::vector<std::size_t>& layer_dims,
             Activation hidden_act) {
  if (layer_dims.size() < 2) {
    throw ConfigError("mlp_init: need at least input and output dims");
  }
  for (std::size_t d : layer_dims) {
    if (d < 1) throw ConfigError("mlp_init: layer dims must be >= 1");
  }
  Mlp m;
  m.layer_dims = layer_dims;
  m.hidden_act = hidden_act;
  RngStream rng(seed);
  for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
    const std::size_t fan_in = layer_dims[k], fan_out = layer_dims[k + 1];
    Tensor w({fan_out, fan_in});
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = s * rng.normal();
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(std::vector<std::size_t>{fan_out});
  }
  return m;
}

Tensor mlp_forward(const Mlp& m, const Tensor& x) {
  require_vector(x, m.in_dim(), "mlp_forward");
  Tensor a = x;
  for (std::size_t k = 0; k < m.num_layers(); ++k) {
    Tensor z = matvec(m.weights[k], a);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += m.biases[k][i];
    if (m.is_hidden(k)) {
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = act_value(m.hidden_act, z[i]);
    }
    a = std::move(z);
  }
  return a;
}

Tensor mlp_jvp(const Mlp& m, const Tensor& x, const Tensor& v) {
  require_vector(x, m.in_dim(), "mlp_jvp");
  require_same_shape(x, v, "mlp_jvp");
  Tensor a = x, t = v;
  for (std::size_t k = 0; k < m.num_layers(); ++k) {
    Tensor z = matvec(m.weights[k], a);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += m.biases[k][i];
    Tensor s = matvec(m.weights[k], t);
    if (m.is_hidden(k)) {
      Tensor act(z.shape());
      for (std::size_t i = 0; i < z.size(); ++i) {
        act[i] = act_value(m.hidden_act, z[i]);
        s[i] *= act_deriv(m.hidden_act, z[i]);
      }
      a = std::move(act);
    } else {
      a = std::move(z);
    }
    t = std::move(s);
  }
  return t;
}

Tensor mlp_vjp(const Mlp& m, const Tensor& x, const Tensor& u) {
  require_vector(x, m.in_dim(), "mlp_vjp");
  require_vector(u, m.out_dim(), "mlp_vjp");
  // Forward pass storing pre-activations.
  std::vector<Tensor> pre;
  pre.reserve(m.num_layers());
  Tensor a = x;
  for (std::size_t k = 0; k < m.num_layers(); ++k) {
    Tensor z = matvec(m.weights[k], a);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += m.biases[k][i];
    pre.push_back(z);
    if (m.is_hidden(k)) {
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = act_value(m.hidden_act, z[i]);
    }
    a = std::move(z);
  }
  // Reverse sweep.
  Tensor w = u;
  for (std::size_t k = m.num_layers(); k-- > 0;) {
    if (m.is_hidden(k)) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] *= act_deriv(m.hidden_act, pre[k][i]);
      }
    }
    w = matvec_t(m.weights[k], w);
  }
  return w;
}

Tensor full_jacobian(const Mlp& m, const Tensor& x) {
  const std::size_t d0 = m.in_dim(), dl = m.out_dim();
  if (d0 * dl > 10'000'000) {
    throw CapacityError("full_jacobian: dense Jacobian exceeds the desk-scale guard");
  }
  Tensor jac({dl, d0});
  Tensor e({d0});
  for (std::size_t c = 0; c < d0; ++c) {
    e.fill(0.0);
    e[c] = 1.0;
    Tensor col = mlp_jvp(m, x, e);
    for (std::size_t r = 0; r < dl; ++r) jac.at(r, c) = col[r];
  }
  return jac;
}

MlpGrads MlpGrads::zeros_like(const Mlp& m) {
  MlpGrads g;
  for (const Tensor& w : m.weights) g.weights.emplace_back(w.shape());
  for (const Tensor& b : m.biases) g.biases.emplace_back(b.shape());
  return g;
}

void MlpGrads::add(const MlpGrads& other, double k) {
  for (std::size_t i = 0; i < weights.size(); ++i) axpy(k, other.weights[i], weights[i]);
  for (std::size_t i = 0; i < biases.size(); ++i) axpy(k, other.biases[i], biases[i]);
}

void MlpGrads::scale(double k) {
  for (Tensor& w : weights)
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= k;
  for (Tensor& b : biases)
    for (std::size_t i = 0; i < b.size(); ++i) b[i] *= k;
}

MlpGrads param_grads(const Mlp& m, const Tensor& x, const Tensor& upstream) {
  require_vector(upstream, m.out_dim(), "param_grads");
  Graph g;
  MlpVars vars = bind_params(g, m);
  Graph::Id xin = g.constant(x);
  Graph::Id out = forward_on_graph(g, m, vars, xin);
  Graph::Id loss = g.dot(out, g.constant(upstream));
  g.backward(loss);
  return collect_grads(g, m, vars);
}

MlpVars bind_params(Graph& g, const Mlp& m) {
  MlpVars vars;
  for (const Tensor& w : m.weights) vars.weights.push_back(g.leaf(w, true));
  for (const Tensor& b : m.biases) vars.biases.push_back(g.leaf(b, true));
  return vars;
}

Graph::Id forward_on_graph(Graph& g, const Mlp& m, const MlpVars& vars, Graph::Id x,
                           MlpTrace* trace) {
  if (trace) {
    trace->pre_acts.assign(m.num_layers(), -1);
    trace->act_grads.assign(m.num_layers(), -1);
  }
  Graph::Id a = x;
  for (std::size_t k = 0; k < m.num_layers(); ++k) {
    Graph::Id z = g.affine(vars.weights[k], a, vars.biases[k]);
    if (trace) trace->pre_acts[k] = z;
    a = m.is_hidden(k) ? g.activation(z, m.hidden_act) : z;
  }
  if (trace) trace->output = a;
  return a;
}

namespace {

Graph::Id act_grad_node(Graph& g, const Mlp& m, MlpTrace& trace, std::size_t k) {
  if (trace.act_grads[k] < 0) {
    trace.act_grads[k] = g.activation_grad(trace.pre_acts[k], m.hidden_act);
  }
  return trace.act_grads[k];
}

}  // namespace

Graph::Id jvp_on_graph(Graph& g, const Mlp& m, const MlpVars& vars, MlpTrace& trace,
                       Graph::Id v) {
  Graph::Id t = v;
  for (std::size_t k = 0; k < m.num_layers(); ++k) {
    t = g.matvec(vars.weights[k], t);
    if (m.is_hidden(k)) t = g.mul(act_grad_node(g, m, trace, k), t);
  }
  return t;
}

Graph::Id vjp_on_graph(Graph& g, const Mlp& m, const MlpVars& vars, MlpTrace& trace,
                       Graph::Id u) {
  Graph::Id w = u;
  for (std::size_t k = m.num_layers(); k-- > 0;) {
    if (m.is_hidden(k)) w = g.mul(act_grad_node(g, m, trace, k), w);
    w = g.matvec_t(vars.weights[k], w);
  }
  return w;
}

MlpGrads collect_grads(const Graph& g, const Mlp& m, const MlpVars& vars) {
  MlpGrads out;
  for (std::size_t k = 0; k < m.num_layers(); ++k) {
    out.weights.push_back(g.gradient(vars.weights[k]));
    out.biases.push_back(g.gradient(vars.biases[k]));
  }
  return out;
}

}  // namespace isodiff
