#pragma once

#include <cstdint>
#include <vector>

#include "graph.hpp"
#include "tensor.hpp"

namespace isodiff {

// Fully-connected network. Hidden layers share one activation; the output
// layer is always linear. Parameters are immutable values; training code
// replaces them wholesale via the optimizer.
struct Mlp {
  std::vector<std::size_t> layer_dims;  // [d0, d1, ..., dL]
  std::vector<Tensor> weights;          // L matrices, d_{k+1} x d_k
  std::vector<Tensor> biases;           // L vectors, d_{k+1}
  Activation hidden_act = Activation::tanh;

  std::size_t in_dim() const { return layer_dims.front(); }
  std::size_t out_dim() const { return layer_dims.back(); }
  std::size_t num_layers() const { return weights.size(); }
  bool is_hidden(std::size_t layer) const { return layer + 1 < num_layers(); }
};

// Weights ~ N(0, 1/fan_in), biases zero, fully determined by seed.
Mlp mlp_init(std::uint64_t seed, const std::vector<std::size_t>& layer_dims,
             Activation hidden_act);

Tensor mlp_forward(const Mlp& m, const Tensor& x);
// Forward-mode directional derivative J(x) v (tangent propagation, exact).
Tensor mlp_jvp(const Mlp& m, const Tensor& x, const Tensor& v);
// Reverse-mode adjoint J(x)^T u.
Tensor mlp_vjp(const Mlp& m, const Tensor& x, const Tensor& u);
// Dense d_L x d_0 Jacobian, assembled column-wise from JVPs.
Tensor full_jacobian(const Mlp& m, const Tensor& x);

struct MlpGrads {
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;

  static MlpGrads zeros_like(const Mlp& m);
  void add(const MlpGrads& other, double k = 1.0);
  void scale(double k);
};

// Exact reverse-mode gradients of <upstream, forward(x)> w.r.t. all
// parameters.
MlpGrads param_grads(const Mlp& m, const Tensor& x, const Tensor& upstream);

// --- tape bindings -------------------------------------------------------
//
// Losses are built by recording the network on a Graph. The same parameter
// leaves are shared by every sample in a batch and by the primal, tangent,
// and adjoint streams, so one backward() yields total parameter gradients.

struct MlpVars {
  std::vector<Graph::Id> weights;
  std::vector<Graph::Id> biases;
};

MlpVars bind_params(Graph& g, const Mlp& m);

// Per-input record of pre-activation nodes; activation-derivative nodes are
// created on demand and shared between tangent and adjoint streams.
struct MlpTrace {
  std::vector<Graph::Id> pre_acts;   // z_k per layer
  std::vector<Graph::Id> act_grads;  // phi'(z_k) nodes, -1 until needed
  Graph::Id output = -1;
};

Graph::Id forward_on_graph(Graph& g, const Mlp& m, const MlpVars& vars, Graph::Id x,
                           MlpTrace* trace = nullptr);
// Tangent stream seeded with node v; requires the trace of forward_on_graph.
Graph::Id jvp_on_graph(Graph& g, const Mlp& m, const MlpVars& vars, MlpTrace& trace,
                       Graph::Id v);
// Adjoint stream seeded with node u (may itself depend on parameters).
Graph::Id vjp_on_graph(Graph& g, const Mlp& m, const MlpVars& vars, MlpTrace& trace,
                       Graph::Id u);

MlpGrads collect_grads(const Graph& g, const Mlp& m, const MlpVars& vars);

}  // namespace isodiff
