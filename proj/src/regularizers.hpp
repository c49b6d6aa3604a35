#pragma once

#include <memory>
#include <vector>

#include "diffusion.hpp"
#include "geometry.hpp"
#include "graph.hpp"
#include "mlp.hpp"
#include "rng.hpp"

namespace isodiff {

enum class IsoMetric { euclidean, sphere };
enum class IsoMode { exact, stochastic };
enum class ProbeDist { gaussian, rademacher };

struct IsoConfig {
  double lambda_iso = 1e-4;
  double gamma = 0.5;       // skip ratio: the loss applies only for t > gamma*T
  int num_probes = 1;
  IsoMode mode = IsoMode::stochastic;
  IsoMetric metric = IsoMetric::sphere;
  ProbeDist probes = ProbeDist::gaussian;

  void validate() const;
};

// Differential of a map at a point: everything the isometry algebra needs.
// Concrete implementations wrap real encoders; tests use synthetic stubs
// whose Jacobians are chosen by hand.
class DiffMap {
 public:
  virtual ~DiffMap() = default;
  virtual std::size_t in_dim() const = 0;
  virtual std::size_t out_dim() const = 0;
  virtual Tensor jvp(const Tensor& z, const Tensor& v) const = 0;
  virtual Tensor vjp(const Tensor& z, const Tensor& u) const = 0;
};

// f(z) = encoder([unproject(z); tail]) — the encoder seen through the
// stereographic chart, with a constant conditioning tail.
class ChartEncoderMap : public DiffMap {
 public:
  ChartEncoderMap(const Mlp& encoder, SphereChart chart, Tensor tail);
  std::size_t in_dim() const override { return chart_.n - 1; }
  std::size_t out_dim() const override { return encoder_->out_dim(); }
  Tensor jvp(const Tensor& z, const Tensor& v) const override;
  Tensor vjp(const Tensor& z, const Tensor& u) const override;
  const SphereChart& chart() const { return chart_; }

 private:
  Tensor input_at(const Tensor& z) const;
  const Mlp* encoder_;
  SphereChart chart_;
  Tensor tail_;
};

// f(x) = encoder([x; tail]) in ambient coordinates.
class AmbientEncoderMap : public DiffMap {
 public:
  AmbientEncoderMap(const Mlp& encoder, std::size_t x_dim, Tensor tail);
  std::size_t in_dim() const override { return x_dim_; }
  std::size_t out_dim() const override { return encoder_->out_dim(); }
  Tensor jvp(const Tensor& x, const Tensor& v) const override;
  Tensor vjp(const Tensor& x, const Tensor& u) const override;

 private:
  const Mlp* encoder_;
  std::size_t x_dim_;
  Tensor tail_;
};

// Dense out_dim x in_dim Jacobian of f at z.
Tensor dense_jacobian(const DiffMap& f, const Tensor& z);

// R(z) = J_f^T J_f / g, the scaled-isometry defect matrix (H = I, G = g I).
Tensor riso_exact(const DiffMap& f, const Tensor& z, double g_scalar);

// One evaluation point of the isometry loss: chart coordinates plus the
// conformal metric scalar (g = 1 in euclidean mode).
struct IsoPoint {
  Tensor z;
  double g = 1.0;
};

// L_iso = E[Tr(R^2)] / E[Tr(R)]^2, exact traces (test oracle and reference).
double iso_loss_exact(const DiffMap& f, const std::vector<IsoPoint>& pts);

// Hutchinson form of the same ratio: per probe v, v^T R v = |J_f v|^2 / g
// and v^T R^2 v = |sqrt(G^-1) J_f^T J_f sqrt(G^-1) v|^2, both via one JVP
// and one VJP per probe. Expectations are pooled over samples x probes
// before the ratio is taken.
double iso_loss_stochastic(const DiffMap& f, const std::vector<IsoPoint>& pts,
                           int num_probes, ProbeDist dist, RngStream& rng);

// --- differentiable (training) path --------------------------------------

struct IsoGraphSample {
  Tensor input;        // encoder input at the evaluation point: [x; tail]
  std::size_t x_dim;   // leading input entries that belong to x
  bool sphere = false; // chart-metric mode
  SphereChart chart;   // valid when sphere
  Tensor z;            // chart coordinates, when sphere
  double g = 1.0;      // metric scalar (1 in euclidean mode)
};

// Records the pooled stochastic iso loss on the tape and returns the scalar
// node. Throws NumericError when the pooled Tr(R) estimate collapses below
// the division guard (dead encoder).
Graph::Id iso_loss_on_graph(Graph& g, const Mlp& encoder, const MlpVars& vars,
                            const std::vector<IsoGraphSample>& samples,
                            int num_probes, ProbeDist dist, RngStream& rng);

// Convenience wrapper: scalar + encoder gradients for a batch of ambient
// points x_t (sphere metric goes through project/unproject at radius r).
struct IsoLossResult {
  double loss = 0.0;
  MlpGrads grads;
};
IsoLossResult iso_loss(const Mlp& encoder, const std::vector<IsoGraphSample>& samples,
                       int num_probes, ProbeDist dist, RngStream& rng);

// --- path length regularizer ---------------------------------------------

struct PathLenState {
  double a = 0.0;      // EMA of |J^T y|
  double decay = 0.99;
};

struct PathLenResult {
  double loss = 0.0;
  MlpGrads grads;
};

// L_pl = E[(|J_x^T y| - a)^2] with y ~ N(0, I_m); J is taken w.r.t. the
// leading x_dim input entries. Updates state.a with the batch mean after
// the loss is formed (no gradient flows through a).
PathLenResult path_length_reg(const Mlp& f, const std::vector<Tensor>& inputs,
                              std::size_t x_dim, PathLenState& state,
                              RngStream& rng);

Graph::Id path_length_on_graph(Graph& g, const Mlp& f, const MlpVars& vars,
                               const std::vector<Tensor>& inputs, std::size_t x_dim,
                               double a, RngStream& rng,
                               std::vector<double>* norms_out);

// --- total training loss ---------------------------------------------------

struct TotalLossResult {
  double total = 0.0;
  double dsm = 0.0;
  double iso = 0.0;     // value of L_iso over the gated rows (0 when inactive)
  bool iso_active = false;
  MlpGrads enc_grads;
  MlpGrads dec_grads;
};

// L = L_dsm + lambda_iso * 1[t > gamma*T] * L_iso(encoder). Rows failing the
// gate contribute nothing to the isometry term, its gradient, or the probe
// stream.
TotalLossResult total_loss(const ScoreNet& net, const Batch& batch,
                           const NoiseSchedule& sched, const IsoConfig& cfg,
                           RngStream& probe_rng);

}  // namespace isodiff
