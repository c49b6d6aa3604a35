#include "optim.hpp"

#include <cmath>

namespace isodiff {

AdamState adam_init(const std::vector<const Tensor*>& params, AdamConfig cfg) {
  AdamState st;
  st.cfg = cfg;
  for (const Tensor* p : params) {
    st.m.emplace_back(p->shape());
    st.v.emplace_back(p->shape());
  }
  return st;
}

void adam_step(const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeError("adam_step: parameter/gradient/state count mismatch");
  }
  state.step += 1;
  const double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    require_same_shape(p, g, "adam_step");
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
    }
  }
}

void ParamEma::init(const std::vector<const Tensor*>& params) {
  shadow.clear();
  for (const Tensor* p : params) shadow.push_back(*p);
}

void ParamEma::update(const std::vector<const Tensor*>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& p = *params[i];
    Tensor& s = shadow[i];
    for (std::size_t j = 0; j < s.size(); ++j) {
      s[j] = decay * s[j] + (1.0 - decay) * p[j];
    }
  }
}

}  // namespace isodiff
