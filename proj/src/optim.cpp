#include "optim.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace ffattn {

ModelParams init_params(int dim, Pooling pooling, std::uint64_t seed) {
  if (dim < 1) throw UsageError("init_params: dim must be >= 1");
  ModelParams p(dim, pooling);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));

  // tensor lanes follow the tensor_views order; biases keep their lane
  // reserved even though they draw nothing
  Rng r_xh(seed, streams::param_tensor(0));
  p.w_xh = gaussian_matrix(r_xh, dim, 2, 1.0 / std::sqrt(2.0));
  Rng r_hc(seed, streams::param_tensor(2));
  p.w_hc = gaussian_matrix(r_hc, 1, dim, inv_sqrt_d);
  Rng r_cs(seed, streams::param_tensor(4));
  p.w_cs = gaussian_matrix(r_cs, dim, dim, inv_sqrt_d);
  Rng r_sy(seed, streams::param_tensor(6));
  p.w_sy = gaussian_matrix(r_sy, 1, dim, inv_sqrt_d);
  return p;
}

AdamState::AdamState(int dim, double lr_) : m(dim), v(dim), lr(lr_) {
  if (!(lr_ > 0.0)) throw UsageError("adam: learning rate must be > 0");
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state) {
  auto p_views = tensor_views(params);
  auto g_views = tensor_views(grads);
  auto m_views = tensor_views(state.m);
  auto v_views = tensor_views(state.v);
  for (std::size_t i = 0; i < p_views.size(); ++i) {
    if (p_views[i].size != g_views[i].size || p_views[i].size != m_views[i].size) {
      throw ShapeError(std::string("adam_step: shape mismatch on ") + p_views[i].name);
    }
  }

  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));

  for (std::size_t i = 0; i < p_views.size(); ++i) {
    double* theta = p_views[i].data;
    const double* g = g_views[i].data;
    double* m = m_views[i].data;
    double* v = v_views[i].data;
    for (std::size_t j = 0; j < p_views[i].size; ++j) {
      if (!std::isfinite(g[j])) {
        throw NumericError(std::string("adam_step: non-finite gradient in ") + p_views[i].name);
      }
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      theta[j] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace ffattn
