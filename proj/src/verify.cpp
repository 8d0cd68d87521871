#include "verify.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "optim.hpp"

namespace ffattn {

double central_difference(const std::function<double(double)>& f, double x, double h) {
  if (!(h > 0.0)) throw UsageError("central_difference: h must be > 0");
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

namespace {

// Naive per-sequence forward + loss, written independently of forward()
// and templated on the scalar type. The extended-precision instantiation
// keeps the cancellation noise of (L+ - L-) well below the 1e-5 gate even
// for coordinates whose gradient is ~1e-8.
template <class Real>
Real loss_naive(const ModelParams& p, const SequenceBatch& batch) {
  const int b_n = batch.batch;
  const int t_n = batch.t_len;
  const int d_n = p.dim;
  const auto leaky = [](Real u) { return u > Real(0) ? u : Real(0.01) * u; };
  Real total = 0;
  std::vector<std::vector<Real>> h(t_n, std::vector<Real>(d_n));
  std::vector<Real> alpha(t_n), e(t_n), c(d_n), s(d_n);
  for (int b = 0; b < b_n; ++b) {
    for (int t = 0; t < t_n; ++t) {
      const double* x = batch.step(b, t);
      for (int d = 0; d < d_n; ++d) {
        h[t][d] = leaky(Real(p.w_xh(d, 0)) * Real(x[0]) + Real(p.w_xh(d, 1)) * Real(x[1]) +
                        Real(p.b_xh[d]));
      }
    }
    if (p.pooling == Pooling::kAttention) {
      Real denom = 0;
      for (int t = 0; t < t_n; ++t) {
        Real z = Real(p.b_hc);
        for (int d = 0; d < d_n; ++d) z += Real(p.w_hc(0, d)) * h[t][d];
        e[t] = std::tanh(z);  // |e| <= 1, plain softmax cannot overflow
        alpha[t] = std::exp(e[t]);
        denom += alpha[t];
      }
      for (int t = 0; t < t_n; ++t) alpha[t] /= denom;
    } else {
      for (int t = 0; t < t_n; ++t) alpha[t] = Real(1) / Real(t_n);
    }
    for (int d = 0; d < d_n; ++d) c[d] = 0;
    for (int t = 0; t < t_n; ++t) {
      for (int d = 0; d < d_n; ++d) c[d] += alpha[t] * h[t][d];
    }
    for (int i = 0; i < d_n; ++i) {
      Real u = Real(p.b_cs[i]);
      for (int k = 0; k < d_n; ++k) u += Real(p.w_cs(i, k)) * c[k];
      s[i] = leaky(u);
    }
    Real u = Real(p.b_sy);
    for (int d = 0; d < d_n; ++d) u += Real(p.w_sy(0, d)) * s[d];
    const Real diff = leaky(u) - Real(batch.targets[b]);
    total += diff * diff;
  }
  return total / Real(b_n);
}

}  // namespace

Gradients finite_difference_gradient(const ModelParams& params, const SequenceBatch& batch,
                                     double h) {
  if (!(h > 0.0)) throw UsageError("finite_difference_gradient: h must be > 0");
  ModelParams probe = params;
  Gradients grads(params.dim);
  auto p_views = tensor_views(probe);
  auto g_views = tensor_views(grads);
  for (std::size_t ti = 0; ti < p_views.size(); ++ti) {
    for (std::size_t j = 0; j < p_views[ti].size; ++j) {
      double* slot = p_views[ti].data + j;
      const double saved = *slot;
      *slot = saved + h;
      const long double x_plus = *slot;
      const long double loss_plus = loss_naive<long double>(probe, batch);
      *slot = saved - h;
      const long double x_minus = *slot;
      const long double loss_minus = loss_naive<long double>(probe, batch);
      *slot = saved;
      // exact denominator: the perturbed values as actually stored
      g_views[ti].data[j] = static_cast<double>((loss_plus - loss_minus) / (x_plus - x_minus));
    }
  }
  return grads;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

namespace {

void merge_report(GradCheckReport& total, const ModelParams& params, const SequenceBatch& batch,
                  double h) {
  const auto analytic = backward(params, batch, forward(params, batch));
  const auto numeric = finite_difference_gradient(params, batch, h);
  auto a_views = tensor_views(analytic);
  auto n_views = tensor_views(numeric);
  if (total.per_tensor.empty()) {
    for (const auto& v : a_views) total.per_tensor.push_back({v.name, 0.0, 0});
  }
  for (std::size_t ti = 0; ti < a_views.size(); ++ti) {
    for (std::size_t j = 0; j < a_views[ti].size; ++j) {
      const double err = relative_error(a_views[ti].data[j], n_views[ti].data[j]);
      if (err > total.per_tensor[ti].max_rel_error) {
        total.per_tensor[ti].max_rel_error = err;
        total.per_tensor[ti].worst_index = j;
      }
      if (err > total.max_rel_error) {
        total.max_rel_error = err;
        total.worst_tensor = a_views[ti].name;
        total.worst_index = j;
      }
    }
  }
  total.configs_checked += 1;
}

}  // namespace

GradCheckReport check_gradients(const ModelParams& params, const SequenceBatch& batch, double h,
                                double tolerance) {
  GradCheckReport report;
  report.tolerance = tolerance;
  merge_report(report, params, batch, h);
  report.pass = report.max_rel_error < tolerance;
  return report;
}

GradCheckReport run_gradcheck_suite(std::uint64_t seed, int n_configs, double h,
                                    double tolerance) {
  if (n_configs < 1) throw UsageError("gradcheck suite: need at least one configuration");
  static constexpr int kDims[] = {1, 3, 10};
  static constexpr int kLens[] = {1, 2, 17};
  static constexpr int kBatches[] = {1, 4};

  GradCheckReport report;
  report.tolerance = tolerance;
  Rng rng(seed, streams::probe(0));
  for (int i = 0; i < n_configs; ++i) {
    const int dim = kDims[rng.uniform_int(3)];
    const int t_len = kLens[rng.uniform_int(3)];
    const int batch_n = kBatches[rng.uniform_int(2)];
    const auto kind = rng.uniform_int(2) == 0 ? TaskKind::kAddition : TaskKind::kMultiplication;
    const auto pooling = i % 2 == 0 ? Pooling::kAttention : Pooling::kUnweightedMean;
    const std::uint64_t config_seed = rng.next_u64();

    ModelParams params = init_params(dim, pooling, config_seed);
    SequenceBatch batch;
    if (t_len >= 2) {
      batch = generate_batch(kind, LengthSpec::range(t_len, t_len), batch_n, config_seed, i);
    } else {
      // T=1 cannot carry two markers; probe with plain random steps
      batch = SequenceBatch(batch_n, 1);
      Rng data_rng(config_seed, streams::probe(1));
      for (int b = 0; b < batch_n; ++b) {
        batch.step(b, 0)[0] = data_rng.uniform(-1.0, 1.0);
        batch.step(b, 0)[1] = data_rng.uniform_int(2) == 0 ? 0.0 : 1.0;
        batch.targets[b] = data_rng.uniform();
      }
    }
    merge_report(report, params, batch, h);
  }
  report.pass = report.max_rel_error < tolerance;
  return report;
}

bool check_permutation_invariance(const ModelParams& params, const TaskInstance& instance,
                                  int trials, std::uint64_t seed, double tol) {
  if (instance.t_len < 1) throw UsageError("permutation check: empty instance");
  if (instance.t_len == 1) return true;
  const int t_n = instance.t_len;

  const double y0 = forward(params, batch_from_instance(instance)).y[0];
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(seed, streams::probe(static_cast<std::uint64_t>(trial) + 16));
    std::vector<int> perm(t_n);
    for (int t = 0; t < t_n; ++t) perm[t] = t;
    for (int t = t_n - 1; t > 0; --t) {
      std::swap(perm[t], perm[rng.uniform_int(static_cast<std::uint64_t>(t) + 1)]);
    }
    TaskInstance shuffled = instance;
    for (int t = 0; t < t_n; ++t) {
      shuffled.inputs(t, 0) = instance.inputs(perm[t], 0);
      shuffled.inputs(t, 1) = instance.inputs(perm[t], 1);
    }
    const double y = forward(params, batch_from_instance(shuffled)).y[0];
    if (std::abs(y - y0) > tol) return false;
  }

  const auto probe = order_probe(t_n);
  SequenceBatch xy(1, t_n), yx(1, t_n);
  xy.inputs = probe.xy;
  yx.inputs = probe.yx;
  return std::abs(forward(params, xy).y[0] - forward(params, yx).y[0]) <= tol;
}

bool check_pooling_equivalence(int dim, const SequenceBatch& batch, std::uint64_t seed,
                               double tol) {
  ModelParams attention = init_params(dim, Pooling::kAttention, seed);
  attention.w_hc.fill(0.0);
  Rng rng(seed, streams::probe(2));
  attention.b_hc = rng.uniform(-1.0, 1.0);

  ModelParams mean = attention;
  mean.pooling = Pooling::kUnweightedMean;

  const auto y_att = forward(attention, batch).y;
  const auto y_mean = forward(mean, batch).y;
  for (std::size_t b = 0; b < y_att.size(); ++b) {
    if (std::abs(y_att[b] - y_mean[b]) > tol) return false;
  }
  return true;
}

}  // namespace ffattn
