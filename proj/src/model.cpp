#include "model.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace ffattn {

namespace {

std::string shape_str(int r, int c) {
  return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
}

void check_params_shapes(const ModelParams& p) {
  const int d = p.dim;
  if (d < 1) throw ShapeError("model dim must be positive");
  auto bad = [&](const char* name, const Matrix& m, int r, int c) {
    if (m.rows() != r || m.cols() != c) {
      throw ShapeError(std::string(name) + " has shape " + shape_str(m.rows(), m.cols()) +
                       ", expected " + shape_str(r, c));
    }
  };
  bad("W_xh", p.w_xh, d, 2);
  bad("W_hc", p.w_hc, 1, d);
  bad("W_cs", p.w_cs, d, d);
  bad("W_sy", p.w_sy, 1, d);
  if (static_cast<int>(p.b_xh.size()) != d || static_cast<int>(p.b_cs.size()) != d) {
    throw ShapeError("bias vectors must have length D=" + std::to_string(d));
  }
}

void check_batch_shapes(const ModelParams& p, const SequenceBatch& batch) {
  if (batch.batch < 1 || batch.t_len < 1) {
    throw ShapeError("batch must contain at least one sequence of length >= 1");
  }
  if (batch.inputs.cols() != 2) {
    throw ShapeError("batch inputs have " + std::to_string(batch.inputs.cols()) +
                     " channels, model expects 2");
  }
  if (batch.inputs.rows() != batch.batch * batch.t_len) {
    throw ShapeError("batch inputs have shape " +
                     shape_str(batch.inputs.rows(), batch.inputs.cols()) + ", expected " +
                     shape_str(batch.batch * batch.t_len, 2));
  }
  if (batch.targets.size() != static_cast<std::size_t>(batch.batch)) {
    throw ShapeError("batch has " + std::to_string(batch.targets.size()) + " targets for " +
                     std::to_string(batch.batch) + " sequences");
  }
  check_params_shapes(p);
}

}  // namespace

ModelParams::ModelParams(int dim_, Pooling pooling_)
    : dim(dim_),
      pooling(pooling_),
      w_xh(dim_, 2),
      b_xh(dim_, 0.0),
      w_hc(1, dim_),
      w_cs(dim_, dim_),
      b_cs(dim_, 0.0),
      w_sy(1, dim_) {
  if (dim_ < 1) throw UsageError("model dim must be positive");
}

Gradients::Gradients(int dim)
    : w_xh(dim, 2), b_xh(dim, 0.0), w_hc(1, dim), w_cs(dim, dim), b_cs(dim, 0.0), w_sy(1, dim) {}

SequenceBatch::SequenceBatch(int batch_, int t_len_)
    : batch(batch_), t_len(t_len_), inputs(batch_ * t_len_, 2), targets(batch_, 0.0) {}

namespace {

template <class P, class View>
std::vector<View> views_impl(P& p) {
  return {
      {"W_xh", p.w_xh.data().data(), p.w_xh.size()},
      {"b_xh", p.b_xh.data(), p.b_xh.size()},
      {"W_hc", p.w_hc.data().data(), p.w_hc.size()},
      {"b_hc", &p.b_hc, 1},
      {"W_cs", p.w_cs.data().data(), p.w_cs.size()},
      {"b_cs", p.b_cs.data(), p.b_cs.size()},
      {"W_sy", p.w_sy.data().data(), p.w_sy.size()},
      {"b_sy", &p.b_sy, 1},
  };
}

}  // namespace

std::vector<TensorView> tensor_views(ModelParams& p) { return views_impl<ModelParams, TensorView>(p); }
std::vector<ConstTensorView> tensor_views(const ModelParams& p) {
  return views_impl<const ModelParams, ConstTensorView>(p);
}
std::vector<TensorView> tensor_views(Gradients& g) { return views_impl<Gradients, TensorView>(g); }
std::vector<ConstTensorView> tensor_views(const Gradients& g) {
  return views_impl<const Gradients, ConstTensorView>(g);
}

std::uint64_t params_fingerprint(const ModelParams& p) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a over raw bit patterns
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<std::uint64_t>(p.dim));
  mix(static_cast<std::uint64_t>(p.pooling));
  for (const auto& tv : tensor_views(p)) {
    for (std::size_t i = 0; i < tv.size; ++i) mix(std::bit_cast<std::uint64_t>(tv.data[i]));
  }
  return h;
}

ForwardCache forward(const ModelParams& params, const SequenceBatch& batch, ThreadPool* pool) {
  check_batch_shapes(params, batch);
  const int b_n = batch.batch;
  const int t_n = batch.t_len;
  const int d_n = params.dim;

  ForwardCache cache;
  cache.batch = b_n;
  cache.t_len = t_n;
  cache.dim = d_n;
  cache.pooling = params.pooling;
  cache.params_fingerprint = params_fingerprint(params);
  cache.h = Matrix(b_n * t_n, d_n);
  cache.e = Matrix(b_n, t_n);
  cache.alpha = Matrix(b_n, t_n);
  cache.c = Matrix(b_n, d_n);
  cache.s = Matrix(b_n, d_n);
  cache.y.assign(b_n, 0.0);

  // h_t = LReLU(W_xh x_t + b_xh), independently per (b, t). W_xh is split
  // into its two contiguous columns so the d-loop vectorizes.
  std::vector<double> w_col0(d_n), w_col1(d_n);
  for (int d = 0; d < d_n; ++d) {
    w_col0[d] = params.w_xh(d, 0);
    w_col1[d] = params.w_xh(d, 1);
  }
  // the attention score is computed in the same pass, while h is still hot
  const bool attention = params.pooling == Pooling::kAttention;
  parallel_for(pool, static_cast<std::int64_t>(b_n) * t_n, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t r = begin; r < end; ++r) {
      const double* x = batch.inputs.row(static_cast<int>(r));
      double* h = cache.h.row(static_cast<int>(r));
      const double x0 = x[0];
      const double x1 = x[1];
      for (int d = 0; d < d_n; ++d) {
        const double u = w_col0[d] * x0 + w_col1[d] * x1 + params.b_xh[d];
        h[d] = u > 0.0 ? u : 0.01 * u;
      }
      if (attention) {
        cache.e.data()[static_cast<std::size_t>(r)] =
            std::tanh(params.b_hc + dot(params.w_hc.row(0), h, d_n));
      }
    }
  });

  // pooling: c_b = sum_t alpha_bt h_bt, reductions over t ascending
  parallel_for(pool, b_n, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t b = begin; b < end; ++b) {
      const int bi = static_cast<int>(b);
      double* c = cache.c.row(bi);
      double* alpha = cache.alpha.row(bi);
      if (params.pooling == Pooling::kAttention) {
        const double* e = cache.e.row(bi);
        softmax({e, static_cast<std::size_t>(t_n)}, {alpha, static_cast<std::size_t>(t_n)});
      } else {
        const double inv_t = 1.0 / t_n;
        for (int t = 0; t < t_n; ++t) alpha[t] = inv_t;
      }
      if (params.pooling == Pooling::kAttention) {
        for (int t = 0; t < t_n; ++t) {
          const double* h = cache.h.row(bi * t_n + t);
          const double a = alpha[t];
          for (int d = 0; d < d_n; ++d) c[d] += a * h[d];
        }
      } else {
        for (int t = 0; t < t_n; ++t) {
          const double* h = cache.h.row(bi * t_n + t);
          for (int d = 0; d < d_n; ++d) c[d] += h[d];
        }
        const double inv_t = 1.0 / t_n;
        for (int d = 0; d < d_n; ++d) c[d] *= inv_t;
      }
    }
  });

  // s = LReLU(W_cs c + b_cs), y = LReLU(W_sy s + b_sy)
  parallel_for(pool, b_n, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t b = begin; b < end; ++b) {
      const int bi = static_cast<int>(b);
      const double* c = cache.c.row(bi);
      double* s = cache.s.row(bi);
      for (int i = 0; i < d_n; ++i) {
        s[i] = lrelu(params.b_cs[i] + dot(params.w_cs.row(i), c, d_n));
      }
      cache.y[bi] = lrelu(params.b_sy + dot(params.w_sy.row(0), s, d_n));
    }
  });

  return cache;
}

double loss(const ForwardCache& cache, std::span<const double> targets) {
  if (targets.size() != cache.y.size()) {
    throw ShapeError("loss: " + std::to_string(cache.y.size()) + " outputs vs " +
                     std::to_string(targets.size()) + " targets");
  }
  double sum = 0.0;
  for (std::size_t b = 0; b < targets.size(); ++b) {
    const double d = cache.y[b] - targets[b];
    sum += d * d;
  }
  return sum / static_cast<double>(targets.size());
}

Gradients backward(const ModelParams& params, const SequenceBatch& batch,
                   const ForwardCache& cache, ThreadPool* pool) {
  check_batch_shapes(params, batch);
  const int b_n = batch.batch;
  const int t_n = batch.t_len;
  const int d_n = params.dim;
  if (cache.batch != b_n || cache.t_len != t_n || cache.dim != d_n ||
      cache.pooling != params.pooling ||
      cache.params_fingerprint != params_fingerprint(params)) {
    throw UsageError("backward: cache was not produced by forward on these params and batch");
  }

  Gradients grads(d_n);
  const double inv_b = 1.0 / b_n;

  // dL/dy through the output nonlinearity
  std::vector<double> g_y(b_n);
  for (int b = 0; b < b_n; ++b) {
    g_y[b] = 2.0 * (cache.y[b] - batch.targets[b]) * inv_b * lrelu_deriv(cache.y[b]);
  }

  // W_sy, b_sy and the pre-activation gradient of s
  Matrix g_us(b_n, d_n);
  parallel_for(pool, b_n, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t b = begin; b < end; ++b) {
      const int bi = static_cast<int>(b);
      const double* s = cache.s.row(bi);
      const double* w_sy = params.w_sy.row(0);
      double* gu = g_us.row(bi);
      for (int d = 0; d < d_n; ++d) {
        gu[d] = g_y[bi] * w_sy[d] * lrelu_deriv(s[d]);
      }
    }
  });
  {
    double* gw = grads.w_sy.row(0);
    for (int b = 0; b < b_n; ++b) {
      const double* s = cache.s.row(b);
      for (int d = 0; d < d_n; ++d) gw[d] += g_y[b] * s[d];
      grads.b_sy += g_y[b];
    }
  }

  // W_cs, b_cs and the context gradient
  parallel_for(pool, d_n, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      const int ii = static_cast<int>(i);
      double* gw = grads.w_cs.row(ii);
      double gb = 0.0;
      for (int b = 0; b < b_n; ++b) {
        const double g = g_us(b, ii);
        const double* c = cache.c.row(b);
        for (int k = 0; k < d_n; ++k) gw[k] += g * c[k];
        gb += g;
      }
      grads.b_cs[ii] = gb;
    }
  });
  Matrix g_c(b_n, d_n);
  parallel_for(pool, b_n, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t b = begin; b < end; ++b) {
      const int bi = static_cast<int>(b);
      double* gc = g_c.row(bi);
      const double* gu = g_us.row(bi);
      for (int i = 0; i < d_n; ++i) {
        const double g = gu[i];
        const double* w = params.w_cs.row(i);
        for (int k = 0; k < d_n; ++k) gc[k] += g * w[k];
      }
    }
  });

  // Pooling + input layer. Each sequence writes its own partial gradient
  // block; blocks are combined over b ascending afterwards so results do
  // not depend on the worker count. The W_xh partials are kept as two
  // contiguous columns so every d-loop below vectorizes.
  const int block = 4 * d_n + 1;  // [w_xh col0 | w_xh col1 | b_xh | w_hc | b_hc]
  std::vector<double> partials(static_cast<std::size_t>(b_n) * block, 0.0);
  parallel_for(pool, b_n, [&](std::int64_t begin, std::int64_t end) {
    std::vector<double> g_alpha(t_n);
    std::vector<double> g_uh(d_n);
    for (std::int64_t b = begin; b < end; ++b) {
      const int bi = static_cast<int>(b);
      double* part = partials.data() + static_cast<std::size_t>(bi) * block;
      double* pw_c0 = part;
      double* pw_c1 = part + d_n;
      double* pb_xh = part + 2 * d_n;
      double* pw_hc = part + 3 * d_n;
      double* pb_hc = part + 4 * d_n;  // one scalar
      const double* gc = g_c.row(bi);
      const double* alpha = cache.alpha.row(bi);

      if (params.pooling == Pooling::kAttention) {
        const double* e = cache.e.row(bi);
        double alpha_dot = 0.0;
        for (int t = 0; t < t_n; ++t) {
          g_alpha[t] = dot(gc, cache.h.row(bi * t_n + t), d_n);
          alpha_dot += alpha[t] * g_alpha[t];
        }
        const double* w_hc = params.w_hc.row(0);
        for (int t = 0; t < t_n; ++t) {
          const double* x = batch.step(bi, t);
          const double* h = cache.h.row(bi * t_n + t);
          const double a = alpha[t];
          const double g_e = a * (g_alpha[t] - alpha_dot);
          const double g_z = g_e * (1.0 - e[t] * e[t]);
          *pb_hc += g_z;
          for (int d = 0; d < d_n; ++d) {
            pw_hc[d] += g_z * h[d];
            const double g_h = a * gc[d] + g_z * w_hc[d];
            g_uh[d] = h[d] < 0.0 ? 0.01 * g_h : g_h;
          }
          const double x0 = x[0];
          const double x1 = x[1];
          for (int d = 0; d < d_n; ++d) {
            pw_c0[d] += g_uh[d] * x0;
            pw_c1[d] += g_uh[d] * x1;
            pb_xh[d] += g_uh[d];
          }
        }
      } else {
        const double inv_t = 1.0 / t_n;
        for (int t = 0; t < t_n; ++t) {
          const double* x = batch.step(bi, t);
          const double* h = cache.h.row(bi * t_n + t);
          for (int d = 0; d < d_n; ++d) {
            const double g_h = gc[d] * inv_t;
            g_uh[d] = h[d] < 0.0 ? 0.01 * g_h : g_h;
          }
          const double x0 = x[0];
          const double x1 = x[1];
          for (int d = 0; d < d_n; ++d) {
            pw_c0[d] += g_uh[d] * x0;
            pw_c1[d] += g_uh[d] * x1;
            pb_xh[d] += g_uh[d];
          }
        }
      }
    }
  });
  for (int b = 0; b < b_n; ++b) {
    const double* part = partials.data() + static_cast<std::size_t>(b) * block;
    for (int d = 0; d < d_n; ++d) {
      grads.w_xh(d, 0) += part[d];
      grads.w_xh(d, 1) += part[d_n + d];
      grads.b_xh[d] += part[2 * d_n + d];
    }
    double* gw_hc = grads.w_hc.row(0);
    for (int d = 0; d < d_n; ++d) gw_hc[d] += part[3 * d_n + d];
    grads.b_hc += part[4 * d_n];
  }

  return grads;
}

std::size_t param_count(const ModelParams& params) {
  check_params_shapes(params);
  std::size_t n = 0;
  for (const auto& tv : tensor_views(params)) {
    const bool attention_only =
        tv.name == std::string("W_hc") || tv.name == std::string("b_hc");
    if (attention_only && params.pooling == Pooling::kUnweightedMean) continue;
    n += tv.size;
  }
  return n;
}

}  // namespace ffattn
