#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "numeric.hpp"
#include "thread_pool.hpp"

namespace ffattn {

enum class Pooling {
  kAttention,       // adaptive weights: e_t = tanh(W_hc h_t + b_hc), alpha = softmax(e)
  kUnweightedMean,  // alpha fixed at 1/T
};

// The four-layer feed-forward network:
//   h_t = LReLU(W_xh x_t + b_xh)
//   c   = sum_t alpha_t h_t          (pooling over time)
//   s   = LReLU(W_cs c + b_cs)
//   y   = LReLU(W_sy s + b_sy)
struct ModelParams {
  int dim = 0;  // D
  Pooling pooling = Pooling::kAttention;
  Matrix w_xh;                // D x 2
  std::vector<double> b_xh;   // D
  Matrix w_hc;                // 1 x D
  double b_hc = 0.0;
  Matrix w_cs;                // D x D
  std::vector<double> b_cs;   // D
  Matrix w_sy;                // 1 x D
  double b_sy = 0.0;

  ModelParams() = default;
  ModelParams(int dim, Pooling pooling);  // zero-filled tensors
};

struct Gradients {
  Matrix w_xh;
  std::vector<double> b_xh;
  Matrix w_hc;
  double b_hc = 0.0;
  Matrix w_cs;
  std::vector<double> b_cs;
  Matrix w_sy;
  double b_sy = 0.0;

  Gradients() = default;
  explicit Gradients(int dim);  // zero-filled
};

// Named view over the eight tensors, in a fixed order shared by the
// optimizer, the serializer and the gradient checker.
struct TensorView {
  const char* name;
  double* data;
  std::size_t size;
};
struct ConstTensorView {
  const char* name;
  const double* data;
  std::size_t size;
};
std::vector<TensorView> tensor_views(ModelParams& p);
std::vector<ConstTensorView> tensor_views(const ModelParams& p);
std::vector<TensorView> tensor_views(Gradients& g);
std::vector<ConstTensorView> tensor_views(const Gradients& g);

// A rectangular minibatch: B sequences of the same length T, each step a
// (value, marker) pair, with one scalar regression target per sequence.
struct SequenceBatch {
  int batch = 0;   // B
  int t_len = 0;   // T
  Matrix inputs;   // (B*T) x 2, row b*T + t
  std::vector<double> targets;  // B

  SequenceBatch() = default;
  SequenceBatch(int batch, int t_len);
  const double* step(int b, int t) const { return inputs.row(b * t_len + t); }
  double* step(int b, int t) { return inputs.row(b * t_len + t); }
};

// Every intermediate activation of a forward pass, kept for backprop.
struct ForwardCache {
  int batch = 0;
  int t_len = 0;
  int dim = 0;
  Pooling pooling = Pooling::kAttention;
  std::uint64_t params_fingerprint = 0;
  Matrix h;      // (B*T) x D
  Matrix e;      // B x T attention pre-activations (zero in mean mode)
  Matrix alpha;  // B x T attention weights (1/T in mean mode)
  Matrix c;      // B x D context vectors
  Matrix s;      // B x D
  std::vector<double> y;  // B
};

// Cheap content hash used to reject a backward() call whose cache was not
// produced from the same parameters.
std::uint64_t params_fingerprint(const ModelParams& p);

ForwardCache forward(const ModelParams& params, const SequenceBatch& batch,
                     ThreadPool* pool = nullptr);

// mean over the batch of per-sequence squared errors
double loss(const ForwardCache& cache, std::span<const double> targets);

Gradients backward(const ModelParams& params, const SequenceBatch& batch,
                   const ForwardCache& cache, ThreadPool* pool = nullptr);

// Scalars in the tensors the active pooling mode uses; W_hc/b_hc do not
// count in mean mode.
std::size_t param_count(const ModelParams& params);

}  // namespace ffattn
