#pragma once

#include <cstdint>

#include "model.hpp"

namespace ffattn {

// Weight matrices W in R^{M x N} drawn from Normal(0, 1/N); biases zero.
// Each tensor draws from its own sub-stream, so W_xh is identical across
// pooling modes for a given seed.
ModelParams init_params(int dim, Pooling pooling, std::uint64_t seed);

// Bias-corrected adam as in the original algorithm:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   theta <- theta - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
struct AdamState {
  Gradients m;
  Gradients v;
  std::int64_t step_count = 0;  // t
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lr = 0.001;

  AdamState() = default;
  AdamState(int dim, double lr);
};

// One update in place. Throws NumericError naming the tensor on a
// non-finite gradient entry.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state);

}  // namespace ffattn
