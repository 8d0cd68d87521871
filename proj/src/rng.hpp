#pragma once

#include <cstdint>

namespace ffattn {

// Counter-based generator in the splitmix64 family: draw i of a stream is
// mix64(key + i*GAMMA), where the key is derived from (seed, stream id).
// Streams share no state, any draw index is reachable in O(1), and the
// sequence for a given (seed, stream) is identical on every platform
// because only 64-bit integer arithmetic is involved.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // [0, 1), 53-bit resolution
  double uniform();
  // [lo, hi)
  double uniform(double lo, double hi);
  // [0, n), unbiased; n must be > 0
  std::uint64_t uniform_int(std::uint64_t n);
  // integer in [lo, hi] inclusive
  int uniform_range(int lo, int hi);
  // Normal(0, stddev^2) via Box-Muller
  double gaussian(double stddev);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

// Stream ids are composed as [tag:4][counter:44][lane:16] so parameter
// initialization, the held-out test set, per-batch training draws and
// ad-hoc probes can never collide.
namespace streams {

inline constexpr std::uint64_t kTagInit = 1;
inline constexpr std::uint64_t kTagTest = 2;
inline constexpr std::uint64_t kTagTrain = 3;
inline constexpr std::uint64_t kTagProbe = 4;

inline constexpr std::uint64_t kMaxCounter = (std::uint64_t{1} << 44) - 1;
inline constexpr std::uint64_t kMaxLane = (std::uint64_t{1} << 16) - 1;

std::uint64_t compose(std::uint64_t tag, std::uint64_t counter, std::uint64_t lane);

// one lane per parameter tensor, so W_xh draws do not depend on pooling mode
std::uint64_t param_tensor(int tensor_index);
// test instance i of a run
std::uint64_t test_instance(std::uint64_t i);
// the shared length draw of training batch k
std::uint64_t batch_length(std::uint64_t batch_index);
// sequence b of training batch k
std::uint64_t batch_instance(std::uint64_t batch_index, std::uint64_t b);
// scratch streams for verification and benchmarks
std::uint64_t probe(std::uint64_t i);

}  // namespace streams

}  // namespace ffattn
