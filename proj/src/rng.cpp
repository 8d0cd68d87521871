#include "rng.hpp"

#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace ffattn {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  key_ = mix64(mix64(seed + kGamma) + stream);
}

std::uint64_t Rng::next_u64() {
  counter_ += 1;
  return mix64(key_ + counter_ * kGamma);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + uniform() * (hi - lo);
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw UsageError("uniform_int: n must be positive");
  std::uint64_t x, r;
  do {
    x = next_u64();
    r = x % n;
  } while (x - r > std::uint64_t{0} - n);  // reject the truncated top bucket
  return r;
}

int Rng::uniform_range(int lo, int hi) {
  if (lo > hi) throw UsageError("uniform_range: lo > hi");
  auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  return lo + static_cast<int>(uniform_int(span));
}

double Rng::gaussian(double stddev) {
  // u1 in (0, 1] keeps log() finite
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = uniform();
  return stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace streams {

std::uint64_t compose(std::uint64_t tag, std::uint64_t counter, std::uint64_t lane) {
  if (counter > kMaxCounter) throw UsageError("rng stream counter out of range");
  if (lane > kMaxLane) throw UsageError("rng stream lane out of range");
  return (tag << 60) | (counter << 16) | lane;
}

std::uint64_t param_tensor(int tensor_index) {
  return compose(kTagInit, 0, static_cast<std::uint64_t>(tensor_index));
}

std::uint64_t test_instance(std::uint64_t i) { return compose(kTagTest, i, 0); }

std::uint64_t batch_length(std::uint64_t batch_index) {
  return compose(kTagTrain, batch_index, 0);
}

std::uint64_t batch_instance(std::uint64_t batch_index, std::uint64_t b) {
  return compose(kTagTrain, batch_index, b + 1);
}

std::uint64_t probe(std::uint64_t i) { return compose(kTagProbe, i, 0); }

}  // namespace streams

}  // namespace ffattn
