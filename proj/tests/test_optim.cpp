#include <cmath>

#include "doctest.h"
#include "errors.hpp"
#include "optim.hpp"
#include "tasks.hpp"

using namespace ffattn;

namespace {

double sample_std(const Matrix& m) {
  double mean = 0.0;
  for (double v : m.data()) mean += v;
  mean /= m.size();
  double var = 0.0;
  for (double v : m.data()) var += (v - mean) * (v - mean);
  return std::sqrt(var / (m.size() - 1));
}

}  // namespace

TEST_SUITE("optim") {

TEST_CASE("biases start at exactly zero") {
  const auto p = init_params(100, Pooling::kAttention, 1);
  for (double v : p.b_xh) CHECK(v == 0.0);
  for (double v : p.b_cs) CHECK(v == 0.0);
  CHECK(p.b_hc == 0.0);
  CHECK(p.b_sy == 0.0);
}

TEST_CASE("fan-in initialization scales") {
  const auto p = init_params(100, Pooling::kAttention, 2);
  CHECK(std::abs(sample_std(p.w_cs) - 0.1) < 0.003);       // 1/sqrt(100)
  CHECK(std::abs(sample_std(p.w_xh) - 1.0 / std::sqrt(2.0)) < 0.08);
  CHECK(std::abs(sample_std(p.w_hc) - 0.1) < 0.03);
  CHECK(std::abs(sample_std(p.w_sy) - 0.1) < 0.03);
}

TEST_CASE("init determinism and pooling-independent weight draws") {
  const auto a = init_params(10, Pooling::kAttention, 7);
  const auto b = init_params(10, Pooling::kAttention, 7);
  CHECK(a.w_xh.data() == b.w_xh.data());
  CHECK(a.w_cs.data() == b.w_cs.data());
  const auto mean = init_params(10, Pooling::kUnweightedMean, 7);
  CHECK(a.w_xh.data() == mean.w_xh.data());
  CHECK(a.w_sy.data() == mean.w_sy.data());
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  auto p = init_params(4, Pooling::kAttention, 3);
  const auto before = p;
  Gradients zero(4);
  AdamState state(4, 0.01);
  adam_step(p, zero, state);
  CHECK(state.step_count == 1);
  auto pv = tensor_views(p);
  auto bv = tensor_views(before);
  for (std::size_t i = 0; i < pv.size(); ++i) {
    for (std::size_t j = 0; j < pv[i].size; ++j) CHECK(pv[i].data[j] == bv[i].data[j]);
  }
}

TEST_CASE("first step closed form") {
  // scalar parameter, g = 1, lr = .001: bias correction gives m_hat = v_hat = 1
  ModelParams p(1, Pooling::kAttention);
  Gradients g(1);
  g.b_sy = 1.0;
  AdamState state(1, 0.001);
  adam_step(p, g, state);
  CHECK(std::abs(p.b_sy - (-0.001 * (1.0 / (1.0 + 1e-8)))) < 1e-12);
  CHECK(std::abs(p.b_sy - (-0.000999999990)) < 1e-12);
}

TEST_CASE("first step moves every parameter by about lr against the gradient sign") {
  auto p = init_params(3, Pooling::kAttention, 5);
  const auto before = p;
  Gradients g(3);
  for (auto& tv : tensor_views(g)) {
    for (std::size_t j = 0; j < tv.size; ++j) tv.data[j] = -2.5;
  }
  AdamState state(3, 0.003);
  adam_step(p, g, state);
  auto pv = tensor_views(p);
  auto bv = tensor_views(before);
  for (std::size_t i = 0; i < pv.size(); ++i) {
    for (std::size_t j = 0; j < pv[i].size; ++j) {
      const double delta = pv[i].data[j] - bv[i].data[j];
      CHECK(delta > 0.0);  // g < 0 pushes parameters up
      CHECK(std::abs(delta) <= 0.003 * (1.0 + 1e-6));
      CHECK(std::abs(delta) > 0.003 * 0.99);
    }
  }
}

TEST_CASE("first-step magnitude bounded by lr for arbitrary gradients") {
  auto p = init_params(4, Pooling::kUnweightedMean, 8);
  const auto before = p;
  Gradients g(4);
  Rng rng(6, 0);
  for (auto& tv : tensor_views(g)) {
    for (std::size_t j = 0; j < tv.size; ++j) tv.data[j] = rng.uniform(-100.0, 100.0);
  }
  AdamState state(4, 0.01);
  adam_step(p, g, state);
  auto pv = tensor_views(p);
  auto bv = tensor_views(before);
  for (std::size_t i = 0; i < pv.size(); ++i) {
    for (std::size_t j = 0; j < pv[i].size; ++j) {
      CHECK(std::abs(pv[i].data[j] - bv[i].data[j]) <= 0.01 * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("update determinism") {
  auto p1 = init_params(3, Pooling::kAttention, 9);
  auto p2 = init_params(3, Pooling::kAttention, 9);
  Gradients g(3);
  Rng rng(10, 1);
  for (auto& tv : tensor_views(g)) {
    for (std::size_t j = 0; j < tv.size; ++j) tv.data[j] = rng.gaussian(1.0);
  }
  AdamState s1(3, 0.001), s2(3, 0.001);
  for (int step = 0; step < 5; ++step) {
    adam_step(p1, g, s1);
    adam_step(p2, g, s2);
  }
  auto v1 = tensor_views(p1);
  auto v2 = tensor_views(p2);
  for (std::size_t i = 0; i < v1.size(); ++i) {
    for (std::size_t j = 0; j < v1[i].size; ++j) CHECK(v1[i].data[j] == v2[i].data[j]);
  }
  CHECK(s1.step_count == 5);
}

TEST_CASE("non-finite gradient is rejected with the tensor name") {
  auto p = init_params(2, Pooling::kAttention, 4);
  Gradients g(2);
  g.w_cs(1, 1) = std::numeric_limits<double>::quiet_NaN();
  AdamState state(2, 0.001);
  CHECK_THROWS_WITH_AS(adam_step(p, g, state), doctest::Contains("W_cs"), NumericError);
}

TEST_CASE("mean mode never moves W_hc across updates") {
  auto p = init_params(4, Pooling::kUnweightedMean, 12);
  const auto w_hc_before = p.w_hc;
  AdamState state(4, 0.01);
  for (std::uint64_t k = 0; k < 3; ++k) {
    const auto batch =
        generate_batch(TaskKind::kMultiplication, LengthSpec::fixed(8), 4, 13, k);
    const auto cache = forward(p, batch);
    adam_step(p, backward(p, batch, cache), state);
  }
  CHECK(p.w_hc.data() == w_hc_before.data());
  CHECK(p.b_hc == 0.0);
}

TEST_CASE("adam rejects lr <= 0") {
  CHECK_THROWS_AS(AdamState(3, 0.0), UsageError);
  CHECK_THROWS_AS(AdamState(3, -0.1), UsageError);
}

}  // TEST_SUITE
