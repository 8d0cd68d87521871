#include <cmath>

#include "doctest.h"
#include "errors.hpp"
#include "json.hpp"
#include "serialize.hpp"

using namespace ffattn;

TEST_SUITE("serialize") {

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.6789, -0.0003, 2.2250738585072014e-308}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.25) == "0.25");
}

TEST_CASE("checkpoint round-trips parameters bit for bit") {
  auto p = init_params(7, Pooling::kAttention, 42);
  p.b_hc = 1.0 / 3.0;
  p.b_sy = -0.125;
  const auto text = checkpoint_to_json(p);
  const auto ckpt = checkpoint_from_json(text);
  CHECK(ckpt.params.dim == 7);
  CHECK(ckpt.params.pooling == Pooling::kAttention);
  CHECK(!ckpt.adam.has_value());
  auto a = tensor_views(p);
  auto b = tensor_views(ckpt.params);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].size == b[i].size);
    for (std::size_t j = 0; j < a[i].size; ++j) CHECK(a[i].data[j] == b[i].data[j]);
  }
}

TEST_CASE("checkpoint carries the optimizer state for deterministic resume") {
  auto p = init_params(3, Pooling::kUnweightedMean, 9);
  AdamState state(3, 0.003);
  state.step_count = 1234;
  state.m.w_cs(1, 2) = 0.75;
  state.v.b_xh[0] = 1e-9;
  const auto text = checkpoint_to_json(p, &state);
  const auto ckpt = checkpoint_from_json(text);
  REQUIRE(ckpt.adam.has_value());
  CHECK(ckpt.adam->step_count == 1234);
  CHECK(ckpt.adam->lr == 0.003);
  CHECK(ckpt.adam->beta1 == 0.9);
  CHECK(ckpt.adam->beta2 == 0.999);
  CHECK(ckpt.adam->epsilon == 1e-8);
  CHECK(ckpt.adam->m.w_cs(1, 2) == 0.75);
  CHECK(ckpt.adam->v.b_xh[0] == 1e-9);
  CHECK(ckpt.params.pooling == Pooling::kUnweightedMean);
}

TEST_CASE("checkpoint field names match the parameter names") {
  const auto p = init_params(2, Pooling::kAttention, 1);
  const auto j = nlohmann::json::parse(checkpoint_to_json(p));
  for (const char* key : {"W_xh", "b_xh", "W_hc", "b_hc", "W_cs", "b_cs", "W_sy", "b_sy"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["D"] == 2);
  CHECK(j["pooling"] == "attention");
}

TEST_CASE("malformed checkpoints are rejected") {
  CHECK_THROWS_AS(checkpoint_from_json("not json"), UsageError);
  CHECK_THROWS_AS(checkpoint_from_json("{}"), UsageError);
  auto p = init_params(3, Pooling::kAttention, 5);
  auto j = nlohmann::json::parse(checkpoint_to_json(p));
  j["W_cs"].erase(1);  // drop a row
  CHECK_THROWS_AS(checkpoint_from_json(j.dump()), UsageError);
  j = nlohmann::json::parse(checkpoint_to_json(p));
  j["pooling"] = "softmax";
  CHECK_THROWS_AS(checkpoint_from_json(j.dump()), UsageError);
}

TEST_CASE("config round-trip") {
  TrainConfig cfg;
  cfg.task = TaskKind::kMultiplication;
  cfg.pooling = Pooling::kUnweightedMean;
  cfg.lengths = LengthSpec::range(50, 1000);
  cfg.lr = 0.0003;
  cfg.seed = 0xDEADBEEFull;
  cfg.workers = 4;
  const auto back = config_from_json(config_to_json(cfg));
  CHECK(back.task == cfg.task);
  CHECK(back.pooling == cfg.pooling);
  CHECK(back.lengths.kind == LengthSpec::Kind::kRange);
  CHECK(back.lengths.lo == 50);
  CHECK(back.lengths.hi == 1000);
  CHECK(back.lr == cfg.lr);
  CHECK(back.seed == cfg.seed);
  CHECK(back.workers == 4);
  CHECK(back.batch_size == 100);
  CHECK(back.updates_per_epoch == 1000);
  CHECK(back.max_epochs == 100);
  CHECK(back.test_size == 1000);
  CHECK(back.threshold == 0.04);
  CHECK(back.dim == 100);
}

TEST_CASE("run result document carries the resolved config") {
  RunResult result;
  result.config.task = TaskKind::kAddition;
  result.config.lengths = LengthSpec::fixed(50);
  result.reports.push_back({1, 0.25, 0.5, 1.5});
  result.reports.push_back({2, 0.01, 1.0, 1.4});
  result.solved_at_epoch = 2;
  result.final_accuracy = 1.0;
  const auto j = nlohmann::json::parse(run_result_to_json(result));
  CHECK(j["config"]["task"] == "addition");
  CHECK(j["config"]["batch_size"] == 100);
  CHECK(j["config"]["threshold"] == 0.04);
  CHECK(j["epochs"].size() == 2);
  CHECK(j["epochs"][1]["test_accuracy"] == 1.0);
  CHECK(j["solved_at_epoch"] == 2);
  CHECK(j["final_accuracy"] == 1.0);

  RunResult unsolved;
  unsolved.final_accuracy = 0.75;
  const auto j2 = nlohmann::json::parse(run_result_to_json(unsolved));
  CHECK(j2["solved_at_epoch"].is_null());
}

TEST_CASE("gradcheck report document") {
  GradCheckReport report;
  report.per_tensor = {{"W_xh", 1e-7, 3}, {"b_xh", 2e-8, 0}};
  report.max_rel_error = 1e-7;
  report.worst_tensor = "W_xh";
  report.worst_index = 3;
  report.configs_checked = 20;
  report.tolerance = 1e-5;
  report.pass = true;
  const auto j = nlohmann::json::parse(gradcheck_report_to_json(report));
  CHECK(j["pass"] == true);
  CHECK(j["configs_checked"] == 20);
  CHECK(j["worst"]["tensor"] == "W_xh");
  CHECK(j["per_tensor"].size() == 2);
}

TEST_CASE("name helpers") {
  CHECK(pooling_from_name("attention") == Pooling::kAttention);
  CHECK(pooling_from_name("mean") == Pooling::kUnweightedMean);
  CHECK_THROWS_AS(pooling_from_name("avg"), UsageError);
  CHECK(task_from_name("multiplication") == TaskKind::kMultiplication);
  CHECK_THROWS_AS(task_from_name("sum"), UsageError);
}

}  // TEST_SUITE
