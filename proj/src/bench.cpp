#include "bench.hpp"

#include <chrono>
#include <cmath>

#include "errors.hpp"
#include "json.hpp"
#include "optim.hpp"
#include "tasks.hpp"

namespace ffattn {

BenchResult run_bench(int t0, int batch, int dim, std::uint64_t seed,
                      const std::vector<int>& worker_counts, int reps) {
  if (worker_counts.empty()) throw UsageError("bench: need at least one worker count");
  for (int w : worker_counts) {
    if (w < 1) throw UsageError("bench: worker counts must be >= 1");
  }
  if (reps < 1) throw UsageError("bench: reps must be >= 1");

  const auto params = init_params(dim, Pooling::kAttention, seed);
  const auto data = generate_batch(TaskKind::kAddition, LengthSpec::fixed(t0), batch, seed, 0);

  BenchResult result;
  result.t0 = t0;
  result.batch = batch;
  result.dim = dim;
  result.t_len = data.t_len;
  result.seed = seed;

  std::vector<double> baseline_y;
  for (int w : worker_counts) {
    ThreadPool pool(w);
    // warmup; also the output snapshot for the consistency check
    auto cache = forward(params, data, &pool);
    backward(params, data, cache, &pool);
    if (baseline_y.empty()) baseline_y = cache.y;

    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) {
      auto c = forward(params, data, &pool);
      backward(params, data, c, &pool);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    BenchEntry entry;
    entry.workers = w;
    entry.steps_per_second =
        static_cast<double>(reps) * data.batch * data.t_len / (secs > 0.0 ? secs : 1e-12);
    for (std::size_t b = 0; b < cache.y.size(); ++b) {
      entry.max_output_delta = std::max(entry.max_output_delta, std::abs(cache.y[b] - baseline_y[b]));
    }
    result.entries.push_back(entry);
  }
  for (auto& e : result.entries) {
    e.speedup = e.steps_per_second / result.entries.front().steps_per_second;
  }
  return result;
}

std::string bench_result_to_json(const BenchResult& result) {
  nlohmann::json j;
  j["t0"] = result.t0;
  j["batch"] = result.batch;
  j["dim"] = result.dim;
  j["t_len"] = result.t_len;
  j["seed"] = result.seed;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : result.entries) {
    entries.push_back({{"workers", e.workers},
                       {"steps_per_second", e.steps_per_second},
                       {"speedup", e.speedup},
                       {"max_output_delta", e.max_output_delta}});
  }
  j["entries"] = std::move(entries);
  return j.dump(2);
}

}  // namespace ffattn
