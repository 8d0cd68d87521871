#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ffattn {

struct BenchEntry {
  int workers = 0;
  double steps_per_second = 0.0;       // processed (b, t) steps per second
  double speedup = 1.0;                // vs the first worker count
  double max_output_delta = 0.0;       // vs the first worker count, must be ~0
};

struct BenchResult {
  int t0 = 0;
  int batch = 0;
  int dim = 0;
  int t_len = 0;
  std::uint64_t seed = 0;
  std::vector<BenchEntry> entries;
};

// Times forward+backward on one fixed batch (lengths drawn from
// Fixed(t0)) for each worker count. Outputs must be identical across
// worker counts; only the wall time may change.
BenchResult run_bench(int t0, int batch, int dim, std::uint64_t seed,
                      const std::vector<int>& worker_counts, int reps = 5);

std::string bench_result_to_json(const BenchResult& result);

}  // namespace ffattn
