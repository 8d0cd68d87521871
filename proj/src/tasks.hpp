#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

namespace ffattn {

enum class TaskKind { kAddition, kMultiplication };

const char* task_name(TaskKind kind);

// Sequence-length distribution. Fixed(T0) follows the usual convention of
// drawing T uniformly from [T0, floor(1.1*T0)]; Range(lo, hi) draws
// uniformly from [lo, hi].
struct LengthSpec {
  enum class Kind { kFixed, kRange };
  Kind kind = Kind::kFixed;
  int t0 = 0;  // meaningful for kFixed only
  int lo = 0;
  int hi = 0;

  static LengthSpec fixed(int t0);
  static LengthSpec range(int lo, int hi);
  int draw(Rng& rng) const;
  std::string label() const;  // "fixed:50" or "range:50-1000"
};

// One task sequence: channel 0 carries the values, channel 1 a {0,1}
// marker that is set at exactly two positions. The target combines the
// two marked values.
struct TaskInstance {
  TaskKind kind = TaskKind::kAddition;
  int t_len = 0;
  Matrix inputs;  // T x 2
  double target = 0.0;
  int i1 = 0;  // marked position in the first half
  int i2 = 0;  // marked position in the second half
};

// target as a function of the two marked values:
//   addition:        0.5 + (v1 + v2) / 4, values drawn from U[-1, 1]
//   multiplication:  v1 * v2,             values drawn from U[0, 1]
double task_target(TaskKind kind, double v1, double v2);

// Draw an instance of exactly length t_len (values ascending t, then i1,
// then i2). t_len must be >= 2 so the two markers are distinct.
TaskInstance generate_with_length(TaskKind kind, int t_len, Rng& rng);

// Draw the length from spec, then the instance, all from one stream.
TaskInstance generate(TaskKind kind, const LengthSpec& spec, Rng& rng);

// One shared length per batch (drawn on the batch's length stream), then
// B instances on per-sequence streams indexed by (batch_index, b). Any
// instance can be regenerated without materializing the others.
SequenceBatch generate_batch(TaskKind kind, const LengthSpec& spec, int batch,
                             std::uint64_t seed, std::uint64_t batch_index);

// n instances on the dedicated test-stream namespace, disjoint from every
// training stream.
std::vector<TaskInstance> make_test_set(TaskKind kind, const LengthSpec& spec, int n,
                                        std::uint64_t seed);

SequenceBatch batch_from_instance(const TaskInstance& instance);

// Two sequences that are exact time-permutations of each other: symbol X
// (value +1) and symbol Y (value -1) at the two marked positions, zeros
// elsewhere. Any temporal-pooling model maps both to the same output.
struct OrderProbe {
  Matrix xy;  // T x 2
  Matrix yx;  // T x 2
  int i1 = 0;
  int i2 = 0;
};
OrderProbe order_probe(int t_len);

// Line-delimited records {values, markers, target, kind, T}, one per
// instance, drawn like a test set.
void dump_dataset_jsonl(TaskKind kind, const LengthSpec& spec, int n, std::uint64_t seed,
                        std::ostream& out);

}  // namespace ffattn
