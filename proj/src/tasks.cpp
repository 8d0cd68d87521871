#include "tasks.hpp"

#include <ostream>

#include "errors.hpp"
#include "json.hpp"

namespace ffattn {

const char* task_name(TaskKind kind) {
  return kind == TaskKind::kAddition ? "addition" : "multiplication";
}

LengthSpec LengthSpec::fixed(int t0) {
  if (t0 < 1) throw UsageError("fixed length spec: T0 must be >= 1");
  LengthSpec s;
  s.kind = Kind::kFixed;
  s.t0 = t0;
  s.lo = t0;
  s.hi = t0 + t0 / 10;  // floor(1.1*T0) in exact integer arithmetic
  return s;
}

LengthSpec LengthSpec::range(int lo, int hi) {
  if (lo < 1 || lo > hi) throw UsageError("range length spec: need 1 <= lo <= hi");
  LengthSpec s;
  s.kind = Kind::kRange;
  s.lo = lo;
  s.hi = hi;
  return s;
}

int LengthSpec::draw(Rng& rng) const { return rng.uniform_range(lo, hi); }

std::string LengthSpec::label() const {
  if (kind == Kind::kFixed) return "fixed:" + std::to_string(t0);
  return "range:" + std::to_string(lo) + "-" + std::to_string(hi);
}

double task_target(TaskKind kind, double v1, double v2) {
  if (kind == TaskKind::kAddition) return 0.5 + (v1 + v2) / 4.0;
  return v1 * v2;
}

TaskInstance generate_with_length(TaskKind kind, int t_len, Rng& rng) {
  if (t_len < 2) {
    throw UsageError("task instance needs T >= 2 for two distinct marked positions, got T=" +
                     std::to_string(t_len));
  }
  TaskInstance inst;
  inst.kind = kind;
  inst.t_len = t_len;
  inst.inputs = Matrix(t_len, 2);
  for (int t = 0; t < t_len; ++t) {
    inst.inputs(t, 0) = kind == TaskKind::kAddition ? rng.uniform(-1.0, 1.0) : rng.uniform();
  }
  const int half = t_len / 2;
  inst.i1 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(half)));
  inst.i2 = half + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(t_len - half)));
  inst.inputs(inst.i1, 1) = 1.0;
  inst.inputs(inst.i2, 1) = 1.0;
  inst.target = task_target(kind, inst.inputs(inst.i1, 0), inst.inputs(inst.i2, 0));
  return inst;
}

TaskInstance generate(TaskKind kind, const LengthSpec& spec, Rng& rng) {
  return generate_with_length(kind, spec.draw(rng), rng);
}

SequenceBatch generate_batch(TaskKind kind, const LengthSpec& spec, int batch,
                             std::uint64_t seed, std::uint64_t batch_index) {
  if (batch < 1) throw UsageError("batch size must be >= 1");
  if (static_cast<std::uint64_t>(batch) >= streams::kMaxLane) {
    throw UsageError("batch size exceeds the per-batch stream lane capacity");
  }
  Rng length_rng(seed, streams::batch_length(batch_index));
  const int t_len = spec.draw(length_rng);

  SequenceBatch out(batch, t_len);
  for (int b = 0; b < batch; ++b) {
    Rng rng(seed, streams::batch_instance(batch_index, static_cast<std::uint64_t>(b)));
    TaskInstance inst = generate_with_length(kind, t_len, rng);
    for (int t = 0; t < t_len; ++t) {
      out.step(b, t)[0] = inst.inputs(t, 0);
      out.step(b, t)[1] = inst.inputs(t, 1);
    }
    out.targets[b] = inst.target;
  }
  return out;
}

std::vector<TaskInstance> make_test_set(TaskKind kind, const LengthSpec& spec, int n,
                                        std::uint64_t seed) {
  if (n < 1) throw UsageError("test set size must be >= 1");
  std::vector<TaskInstance> set;
  set.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng rng(seed, streams::test_instance(static_cast<std::uint64_t>(i)));
    set.push_back(generate(kind, spec, rng));
  }
  return set;
}

SequenceBatch batch_from_instance(const TaskInstance& instance) {
  SequenceBatch out(1, instance.t_len);
  out.inputs = instance.inputs;
  out.targets[0] = instance.target;
  return out;
}

OrderProbe order_probe(int t_len) {
  if (t_len < 2) throw UsageError("order probe needs T >= 2");
  OrderProbe probe;
  probe.i1 = 0;
  probe.i2 = t_len - 1;
  probe.xy = Matrix(t_len, 2);
  probe.xy(probe.i1, 0) = 1.0;   // X
  probe.xy(probe.i1, 1) = 1.0;
  probe.xy(probe.i2, 0) = -1.0;  // Y
  probe.xy(probe.i2, 1) = 1.0;
  probe.yx = probe.xy;
  probe.yx(probe.i1, 0) = -1.0;
  probe.yx(probe.i2, 0) = 1.0;
  return probe;
}

void dump_dataset_jsonl(TaskKind kind, const LengthSpec& spec, int n, std::uint64_t seed,
                        std::ostream& out) {
  const auto set = make_test_set(kind, spec, n, seed);
  for (const auto& inst : set) {
    nlohmann::json rec;
    rec["kind"] = task_name(inst.kind);
    rec["T"] = inst.t_len;
    std::vector<double> values(inst.t_len);
    std::vector<int> markers(inst.t_len);
    for (int t = 0; t < inst.t_len; ++t) {
      values[t] = inst.inputs(t, 0);
      markers[t] = inst.inputs(t, 1) != 0.0 ? 1 : 0;
    }
    rec["values"] = values;
    rec["markers"] = markers;
    rec["target"] = inst.target;
    out << rec.dump() << "\n";
  }
}

}  // namespace ffattn
