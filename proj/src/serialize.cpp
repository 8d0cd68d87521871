#include "serialize.hpp"

#include <charconv>

#include "errors.hpp"
#include "json.hpp"

namespace ffattn {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, int rows, int cols, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw UsageError(std::string("checkpoint: ") + name + " must have " + std::to_string(rows) +
                     " rows");
  }
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = j.at(r);
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw UsageError(std::string("checkpoint: ") + name + " row " + std::to_string(r) +
                       " must have " + std::to_string(cols) + " entries");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

std::vector<double> vector_from_json(const json& j, int n, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw UsageError(std::string("checkpoint: ") + name + " must have " + std::to_string(n) +
                     " entries");
  }
  return j.get<std::vector<double>>();
}

json params_tensors_to_json(const ModelParams& p) {
  json j;
  j["W_xh"] = matrix_to_json(p.w_xh);
  j["b_xh"] = p.b_xh;
  j["W_hc"] = matrix_to_json(p.w_hc);
  j["b_hc"] = p.b_hc;
  j["W_cs"] = matrix_to_json(p.w_cs);
  j["b_cs"] = p.b_cs;
  j["W_sy"] = matrix_to_json(p.w_sy);
  j["b_sy"] = p.b_sy;
  return j;
}

json grad_tensors_to_json(const Gradients& g) {
  json j;
  j["W_xh"] = matrix_to_json(g.w_xh);
  j["b_xh"] = g.b_xh;
  j["W_hc"] = matrix_to_json(g.w_hc);
  j["b_hc"] = g.b_hc;
  j["W_cs"] = matrix_to_json(g.w_cs);
  j["b_cs"] = g.b_cs;
  j["W_sy"] = matrix_to_json(g.w_sy);
  j["b_sy"] = g.b_sy;
  return j;
}

void tensors_from_json(const json& j, int dim, Matrix& w_xh, std::vector<double>& b_xh,
                       Matrix& w_hc, double& b_hc, Matrix& w_cs, std::vector<double>& b_cs,
                       Matrix& w_sy, double& b_sy) {
  w_xh = matrix_from_json(j.at("W_xh"), dim, 2, "W_xh");
  b_xh = vector_from_json(j.at("b_xh"), dim, "b_xh");
  w_hc = matrix_from_json(j.at("W_hc"), 1, dim, "W_hc");
  b_hc = j.at("b_hc").get<double>();
  w_cs = matrix_from_json(j.at("W_cs"), dim, dim, "W_cs");
  b_cs = vector_from_json(j.at("b_cs"), dim, "b_cs");
  w_sy = matrix_from_json(j.at("W_sy"), 1, dim, "W_sy");
  b_sy = j.at("b_sy").get<double>();
}

json length_to_json(const LengthSpec& lengths) {
  json j;
  j["kind"] = lengths.kind == LengthSpec::Kind::kFixed ? "fixed" : "range";
  if (lengths.kind == LengthSpec::Kind::kFixed) j["t0"] = lengths.t0;
  j["lo"] = lengths.lo;
  j["hi"] = lengths.hi;
  return j;
}

LengthSpec length_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "fixed") return LengthSpec::fixed(j.at("t0").get<int>());
  if (kind == "range") return LengthSpec::range(j.at("lo").get<int>(), j.at("hi").get<int>());
  throw UsageError("config: unknown length kind '" + kind + "'");
}

json config_to_json_obj(const TrainConfig& c) {
  json j;
  j["task"] = task_name(c.task);
  j["pooling"] = pooling_name(c.pooling);
  j["length"] = length_to_json(c.lengths);
  j["lr"] = c.lr;
  j["batch_size"] = c.batch_size;
  j["updates_per_epoch"] = c.updates_per_epoch;
  j["max_epochs"] = c.max_epochs;
  j["test_size"] = c.test_size;
  j["threshold"] = c.threshold;
  j["seed"] = c.seed;
  j["dim"] = c.dim;
  j["workers"] = c.workers;
  return j;
}

TrainConfig config_from_json_obj(const json& j) {
  TrainConfig c;
  c.task = task_from_name(j.at("task").get<std::string>());
  c.pooling = pooling_from_name(j.at("pooling").get<std::string>());
  c.lengths = length_from_json(j.at("length"));
  c.lr = j.at("lr").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.updates_per_epoch = j.at("updates_per_epoch").get<int>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.test_size = j.at("test_size").get<int>();
  c.threshold = j.at("threshold").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.dim = j.at("dim").get<int>();
  c.workers = j.value("workers", 0);
  return c;
}

json parse(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw UsageError(std::string("invalid ") + what + ": not valid JSON");
  return j;
}

}  // namespace

const char* pooling_name(Pooling pooling) {
  return pooling == Pooling::kAttention ? "attention" : "mean";
}

Pooling pooling_from_name(const std::string& name) {
  if (name == "attention") return Pooling::kAttention;
  if (name == "mean") return Pooling::kUnweightedMean;
  throw UsageError("unknown pooling '" + name + "' (want attention|mean)");
}

TaskKind task_from_name(const std::string& name) {
  if (name == "addition") return TaskKind::kAddition;
  if (name == "multiplication") return TaskKind::kMultiplication;
  throw UsageError("unknown task '" + name + "' (want addition|multiplication)");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string checkpoint_to_json(const ModelParams& params, const AdamState* adam) {
  json j = params_tensors_to_json(params);
  j["D"] = params.dim;
  j["pooling"] = pooling_name(params.pooling);
  if (adam) {
    json a;
    a["t"] = adam->step_count;
    a["beta1"] = adam->beta1;
    a["beta2"] = adam->beta2;
    a["epsilon"] = adam->epsilon;
    a["lr"] = adam->lr;
    a["m"] = grad_tensors_to_json(adam->m);
    a["v"] = grad_tensors_to_json(adam->v);
    j["adam"] = std::move(a);
  }
  return j.dump(2);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  const json j = parse(text, "checkpoint");
  Checkpoint ckpt;
  try {
    const int dim = j.at("D").get<int>();
    if (dim < 1) throw UsageError("checkpoint: D must be >= 1");
    ckpt.params = ModelParams(dim, pooling_from_name(j.at("pooling").get<std::string>()));
    tensors_from_json(j, dim, ckpt.params.w_xh, ckpt.params.b_xh, ckpt.params.w_hc,
                      ckpt.params.b_hc, ckpt.params.w_cs, ckpt.params.b_cs, ckpt.params.w_sy,
                      ckpt.params.b_sy);
    if (j.contains("adam")) {
      const auto& a = j.at("adam");
      AdamState state(dim, a.at("lr").get<double>());
      state.step_count = a.at("t").get<std::int64_t>();
      state.beta1 = a.at("beta1").get<double>();
      state.beta2 = a.at("beta2").get<double>();
      state.epsilon = a.at("epsilon").get<double>();
      tensors_from_json(a.at("m"), dim, state.m.w_xh, state.m.b_xh, state.m.w_hc, state.m.b_hc,
                        state.m.w_cs, state.m.b_cs, state.m.w_sy, state.m.b_sy);
      tensors_from_json(a.at("v"), dim, state.v.w_xh, state.v.b_xh, state.v.w_hc, state.v.b_hc,
                        state.v.w_cs, state.v.b_cs, state.v.w_sy, state.v.b_sy);
      ckpt.adam = std::move(state);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid checkpoint: ") + e.what());
  }
  return ckpt;
}

std::string config_to_json(const TrainConfig& config) { return config_to_json_obj(config).dump(2); }

TrainConfig config_from_json(const std::string& text) {
  const json j = parse(text, "config");
  try {
    return config_from_json_obj(j);
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
}

std::string run_result_to_json(const RunResult& result) {
  json j;
  j["config"] = config_to_json_obj(result.config);
  json epochs = json::array();
  for (const auto& r : result.reports) {
    json e;
    e["epoch"] = r.epoch;
    e["train_loss"] = r.mean_train_loss;
    e["test_accuracy"] = r.test_accuracy;
    e["wall_seconds"] = r.wall_seconds;
    epochs.push_back(std::move(e));
  }
  j["epochs"] = std::move(epochs);
  if (result.solved_at_epoch) {
    j["solved_at_epoch"] = *result.solved_at_epoch;
  } else {
    j["solved_at_epoch"] = nullptr;
  }
  j["final_accuracy"] = result.final_accuracy;
  j["total_updates"] = result.final_state.step_count;
  return j.dump(2);
}

std::string gradcheck_report_to_json(const GradCheckReport& report) {
  json j;
  j["pass"] = report.pass;
  j["tolerance"] = report.tolerance;
  j["configs_checked"] = report.configs_checked;
  j["max_rel_error"] = report.max_rel_error;
  j["worst"] = {{"tensor", report.worst_tensor}, {"index", report.worst_index}};
  json per = json::array();
  for (const auto& t : report.per_tensor) {
    per.push_back({{"tensor", t.tensor},
                   {"max_rel_error", t.max_rel_error},
                   {"worst_index", t.worst_index}});
  }
  j["per_tensor"] = std::move(per);
  return j.dump(2);
}

}  // namespace ffattn
