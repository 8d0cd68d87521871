#include "ffattn.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "bench.hpp"
#include "errors.hpp"
#include "serialize.hpp"
#include "trainer.hpp"
#include "verify.hpp"

struct ffa_model {
  ffattn::ModelParams params;
  std::optional<ffattn::AdamState> adam;
};

struct ffa_result {
  ffattn::RunResult run;
};

namespace {

thread_local std::string t_last_error;

void set_error(const char* what) { t_last_error = what ? what : ""; }

template <class F>
ffa_status guarded(F&& fn) {
  try {
    fn();
    return FFA_OK;
  } catch (const ffattn::UsageError& e) {
    set_error(e.what());
    return FFA_ERR_USAGE;
  } catch (const ffattn::ShapeError& e) {
    set_error(e.what());
    return FFA_ERR_SHAPE;
  } catch (const ffattn::NumericError& e) {
    set_error(e.what());
    return FFA_ERR_NUMERIC;
  } catch (const ffattn::IoError& e) {
    set_error(e.what());
    return FFA_ERR_IO;
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return FFA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return FFA_ERR_INTERNAL;
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ffattn::TaskKind to_task(int task) {
  switch (task) {
    case FFA_TASK_ADDITION:
      return ffattn::TaskKind::kAddition;
    case FFA_TASK_MULTIPLICATION:
      return ffattn::TaskKind::kMultiplication;
  }
  throw ffattn::UsageError("unknown task id " + std::to_string(task));
}

ffattn::Pooling to_pooling(int pooling) {
  switch (pooling) {
    case FFA_POOLING_ATTENTION:
      return ffattn::Pooling::kAttention;
    case FFA_POOLING_MEAN:
      return ffattn::Pooling::kUnweightedMean;
  }
  throw ffattn::UsageError("unknown pooling id " + std::to_string(pooling));
}

ffattn::LengthSpec to_lengths(int kind, uint32_t t0, uint32_t lo, uint32_t hi) {
  switch (kind) {
    case FFA_LENGTH_FIXED:
      return ffattn::LengthSpec::fixed(static_cast<int>(t0));
    case FFA_LENGTH_RANGE:
      return ffattn::LengthSpec::range(static_cast<int>(lo), static_cast<int>(hi));
  }
  throw ffattn::UsageError("unknown length kind " + std::to_string(kind));
}

ffattn::TrainConfig to_config(const ffa_train_config& c) {
  ffattn::TrainConfig cfg;
  cfg.task = to_task(c.task);
  cfg.pooling = to_pooling(c.pooling);
  cfg.lengths = to_lengths(c.length_kind, c.t0, c.len_lo, c.len_hi);
  cfg.lr = c.lr;
  cfg.batch_size = static_cast<int>(c.batch_size);
  cfg.updates_per_epoch = static_cast<int>(c.updates_per_epoch);
  cfg.max_epochs = static_cast<int>(c.max_epochs);
  cfg.test_size = static_cast<int>(c.test_size);
  cfg.threshold = c.threshold;
  cfg.seed = c.seed;
  cfg.dim = static_cast<int>(c.dim);
  cfg.workers = static_cast<int>(c.workers);
  return cfg;
}

ffa_train_config from_config(const ffattn::TrainConfig& cfg) {
  ffa_train_config c;
  c.task = cfg.task == ffattn::TaskKind::kAddition ? FFA_TASK_ADDITION : FFA_TASK_MULTIPLICATION;
  c.pooling =
      cfg.pooling == ffattn::Pooling::kAttention ? FFA_POOLING_ATTENTION : FFA_POOLING_MEAN;
  c.length_kind =
      cfg.lengths.kind == ffattn::LengthSpec::Kind::kFixed ? FFA_LENGTH_FIXED : FFA_LENGTH_RANGE;
  c.t0 = static_cast<uint32_t>(cfg.lengths.t0);
  c.len_lo = static_cast<uint32_t>(cfg.lengths.lo);
  c.len_hi = static_cast<uint32_t>(cfg.lengths.hi);
  c.lr = cfg.lr;
  c.batch_size = static_cast<uint32_t>(cfg.batch_size);
  c.updates_per_epoch = static_cast<uint32_t>(cfg.updates_per_epoch);
  c.max_epochs = static_cast<uint32_t>(cfg.max_epochs);
  c.test_size = static_cast<uint32_t>(cfg.test_size);
  c.threshold = cfg.threshold;
  c.seed = cfg.seed;
  c.dim = static_cast<uint32_t>(cfg.dim);
  c.workers = static_cast<uint32_t>(cfg.workers);
  return c;
}

ffattn::EpochCallback wrap_callback(ffa_epoch_fn on_epoch, void* user) {
  if (!on_epoch) return {};
  return [on_epoch, user](const ffattn::TrainConfig& cfg, const ffattn::EpochReport& r) {
    const ffa_train_config c = from_config(cfg);
    ffa_epoch_report rep;
    rep.epoch = static_cast<uint32_t>(r.epoch);
    rep.train_loss = r.mean_train_loss;
    rep.test_accuracy = r.test_accuracy;
    rep.wall_seconds = r.wall_seconds;
    on_epoch(&c, &rep, user);
  };
}

void require(bool ok, const char* message) {
  if (!ok) throw ffattn::UsageError(message);
}

}  // namespace

extern "C" {

const char* ffa_version(void) { return "1.0.0"; }

const char* ffa_status_name(ffa_status status) {
  switch (status) {
    case FFA_OK:
      return "ok";
    case FFA_ERR_USAGE:
      return "usage error";
    case FFA_ERR_SHAPE:
      return "shape error";
    case FFA_ERR_NUMERIC:
      return "numeric error";
    case FFA_ERR_IO:
      return "io error";
    case FFA_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown";
}

const char* ffa_last_error(void) { return t_last_error.c_str(); }

void ffa_string_free(char* s) { delete[] s; }

void ffa_train_config_init(ffa_train_config* cfg) {
  if (!cfg) return;
  *cfg = from_config(ffattn::TrainConfig{});
}

ffa_status ffa_train(const ffa_train_config* cfg, ffa_epoch_fn on_epoch, void* user,
                     ffa_result** out) {
  return guarded([&] {
    require(cfg && out, "ffa_train: cfg and out must be non-null");
    auto result = ffattn::train(to_config(*cfg), wrap_callback(on_epoch, user));
    *out = new ffa_result{std::move(result)};
  });
}

ffa_status ffa_lr_sweep(const ffa_train_config* base, const double* lrs, size_t n_lrs,
                        ffa_epoch_fn on_epoch, void* user, ffa_result** results,
                        size_t* best_index) {
  return guarded([&] {
    require(base && lrs && results && best_index,
            "ffa_lr_sweep: base, lrs, results, best_index must be non-null");
    require(n_lrs > 0, "ffa_lr_sweep: empty learning-rate grid");
    auto sweep = ffattn::lr_sweep(to_config(*base), std::vector<double>(lrs, lrs + n_lrs),
                                  wrap_callback(on_epoch, user));
    for (size_t i = 0; i < n_lrs; ++i) {
      results[i] = new ffa_result{std::move(sweep.runs[i])};
    }
    *best_index = sweep.best_index;
  });
}

void ffa_result_free(ffa_result* result) { delete result; }

uint32_t ffa_result_epoch_count(const ffa_result* result) {
  return result ? static_cast<uint32_t>(result->run.reports.size()) : 0;
}

ffa_status ffa_result_epoch(const ffa_result* result, uint32_t index, ffa_epoch_report* out) {
  return guarded([&] {
    require(result && out, "ffa_result_epoch: result and out must be non-null");
    require(index < result->run.reports.size(), "ffa_result_epoch: index out of range");
    const auto& r = result->run.reports[index];
    out->epoch = static_cast<uint32_t>(r.epoch);
    out->train_loss = r.mean_train_loss;
    out->test_accuracy = r.test_accuracy;
    out->wall_seconds = r.wall_seconds;
  });
}

int64_t ffa_result_solved_epoch(const ffa_result* result) {
  if (!result || !result->run.solved_at_epoch) return -1;
  return *result->run.solved_at_epoch;
}

double ffa_result_final_accuracy(const ffa_result* result) {
  return result ? result->run.final_accuracy : 0.0;
}

ffa_status ffa_result_config(const ffa_result* result, ffa_train_config* out) {
  return guarded([&] {
    require(result && out, "ffa_result_config: result and out must be non-null");
    *out = from_config(result->run.config);
  });
}

int ffa_result_is_better(const ffa_result* a, const ffa_result* b) {
  if (!a || !b) return 0;
  return ffattn::result_better(a->run, b->run) ? 1 : 0;
}

char* ffa_result_json(const ffa_result* result) {
  if (!result) return nullptr;
  try {
    return copy_string(ffattn::run_result_to_json(result->run));
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

ffa_status ffa_result_model(const ffa_result* result, ffa_model** out) {
  return guarded([&] {
    require(result && out, "ffa_result_model: result and out must be non-null");
    *out = new ffa_model{result->run.final_params, result->run.final_state};
  });
}

ffa_status ffa_model_init(uint32_t dim, int pooling, uint64_t seed, ffa_model** out) {
  return guarded([&] {
    require(out != nullptr, "ffa_model_init: out must be non-null");
    *out = new ffa_model{ffattn::init_params(static_cast<int>(dim), to_pooling(pooling), seed),
                         std::nullopt};
  });
}

void ffa_model_free(ffa_model* model) { delete model; }

uint64_t ffa_model_param_count(const ffa_model* model) {
  if (!model) return 0;
  return ffattn::param_count(model->params);
}

char* ffa_model_checkpoint_json(const ffa_model* model) {
  if (!model) return nullptr;
  try {
    return copy_string(ffattn::checkpoint_to_json(
        model->params, model->adam ? &*model->adam : nullptr));
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

ffa_status ffa_model_from_checkpoint_json(const char* text, ffa_model** out) {
  return guarded([&] {
    require(text && out, "ffa_model_from_checkpoint_json: text and out must be non-null");
    auto ckpt = ffattn::checkpoint_from_json(text);
    *out = new ffa_model{std::move(ckpt.params), std::move(ckpt.adam)};
  });
}

ffa_status ffa_model_predict(const ffa_model* model, const double* inputs, uint32_t t_len,
                             double* y_out) {
  return guarded([&] {
    require(model && inputs && y_out, "ffa_model_predict: null argument");
    require(t_len >= 1, "ffa_model_predict: t_len must be >= 1");
    ffattn::SequenceBatch batch(1, static_cast<int>(t_len));
    std::memcpy(batch.inputs.data().data(), inputs, sizeof(double) * 2 * t_len);
    *y_out = ffattn::forward(model->params, batch).y[0];
  });
}

ffa_status ffa_model_evaluate(const ffa_model* model, int task, int length_kind, uint32_t t0,
                              uint32_t len_lo, uint32_t len_hi, uint32_t n, uint64_t seed,
                              double threshold, uint32_t workers, double* accuracy) {
  return guarded([&] {
    require(model && accuracy, "ffa_model_evaluate: model and accuracy must be non-null");
    const auto set = ffattn::make_test_set(to_task(task),
                                           to_lengths(length_kind, t0, len_lo, len_hi),
                                           static_cast<int>(n), seed);
    ffattn::ThreadPool pool(workers == 0 ? 1 : static_cast<int>(workers));
    *accuracy = ffattn::evaluate(model->params, set, threshold, &pool);
  });
}

ffa_status ffa_gradcheck(uint64_t seed, uint32_t n_configs, double fd_step, double tolerance,
                         ffa_gradcheck_summary* out, char** json_report) {
  return guarded([&] {
    require(out != nullptr, "ffa_gradcheck: out must be non-null");
    const auto report = ffattn::run_gradcheck_suite(seed, static_cast<int>(n_configs), fd_step,
                                                    tolerance);
    out->max_rel_error = report.max_rel_error;
    out->tolerance = report.tolerance;
    out->configs_checked = report.configs_checked;
    out->pass = report.pass ? 1 : 0;
    if (json_report) *json_report = copy_string(ffattn::gradcheck_report_to_json(report));
  });
}

ffa_status ffa_check_permutation_invariance(const ffa_model* model, uint32_t t_len,
                                            uint32_t trials, uint64_t seed, int* ok) {
  return guarded([&] {
    require(model && ok, "ffa_check_permutation_invariance: model and ok must be non-null");
    require(t_len >= 2, "ffa_check_permutation_invariance: t_len must be >= 2");
    ffattn::Rng rng(seed, ffattn::streams::probe(7));
    const auto inst =
        ffattn::generate_with_length(ffattn::TaskKind::kAddition, static_cast<int>(t_len), rng);
    *ok = ffattn::check_permutation_invariance(model->params, inst, static_cast<int>(trials),
                                               seed)
              ? 1
              : 0;
  });
}

ffa_status ffa_check_pooling_equivalence(uint32_t dim, uint32_t t_len, uint32_t batch,
                                         uint64_t seed, int* ok) {
  return guarded([&] {
    require(ok != nullptr, "ffa_check_pooling_equivalence: ok must be non-null");
    const auto data = ffattn::generate_batch(
        ffattn::TaskKind::kAddition,
        ffattn::LengthSpec::range(static_cast<int>(t_len), static_cast<int>(t_len)),
        static_cast<int>(batch), seed, 0);
    *ok = ffattn::check_pooling_equivalence(static_cast<int>(dim), data, seed) ? 1 : 0;
  });
}

ffa_status ffa_dump_dataset(int task, int length_kind, uint32_t t0, uint32_t len_lo,
                            uint32_t len_hi, uint32_t n, uint64_t seed, const char* path) {
  return guarded([&] {
    require(path != nullptr, "ffa_dump_dataset: path must be non-null");
    std::ofstream out(path);
    if (!out) throw ffattn::IoError(std::string("cannot open for writing: ") + path);
    ffattn::dump_dataset_jsonl(to_task(task), to_lengths(length_kind, t0, len_lo, len_hi),
                               static_cast<int>(n), seed, out);
    out.flush();
    if (!out) throw ffattn::IoError(std::string("write failed: ") + path);
  });
}

ffa_status ffa_bench(uint32_t t0, uint32_t batch, uint32_t dim, uint64_t seed,
                     const uint32_t* worker_counts, size_t n_counts, uint32_t reps,
                     ffa_bench_entry* entries, char** json_report) {
  return guarded([&] {
    require(worker_counts && entries, "ffa_bench: worker_counts and entries must be non-null");
    std::vector<int> counts(worker_counts, worker_counts + n_counts);
    const auto result = ffattn::run_bench(static_cast<int>(t0), static_cast<int>(batch),
                                          static_cast<int>(dim), seed, counts,
                                          static_cast<int>(reps));
    for (size_t i = 0; i < result.entries.size(); ++i) {
      const auto& e = result.entries[i];
      entries[i].workers = static_cast<uint32_t>(e.workers);
      entries[i].steps_per_second = e.steps_per_second;
      entries[i].speedup = e.speedup;
      entries[i].max_output_delta = e.max_output_delta;
    }
    if (json_report) *json_report = copy_string(ffattn::bench_result_to_json(result));
  });
}

}  // extern "C"
