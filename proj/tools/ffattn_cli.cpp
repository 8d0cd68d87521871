// Command-line harness over the ffattn C API. Subcommands: train, sweep,
// table1, varlen, gradcheck, bench, dump. Exit codes: 0 success, 1 usage,
// 2 numeric failure, 3 threshold miss in table1/varlen --check mode.

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ffattn.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCsvHeader =
    "epoch,task,pooling,length_spec,lr,seed,train_loss,test_accuracy,wall_seconds";

struct CliError {
  int exit_code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw CliError{code, message}; }

int exit_code_for(ffa_status status) {
  switch (status) {
    case FFA_OK:
      return 0;
    case FFA_ERR_NUMERIC:
    case FFA_ERR_INTERNAL:
      return 2;
    default:
      return 1;
  }
}

void check_status(ffa_status status, const std::string& context) {
  if (status != FFA_OK) {
    fail(exit_code_for(status),
         context + ": " + ffa_status_name(status) + ": " + ffa_last_error());
  }
}

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_wall(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string owned_string(char* s) {
  if (!s) fail(2, std::string("library returned no document: ") + ffa_last_error());
  std::string out(s);
  ffa_string_free(s);
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(1, "cannot open for writing: " + tmp.string());
    f << content;
    if (!f) fail(1, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct ResultHandle {
  ffa_result* ptr = nullptr;
  ResultHandle() = default;
  explicit ResultHandle(ffa_result* p) : ptr(p) {}
  ResultHandle(ResultHandle&& o) noexcept : ptr(o.ptr) { o.ptr = nullptr; }
  ResultHandle& operator=(ResultHandle&& o) noexcept {
    if (this != &o) {
      ffa_result_free(ptr);
      ptr = o.ptr;
      o.ptr = nullptr;
    }
    return *this;
  }
  ~ResultHandle() { ffa_result_free(ptr); }
  ResultHandle(const ResultHandle&) = delete;
  ResultHandle& operator=(const ResultHandle&) = delete;
};

struct ModelHandle {
  ffa_model* ptr = nullptr;
  explicit ModelHandle(ffa_model* p = nullptr) : ptr(p) {}
  ~ModelHandle() { ffa_model_free(ptr); }
  ModelHandle(const ModelHandle&) = delete;
  ModelHandle& operator=(const ModelHandle&) = delete;
};

// Shared option set; each subcommand wires the subset it needs.
struct Options {
  std::string task = "addition";
  std::string pooling = "attention";
  std::vector<int> t0_list;
  int t0 = 0;
  int len_lo = 0;
  int len_hi = 0;
  double lr = 0.001;
  std::vector<double> lr_grid;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds;
  int epochs = 100;
  int batch = 100;
  int updates_per_epoch = 1000;
  int test_size = 1000;
  double threshold = 0.04;
  int dim = 100;
  std::string out_dir = "out";
  int workers = 0;
  std::vector<int> worker_counts = {1, 2, 4};
  int reps = 5;
  int count = 100;
  int configs = 20;
  double fd_step = 1e-6;
  double tolerance = 1e-5;
  bool check = false;
  double min_accuracy = 0.99;
};

int task_id(const std::string& name) {
  if (name == "addition") return FFA_TASK_ADDITION;
  if (name == "multiplication") return FFA_TASK_MULTIPLICATION;
  fail(1, "unknown task '" + name + "' (want addition|multiplication)");
}

int pooling_id(const std::string& name) {
  if (name == "attention") return FFA_POOLING_ATTENTION;
  if (name == "mean") return FFA_POOLING_MEAN;
  fail(1, "unknown pooling '" + name + "' (want attention|mean)");
}

const char* task_str(int id) {
  return id == FFA_TASK_ADDITION ? "addition" : "multiplication";
}
const char* pooling_str(int id) { return id == FFA_POOLING_ATTENTION ? "attention" : "mean"; }

std::string length_label(const ffa_train_config& cfg) {
  if (cfg.length_kind == FFA_LENGTH_FIXED) return "fixed:" + std::to_string(cfg.t0);
  return "range:" + std::to_string(cfg.len_lo) + "-" + std::to_string(cfg.len_hi);
}

ffa_train_config build_config(const Options& opt, bool default_range) {
  ffa_train_config cfg;
  ffa_train_config_init(&cfg);
  cfg.task = task_id(opt.task);
  cfg.pooling = pooling_id(opt.pooling);
  if (opt.len_lo > 0 || opt.len_hi > 0) {
    if (opt.len_lo <= 0 || opt.len_hi <= 0) fail(1, "--len-lo and --len-hi must be given together");
    cfg.length_kind = FFA_LENGTH_RANGE;
    cfg.len_lo = static_cast<uint32_t>(opt.len_lo);
    cfg.len_hi = static_cast<uint32_t>(opt.len_hi);
  } else if (opt.t0 > 0) {
    cfg.length_kind = FFA_LENGTH_FIXED;
    cfg.t0 = static_cast<uint32_t>(opt.t0);
  } else if (default_range) {
    cfg.length_kind = FFA_LENGTH_RANGE;
    cfg.len_lo = 50;
    cfg.len_hi = 1000;
  } else {
    cfg.length_kind = FFA_LENGTH_FIXED;
    cfg.t0 = 50;
  }
  cfg.lr = opt.lr;
  cfg.batch_size = static_cast<uint32_t>(opt.batch);
  cfg.updates_per_epoch = static_cast<uint32_t>(opt.updates_per_epoch);
  cfg.max_epochs = static_cast<uint32_t>(opt.epochs);
  cfg.test_size = static_cast<uint32_t>(opt.test_size);
  cfg.threshold = opt.threshold;
  cfg.seed = opt.seed;
  cfg.dim = static_cast<uint32_t>(opt.dim);
  cfg.workers = static_cast<uint32_t>(opt.workers);
  return cfg;
}

struct RowSink {
  std::vector<std::string> rows;
};

void append_row(const ffa_train_config* cfg, const ffa_epoch_report* report, void* user) {
  auto* sink = static_cast<RowSink*>(user);
  std::string row;
  row += std::to_string(report->epoch);
  row += ',';
  row += task_str(cfg->task);
  row += ',';
  row += pooling_str(cfg->pooling);
  row += ',';
  row += length_label(*cfg);
  row += ',';
  row += fmt_double(cfg->lr);
  row += ',';
  row += std::to_string(cfg->seed);
  row += ',';
  row += fmt_double(report->train_loss);
  row += ',';
  row += fmt_double(report->test_accuracy);
  row += ',';
  row += fmt_wall(report->wall_seconds);
  sink->rows.push_back(std::move(row));
  std::fprintf(stderr, "[%s %s %s lr=%s seed=%" PRIu64 "] epoch %u loss %.6g accuracy %.4f (%.1fs)\n",
               task_str(cfg->task), pooling_str(cfg->pooling), length_label(*cfg).c_str(),
               fmt_double(cfg->lr).c_str(), cfg->seed, report->epoch, report->train_loss,
               report->test_accuracy, report->wall_seconds);
}

std::string csv_document(const std::vector<std::string>& rows) {
  std::string doc = kCsvHeader;
  doc += '\n';
  for (const auto& r : rows) {
    doc += r;
    doc += '\n';
  }
  return doc;
}

json result_summary(const ffa_result* result) {
  ffa_train_config cfg;
  check_status(ffa_result_config(result, &cfg), "result config");
  json j;
  j["task"] = task_str(cfg.task);
  j["pooling"] = pooling_str(cfg.pooling);
  j["length_spec"] = length_label(cfg);
  j["lr"] = cfg.lr;
  j["seed"] = cfg.seed;
  const int64_t solved = ffa_result_solved_epoch(result);
  if (solved >= 0) {
    j["solved_at_epoch"] = solved;
  } else {
    j["solved_at_epoch"] = nullptr;
  }
  j["final_accuracy"] = ffa_result_final_accuracy(result);
  j["epochs_run"] = ffa_result_epoch_count(result);
  return j;
}

void write_run_artifacts(const fs::path& dir, const ffa_result* result,
                         const std::vector<std::string>& rows) {
  write_file_atomic(dir / "epochs.csv", csv_document(rows));
  write_file_atomic(dir / "result.json", owned_string(ffa_result_json(result)));
  ffa_model* model = nullptr;
  check_status(ffa_result_model(result, &model), "final model");
  ModelHandle guard(model);
  write_file_atomic(dir / "checkpoint.json", owned_string(ffa_model_checkpoint_json(model)));
}

// ---- subcommands ----

int cmd_train(const Options& opt) {
  const auto cfg = build_config(opt, false);
  RowSink sink;
  ffa_result* raw = nullptr;
  check_status(ffa_train(&cfg, append_row, &sink, &raw), "train");
  ResultHandle result(raw);
  write_run_artifacts(fs::path(opt.out_dir), result.ptr, sink.rows);
  const auto summary = result_summary(result.ptr);
  std::printf("%s\n", summary.dump().c_str());
  return 0;
}

int cmd_sweep(const Options& opt) {
  auto grid = opt.lr_grid;
  if (grid.empty()) grid = {0.0003, 0.001, 0.003, 0.01};
  const auto base = build_config(opt, false);

  RowSink sink;
  std::vector<ffa_result*> raw(grid.size(), nullptr);
  size_t best_index = 0;
  check_status(
      ffa_lr_sweep(&base, grid.data(), grid.size(), append_row, &sink, raw.data(), &best_index),
      "sweep");
  std::vector<ResultHandle> results;
  results.reserve(raw.size());
  for (auto* r : raw) results.emplace_back(r);

  const fs::path dir(opt.out_dir);
  write_file_atomic(dir / "epochs.csv", csv_document(sink.rows));
  json summary;
  summary["grid"] = grid;
  summary["best_index"] = best_index;
  summary["best_lr"] = grid[best_index];
  json runs = json::array();
  for (const auto& r : results) runs.push_back(result_summary(r.ptr));
  summary["runs"] = std::move(runs);
  write_file_atomic(dir / "sweep.json", summary.dump(2));
  write_file_atomic(dir / "result.json", owned_string(ffa_result_json(results[best_index].ptr)));
  ffa_model* model = nullptr;
  check_status(ffa_result_model(results[best_index].ptr, &model), "final model");
  ModelHandle guard(model);
  write_file_atomic(dir / "checkpoint.json", owned_string(ffa_model_checkpoint_json(model)));
  std::printf("%s\n", summary.dump().c_str());
  return 0;
}

int cmd_table1(const Options& opt, bool task_given, bool pooling_given) {
  auto grid = opt.lr_grid;
  if (grid.empty()) grid = {0.0003, 0.001, 0.003, 0.01};
  auto t0_list = opt.t0_list;
  if (t0_list.empty()) t0_list = {50, 100, 500};
  auto seeds = opt.seeds;
  if (seeds.empty()) seeds = {opt.seed};

  std::vector<int> tasks = task_given ? std::vector<int>{task_id(opt.task)}
                                      : std::vector<int>{FFA_TASK_ADDITION, FFA_TASK_MULTIPLICATION};
  std::vector<int> poolings = pooling_given
                                  ? std::vector<int>{pooling_id(opt.pooling)}
                                  : std::vector<int>{FFA_POOLING_ATTENTION, FFA_POOLING_MEAN};

  RowSink sink;
  std::string table = "task,t0,pooling,seed,best_lr,solved_epoch,final_accuracy\n";
  json report = json::array();
  bool check_failed = false;

  for (int task : tasks) {
    for (int t0 : t0_list) {
      for (int pooling : poolings) {
        for (std::uint64_t seed : seeds) {
          Options cell = opt;
          cell.task = task_str(task);
          cell.pooling = pooling_str(pooling);
          cell.t0 = t0;
          cell.len_lo = cell.len_hi = 0;
          cell.seed = seed;
          const auto base = build_config(cell, false);

          std::vector<ffa_result*> raw(grid.size(), nullptr);
          size_t best_index = 0;
          check_status(ffa_lr_sweep(&base, grid.data(), grid.size(), append_row, &sink,
                                    raw.data(), &best_index),
                       "table1 sweep");
          std::vector<ResultHandle> results;
          for (auto* r : raw) results.emplace_back(r);
          const ffa_result* best = results[best_index].ptr;

          const int64_t solved = ffa_result_solved_epoch(best);
          const double final_acc = ffa_result_final_accuracy(best);
          table += std::string(task_str(task)) + "," + std::to_string(t0) + "," +
                   pooling_str(pooling) + "," + std::to_string(seed) + "," +
                   fmt_double(grid[best_index]) + "," +
                   (solved >= 0 ? std::to_string(solved) : "") + "," + fmt_double(final_acc) +
                   "\n";

          json cell_report = result_summary(best);
          cell_report["t0"] = t0;
          cell_report["best_lr"] = grid[best_index];
          report.push_back(std::move(cell_report));

          if (opt.check && pooling == FFA_POOLING_ATTENTION) {
            const int64_t budget = task == FFA_TASK_ADDITION ? 5 : 15;
            if (solved < 0 || solved > budget) check_failed = true;
          }
        }
      }
    }
  }

  const fs::path dir(opt.out_dir);
  write_file_atomic(dir / "epochs.csv", csv_document(sink.rows));
  write_file_atomic(dir / "table1.csv", table);
  write_file_atomic(dir / "table1.json", json{{"cells", report}}.dump(2));
  std::printf("%s", table.c_str());
  if (opt.check && check_failed) {
    std::fprintf(stderr, "table1 --check: an attention cell missed its epoch budget\n");
    return 3;
  }
  return 0;
}

int cmd_varlen(const Options& opt, bool both_poolings) {
  std::vector<int> poolings = both_poolings
                                  ? std::vector<int>{FFA_POOLING_ATTENTION, FFA_POOLING_MEAN}
                                  : std::vector<int>{pooling_id(opt.pooling)};
  const fs::path dir(opt.out_dir);
  json summary;
  double acc_by_pooling[2] = {-1.0, -1.0};

  for (int pooling : poolings) {
    Options run_opt = opt;
    run_opt.pooling = pooling_str(pooling);
    const auto cfg = build_config(run_opt, true);
    RowSink sink;
    ffa_result* raw = nullptr;
    check_status(ffa_train(&cfg, append_row, &sink, &raw), "varlen train");
    ResultHandle result(raw);
    write_run_artifacts(dir / pooling_str(pooling), result.ptr, sink.rows);
    summary[pooling_str(pooling)] = result_summary(result.ptr);
    acc_by_pooling[pooling] = ffa_result_final_accuracy(result.ptr);
  }
  write_file_atomic(dir / "varlen.json", summary.dump(2));
  std::printf("%s\n", summary.dump().c_str());

  if (opt.check) {
    if (acc_by_pooling[FFA_POOLING_ATTENTION] >= 0 &&
        acc_by_pooling[FFA_POOLING_ATTENTION] < opt.min_accuracy) {
      std::fprintf(stderr, "varlen --check: attention accuracy %.4f below %.4f\n",
                   acc_by_pooling[FFA_POOLING_ATTENTION], opt.min_accuracy);
      return 3;
    }
    if (both_poolings && acc_by_pooling[FFA_POOLING_MEAN] >= acc_by_pooling[FFA_POOLING_ATTENTION]) {
      std::fprintf(stderr, "varlen --check: mean pooling (%.4f) not below attention (%.4f)\n",
                   acc_by_pooling[FFA_POOLING_MEAN], acc_by_pooling[FFA_POOLING_ATTENTION]);
      return 3;
    }
  }
  return 0;
}

int cmd_gradcheck(const Options& opt) {
  ffa_gradcheck_summary summary;
  char* report = nullptr;
  check_status(ffa_gradcheck(opt.seed, static_cast<uint32_t>(opt.configs), opt.fd_step,
                             opt.tolerance, &summary, &report),
               "gradcheck");
  std::printf("%s\n", owned_string(report).c_str());
  if (!summary.pass) {
    std::fprintf(stderr, "gradcheck: max relative error %.3g exceeds %.3g\n",
                 summary.max_rel_error, summary.tolerance);
    return 2;
  }
  return 0;
}

int cmd_bench(const Options& opt) {
  std::vector<uint32_t> counts(opt.worker_counts.begin(), opt.worker_counts.end());
  std::vector<ffa_bench_entry> entries(counts.size());
  char* report = nullptr;
  const int t0 = opt.t0 > 0 ? opt.t0 : 1000;
  check_status(ffa_bench(static_cast<uint32_t>(t0), static_cast<uint32_t>(opt.batch),
                         static_cast<uint32_t>(opt.dim), opt.seed, counts.data(), counts.size(),
                         static_cast<uint32_t>(opt.reps), entries.data(), &report),
               "bench");
  const std::string doc = owned_string(report);
  write_file_atomic(fs::path(opt.out_dir) / "bench.json", doc);
  for (const auto& e : entries) {
    std::printf("workers=%u steps/s=%.3g speedup=%.2f max_output_delta=%.3g\n", e.workers,
                e.steps_per_second, e.speedup, e.max_output_delta);
  }
  return 0;
}

int cmd_dump(const Options& opt) {
  Options o = opt;
  const auto cfg = build_config(o, false);
  fs::create_directories(opt.out_dir);
  const fs::path path = fs::path(opt.out_dir) / "dataset.jsonl";
  fs::path tmp = path;
  tmp += ".tmp";
  check_status(ffa_dump_dataset(cfg.task, cfg.length_kind, cfg.t0, cfg.len_lo, cfg.len_hi,
                                static_cast<uint32_t>(opt.count), opt.seed, tmp.c_str()),
               "dump");
  fs::rename(tmp, path);
  std::printf("wrote %d instances to %s\n", opt.count, path.c_str());
  return 0;
}

void add_length_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("--t0", opt.t0, "fixed nominal length; T drawn from [T0, 1.1*T0]");
  cmd->add_option("--len-lo", opt.len_lo, "variable-length lower bound");
  cmd->add_option("--len-hi", opt.len_hi, "variable-length upper bound");
}

void add_protocol_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("--seed", opt.seed, "random seed");
  cmd->add_option("--epochs,--max-epochs", opt.epochs, "max epochs");
  cmd->add_option("--batch", opt.batch, "minibatch size");
  cmd->add_option("--updates-per-epoch", opt.updates_per_epoch, "parameter updates per epoch");
  cmd->add_option("--test-size", opt.test_size, "held-out test set size");
  cmd->add_option("--threshold", opt.threshold, "accuracy criterion |error| < threshold");
  cmd->add_option("--dim", opt.dim, "hidden dimensionality D");
  cmd->add_option("--workers", opt.workers, "worker threads (0 = hardware)");
  cmd->add_option("--out", opt.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feed-forward attention on the addition/multiplication long-term memory tasks"};
  app.require_subcommand(1);
  Options opt;

  auto* train = app.add_subcommand("train", "train one model; writes epochs.csv, result.json, checkpoint.json");
  train->add_option("--task", opt.task, "addition|multiplication");
  train->add_option("--pooling", opt.pooling, "attention|mean");
  add_length_flags(train, opt);
  train->add_option("--lr", opt.lr, "learning rate");
  add_protocol_flags(train, opt);

  auto* sweep = app.add_subcommand("sweep", "train once per learning rate, report the best");
  sweep->add_option("--task", opt.task, "addition|multiplication");
  sweep->add_option("--pooling", opt.pooling, "attention|mean");
  add_length_flags(sweep, opt);
  sweep->add_option("--lr-grid", opt.lr_grid, "learning rates")->delimiter(',');
  add_protocol_flags(sweep, opt);

  auto* table1 = app.add_subcommand("table1", "fixed-length grid over tasks, lengths and pooling modes");
  auto* table1_task = table1->add_option("--task", opt.task, "restrict to one task");
  auto* table1_pooling = table1->add_option("--pooling", opt.pooling, "restrict to one pooling mode");
  table1->add_option("--t0-list", opt.t0_list, "nominal lengths")->delimiter(',');
  table1->add_option("--lr-grid", opt.lr_grid, "learning rates")->delimiter(',');
  table1->add_option("--seeds", opt.seeds, "one grid row per seed")->delimiter(',');
  table1->add_flag("--check", opt.check, "exit 3 if an attention cell misses its epoch budget");
  add_protocol_flags(table1, opt);

  auto* varlen = app.add_subcommand("varlen", "variable-length training (default range 50-1000)");
  varlen->add_option("--task", opt.task, "addition|multiplication");
  bool varlen_both = false;
  auto* varlen_pooling = varlen->add_option("--pooling", opt.pooling, "attention|mean|both");
  add_length_flags(varlen, opt);
  varlen->add_option("--lr", opt.lr, "learning rate");
  varlen->add_flag("--check", opt.check, "exit 3 if accuracy thresholds are missed");
  varlen->add_option("--min-accuracy", opt.min_accuracy, "attention accuracy floor for --check");
  add_protocol_flags(varlen, opt);

  auto* gradcheck = app.add_subcommand("gradcheck", "analytic gradients vs finite differences");
  gradcheck->add_option("--seed", opt.seed, "random seed");
  gradcheck->add_option("--configs", opt.configs, "number of random configurations");
  gradcheck->add_option("--fd-step", opt.fd_step, "central-difference step");
  gradcheck->add_option("--tolerance", opt.tolerance, "max relative error");

  auto* bench = app.add_subcommand("bench", "forward+backward throughput per worker count");
  bench->add_option("--t0", opt.t0, "nominal length (default 1000)");
  bench->add_option("--batch", opt.batch, "batch size");
  bench->add_option("--dim", opt.dim, "hidden dimensionality D");
  bench->add_option("--seed", opt.seed, "random seed");
  bench->add_option("--worker-counts", opt.worker_counts, "worker counts")->delimiter(',');
  bench->add_option("--reps", opt.reps, "timed repetitions");
  bench->add_option("--out", opt.out_dir, "output directory");

  auto* dump = app.add_subcommand("dump", "write instances as line-delimited JSON");
  dump->add_option("--task", opt.task, "addition|multiplication");
  add_length_flags(dump, opt);
  dump->add_option("--count", opt.count, "number of instances");
  dump->add_option("--seed", opt.seed, "random seed");
  dump->add_option("--out", opt.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(train)) return cmd_train(opt);
    if (app.got_subcommand(sweep)) return cmd_sweep(opt);
    if (app.got_subcommand(table1)) {
      return cmd_table1(opt, table1_task->count() > 0, table1_pooling->count() > 0);
    }
    if (app.got_subcommand(varlen)) {
      varlen_both = varlen_pooling->count() > 0 && opt.pooling == "both";
      if (varlen_both) opt.pooling = "attention";
      return cmd_varlen(opt, varlen_both);
    }
    if (app.got_subcommand(gradcheck)) return cmd_gradcheck(opt);
    if (app.got_subcommand(bench)) return cmd_bench(opt);
    if (app.got_subcommand(dump)) return cmd_dump(opt);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
