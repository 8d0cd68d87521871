#include "trainer.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "errors.hpp"

namespace ffattn {

namespace {

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size < 1) throw UsageError("train: batch_size must be >= 1");
  if (cfg.updates_per_epoch < 1) throw UsageError("train: updates_per_epoch must be >= 1");
  if (cfg.max_epochs < 0) throw UsageError("train: max_epochs must be >= 0");
  if (cfg.test_size < 1) throw UsageError("train: test_size must be >= 1");
  if (!(cfg.threshold > 0.0)) throw UsageError("train: threshold must be > 0");
  if (!(cfg.lr > 0.0)) throw UsageError("train: lr must be > 0");
  if (cfg.dim < 1) throw UsageError("train: dim must be >= 1");
  if (cfg.workers < 0) throw UsageError("train: workers must be >= 0");
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

double evaluate(const ModelParams& params, const std::vector<TaskInstance>& test_set,
                double threshold, ThreadPool* pool) {
  if (test_set.empty()) throw UsageError("evaluate: empty test set");
  if (!(threshold > 0.0)) throw UsageError("evaluate: threshold must be > 0");
  std::vector<unsigned char> correct(test_set.size(), 0);
  parallel_for(pool, static_cast<std::int64_t>(test_set.size()),
               [&](std::int64_t begin, std::int64_t end) {
                 for (std::int64_t i = begin; i < end; ++i) {
                   const auto& inst = test_set[static_cast<std::size_t>(i)];
                   const auto cache = forward(params, batch_from_instance(inst));
                   const double err = std::abs(cache.y[0] - inst.target);
                   correct[static_cast<std::size_t>(i)] = err < threshold ? 1 : 0;
                 }
               });
  std::size_t n_correct = 0;
  for (unsigned char c : correct) n_correct += c;
  return static_cast<double>(n_correct) / static_cast<double>(test_set.size());
}

RunResult train(const TrainConfig& config, const EpochCallback& on_epoch) {
  validate(config);
  ThreadPool pool(resolve_workers(config.workers));

  RunResult result;
  result.config = config;
  ModelParams params = init_params(config.dim, config.pooling, config.seed);
  AdamState state(config.dim, config.lr);
  const auto test_set = make_test_set(config.task, config.lengths, config.test_size, config.seed);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    for (int u = 0; u < config.updates_per_epoch; ++u) {
      const auto batch_index = static_cast<std::uint64_t>(state.step_count);
      const auto batch =
          generate_batch(config.task, config.lengths, config.batch_size, config.seed, batch_index);
      const auto cache = forward(params, batch, &pool);
      const double batch_loss = loss(cache, batch.targets);
      if (!std::isfinite(batch_loss)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                           ", update " + std::to_string(u) + " (lr=" + std::to_string(config.lr) +
                           ")");
      }
      const auto grads = backward(params, batch, cache, &pool);
      adam_step(params, grads, state);
      loss_sum += batch_loss;
    }
    const double accuracy = evaluate(params, test_set, config.threshold, &pool);

    EpochReport report;
    report.epoch = epoch;
    report.mean_train_loss = loss_sum / config.updates_per_epoch;
    report.test_accuracy = accuracy;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
    result.reports.push_back(report);
    if (on_epoch) on_epoch(config, report);

    if (accuracy == 1.0) {
      result.solved_at_epoch = epoch;
      break;
    }
  }

  result.final_accuracy = result.reports.empty() ? 0.0 : result.reports.back().test_accuracy;
  result.final_params = std::move(params);
  result.final_state = std::move(state);
  return result;
}

bool result_better(const RunResult& a, const RunResult& b) {
  if (a.solved_at_epoch.has_value() != b.solved_at_epoch.has_value()) {
    return a.solved_at_epoch.has_value();
  }
  if (a.solved_at_epoch && b.solved_at_epoch && *a.solved_at_epoch != *b.solved_at_epoch) {
    return *a.solved_at_epoch < *b.solved_at_epoch;
  }
  if (a.final_accuracy != b.final_accuracy) return a.final_accuracy > b.final_accuracy;
  return a.config.lr < b.config.lr;
}

SweepResult lr_sweep(const TrainConfig& base, const std::vector<double>& lrs,
                     const EpochCallback& on_epoch) {
  if (lrs.empty()) throw UsageError("lr_sweep: empty learning-rate grid");
  SweepResult sweep;
  sweep.runs.reserve(lrs.size());
  for (double lr : lrs) {
    TrainConfig cfg = base;
    cfg.lr = lr;
    sweep.runs.push_back(train(cfg, on_epoch));
  }
  for (std::size_t i = 1; i < sweep.runs.size(); ++i) {
    if (result_better(sweep.runs[i], sweep.runs[sweep.best_index])) sweep.best_index = i;
  }
  return sweep;
}

const std::vector<double>& default_lr_grid() {
  static const std::vector<double> grid = {0.0003, 0.001, 0.003, 0.01};
  return grid;
}

}  // namespace ffattn
