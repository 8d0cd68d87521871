#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "optim.hpp"
#include "tasks.hpp"

namespace ffattn {

// One experiment. Defaults are the experimental protocol: minibatches of
// 100 sequences, an epoch of exactly 1000 parameter updates, a frozen
// held-out test set of 1000 sequences scored every epoch with the .04
// accuracy criterion, stopping at 100% accuracy or after 100 epochs.
struct TrainConfig {
  TaskKind task = TaskKind::kAddition;
  LengthSpec lengths = LengthSpec::fixed(50);
  Pooling pooling = Pooling::kAttention;
  double lr = 0.001;
  int batch_size = 100;
  int updates_per_epoch = 1000;
  int max_epochs = 100;
  int test_size = 1000;
  double threshold = 0.04;
  std::uint64_t seed = 1;
  int dim = 100;
  int workers = 0;  // 0: hardware concurrency
};

struct EpochReport {
  int epoch = 0;  // 1-based
  double mean_train_loss = 0.0;
  double test_accuracy = 0.0;
  double wall_seconds = 0.0;
};

struct RunResult {
  std::vector<EpochReport> reports;
  std::optional<int> solved_at_epoch;  // first epoch with accuracy 1.0
  double final_accuracy = 0.0;
  TrainConfig config;
  ModelParams final_params;
  AdamState final_state;
};

// Fraction of instances with |y - target| < threshold (strict).
double evaluate(const ModelParams& params, const std::vector<TaskInstance>& test_set,
                double threshold, ThreadPool* pool = nullptr);

using EpochCallback = std::function<void(const TrainConfig&, const EpochReport&)>;

// Runs the full protocol; deterministic given the config (wall_seconds
// aside). Throws NumericError with epoch/update/lr context if the loss
// leaves the reals.
RunResult train(const TrainConfig& config, const EpochCallback& on_epoch = {});

// Strictly-better ordering used to pick the winner of a sweep: earlier
// solve, then higher final accuracy, then lower learning rate.
bool result_better(const RunResult& a, const RunResult& b);

struct SweepResult {
  std::vector<RunResult> runs;  // one per learning rate, input order
  std::size_t best_index = 0;
};

// Trains once per learning rate with identical seed handling.
SweepResult lr_sweep(const TrainConfig& base, const std::vector<double>& lrs,
                     const EpochCallback& on_epoch = {});

// The fixed-length experiment's grid {.0003, .001, .003, .01}.
const std::vector<double>& default_lr_grid();

}  // namespace ffattn
