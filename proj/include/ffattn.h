/* ffattn: feed-forward attention models for the addition/multiplication
 * long-term memory tasks. C API over the C++ core: opaque handles, status
 * codes, strings released with ffa_string_free. Not thread-safe per
 * handle; distinct handles may be used concurrently.
 */
#ifndef FFATTN_H
#define FFATTN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FFA_API __declspec(dllexport)
#else
#define FFA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ffa_status {
  FFA_OK = 0,
  FFA_ERR_USAGE = 1,    /* malformed arguments */
  FFA_ERR_SHAPE = 2,    /* tensor dimension mismatch */
  FFA_ERR_NUMERIC = 3,  /* NaN/Inf where finite required */
  FFA_ERR_IO = 4,       /* file or parse failure */
  FFA_ERR_INTERNAL = 5
} ffa_status;

typedef enum ffa_task {
  FFA_TASK_ADDITION = 0,
  FFA_TASK_MULTIPLICATION = 1
} ffa_task;

typedef enum ffa_pooling {
  FFA_POOLING_ATTENTION = 0,
  FFA_POOLING_MEAN = 1
} ffa_pooling;

typedef enum ffa_length_kind {
  FFA_LENGTH_FIXED = 0, /* T uniform in [t0, floor(1.1*t0)] */
  FFA_LENGTH_RANGE = 1  /* T uniform in [len_lo, len_hi] */
} ffa_length_kind;

/* Opaque handles */
typedef struct ffa_model ffa_model;   /* parameters (+ optional optimizer state) */
typedef struct ffa_result ffa_result; /* finished training run */

typedef struct ffa_train_config {
  int task;          /* ffa_task */
  int pooling;       /* ffa_pooling */
  int length_kind;   /* ffa_length_kind */
  uint32_t t0;       /* FFA_LENGTH_FIXED */
  uint32_t len_lo;   /* FFA_LENGTH_RANGE */
  uint32_t len_hi;
  double lr;
  uint32_t batch_size;
  uint32_t updates_per_epoch;
  uint32_t max_epochs;
  uint32_t test_size;
  double threshold;
  uint64_t seed;
  uint32_t dim;
  uint32_t workers; /* 0 = hardware concurrency */
} ffa_train_config;

typedef struct ffa_epoch_report {
  uint32_t epoch; /* 1-based */
  double train_loss;
  double test_accuracy;
  double wall_seconds;
} ffa_epoch_report;

typedef void (*ffa_epoch_fn)(const ffa_train_config* cfg, const ffa_epoch_report* report,
                             void* user);

typedef struct ffa_gradcheck_summary {
  double max_rel_error;
  double tolerance;
  int32_t configs_checked;
  int32_t pass;
} ffa_gradcheck_summary;

typedef struct ffa_bench_entry {
  uint32_t workers;
  double steps_per_second;
  double speedup;          /* vs the first worker count */
  double max_output_delta; /* vs the first worker count */
} ffa_bench_entry;

FFA_API const char* ffa_version(void);
FFA_API const char* ffa_status_name(ffa_status status);
/* Message of the last failure on this thread; owned by the library. */
FFA_API const char* ffa_last_error(void);
FFA_API void ffa_string_free(char* s);

/* Paper-protocol defaults: addition, attention, Fixed(50), lr .001,
 * batch 100, 1000 updates/epoch, 100 epochs max, test 1000, threshold
 * .04, seed 1, D 100. */
FFA_API void ffa_train_config_init(ffa_train_config* cfg);

/* Runs the full protocol. on_epoch (may be NULL) fires after every epoch.
 * On success *out owns the run; release with ffa_result_free. */
FFA_API ffa_status ffa_train(const ffa_train_config* cfg, ffa_epoch_fn on_epoch, void* user,
                             ffa_result** out);

/* Trains once per learning rate with identical seed handling and fills
 * results[0..n_lrs). *best_index picks the winner: earliest solve, then
 * highest final accuracy, then lowest learning rate. */
FFA_API ffa_status ffa_lr_sweep(const ffa_train_config* base, const double* lrs, size_t n_lrs,
                                ffa_epoch_fn on_epoch, void* user, ffa_result** results,
                                size_t* best_index);

FFA_API void ffa_result_free(ffa_result* result);
FFA_API uint32_t ffa_result_epoch_count(const ffa_result* result);
FFA_API ffa_status ffa_result_epoch(const ffa_result* result, uint32_t index,
                                    ffa_epoch_report* out);
/* -1 when the run never reached 100% test accuracy */
FFA_API int64_t ffa_result_solved_epoch(const ffa_result* result);
FFA_API double ffa_result_final_accuracy(const ffa_result* result);
FFA_API ffa_status ffa_result_config(const ffa_result* result, ffa_train_config* out);
/* 1 if a is strictly better than b under the sweep ordering */
FFA_API int ffa_result_is_better(const ffa_result* a, const ffa_result* b);
/* Run summary with the resolved config, as a JSON document. */
FFA_API char* ffa_result_json(const ffa_result* result);
/* Clone of the final parameters + optimizer state. */
FFA_API ffa_status ffa_result_model(const ffa_result* result, ffa_model** out);

/* Fresh Gaussian-initialized parameters (weights std 1/sqrt(fan-in),
 * zero biases). */
FFA_API ffa_status ffa_model_init(uint32_t dim, int pooling, uint64_t seed, ffa_model** out);
FFA_API void ffa_model_free(ffa_model* model);
FFA_API uint64_t ffa_model_param_count(const ffa_model* model);
/* Checkpoint document: tensors by name, D, pooling, optimizer state when
 * present. Round-trips exactly. */
FFA_API char* ffa_model_checkpoint_json(const ffa_model* model);
FFA_API ffa_status ffa_model_from_checkpoint_json(const char* text, ffa_model** out);
/* inputs: t_len rows of (value, marker), row-major */
FFA_API ffa_status ffa_model_predict(const ffa_model* model, const double* inputs,
                                     uint32_t t_len, double* y_out);
/* Accuracy on a freshly generated held-out set: fraction of instances
 * with |y - target| < threshold (strict). */
FFA_API ffa_status ffa_model_evaluate(const ffa_model* model, int task, int length_kind,
                                      uint32_t t0, uint32_t len_lo, uint32_t len_hi, uint32_t n,
                                      uint64_t seed, double threshold, uint32_t workers,
                                      double* accuracy);

/* Analytic gradients vs central finite differences over n_configs random
 * small configurations. *json_report (optional) receives the full
 * per-tensor report. */
FFA_API ffa_status ffa_gradcheck(uint64_t seed, uint32_t n_configs, double fd_step,
                                 double tolerance, ffa_gradcheck_summary* out,
                                 char** json_report);

/* Output invariance under random time permutations and the XY/YX order
 * probes; *ok = 1 on invariance. */
FFA_API ffa_status ffa_check_permutation_invariance(const ffa_model* model, uint32_t t_len,
                                                    uint32_t trials, uint64_t seed, int* ok);

/* Attention with W_hc = 0 must equal mean pooling on a random batch. */
FFA_API ffa_status ffa_check_pooling_equivalence(uint32_t dim, uint32_t t_len, uint32_t batch,
                                                 uint64_t seed, int* ok);

/* Line-delimited instance records {values, markers, target, kind, T}. */
FFA_API ffa_status ffa_dump_dataset(int task, int length_kind, uint32_t t0, uint32_t len_lo,
                                    uint32_t len_hi, uint32_t n, uint64_t seed, const char* path);

/* Forward+backward throughput on one fixed batch per worker count;
 * entries[i] corresponds to worker_counts[i]. Outputs must not change
 * with the worker count. */
FFA_API ffa_status ffa_bench(uint32_t t0, uint32_t batch, uint32_t dim, uint64_t seed,
                             const uint32_t* worker_counts, size_t n_counts, uint32_t reps,
                             ffa_bench_entry* entries, char** json_report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FFATTN_H */
