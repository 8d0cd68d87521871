#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "model.hpp"
#include "tasks.hpp"

namespace ffattn {

// (f(x+h) - f(x-h)) / 2h
double central_difference(const std::function<double(double)>& f, double x, double h);

// Loss gradient by central differences with fresh forward passes; the
// independent oracle for backward().
Gradients finite_difference_gradient(const ModelParams& params, const SequenceBatch& batch,
                                     double h = 1e-6);

// |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double a, double b);

struct GradCheckReport {
  struct TensorStat {
    std::string tensor;
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
  };
  std::vector<TensorStat> per_tensor;
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  int configs_checked = 0;
  double tolerance = 1e-5;
  bool pass = false;
};

// backward() vs the finite-difference oracle on one (params, batch).
GradCheckReport check_gradients(const ModelParams& params, const SequenceBatch& batch,
                                double h = 1e-6, double tolerance = 1e-5);

// n_configs random configurations spanning D in {1,3,10}, T in {1,2,17},
// B in {1,4}, alternating pooling modes; reports the worst coordinate
// over all of them.
GradCheckReport run_gradcheck_suite(std::uint64_t seed, int n_configs = 20, double h = 1e-6,
                                    double tolerance = 1e-5);

// True iff the output is unchanged (within tol) under `trials` random
// time permutations of the instance, and the XY/YX order probes of the
// same length map to equal outputs. T=1 is vacuously true.
bool check_permutation_invariance(const ModelParams& params, const TaskInstance& instance,
                                  int trials, std::uint64_t seed, double tol = 1e-10);

// With W_hc zeroed (b_hc arbitrary), attention pooling must match mean
// pooling on every sequence of the batch within tol.
bool check_pooling_equivalence(int dim, const SequenceBatch& batch, std::uint64_t seed,
                               double tol = 1e-12);

}  // namespace ffattn
