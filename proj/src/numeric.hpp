#pragma once

#include <span>
#include <vector>

#include "rng.hpp"

namespace ffattn {

// Dense row-major matrix of 64-bit reals. The whole artifact runs in
// double precision; gradient checks to 1e-5 relative error are not
// attainable in single precision.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);  // zero-filled
  Matrix(int rows, int cols, std::vector<double> data);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  void fill(double v);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Standard product; throws ShapeError naming both shapes on mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);

// Entries i.i.d. Normal(0, stddev^2); stddev must be > 0 (zero-init is
// spelled as a plain zero-filled Matrix, not a degenerate Gaussian).
Matrix gaussian_matrix(Rng& rng, int rows, int cols, double stddev);

// Max-subtracted softmax; the shift makes it overflow-proof and is exact
// up to rounding since softmax is shift invariant.
std::vector<double> softmax(std::span<const double> e);
void softmax(std::span<const double> e, std::span<double> out);

// Dot product with a fixed 8-lane partial-sum scheme. The reduction order
// is a function of n alone, so results are bit-stable across runs and
// worker counts while still vectorizing without reassociation flags.
inline double dot(const double* a, const double* b, int n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return (((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))) +
         tail;
}

// leaky rectifier, max(x, .01x)
inline double lrelu(double x) { return x > 0.0 ? x : 0.01 * x; }
// slope of lrelu; the measure-zero point x == 0 is pinned to 1 for
// determinism. lrelu preserves sign, so this may be fed either the
// pre-activation or the activation itself.
inline double lrelu_deriv(double x) { return x < 0.0 ? 0.01 : 1.0; }

Matrix lrelu(const Matrix& m);

}  // namespace ffattn
