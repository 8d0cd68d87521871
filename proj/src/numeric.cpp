#include "numeric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace ffattn {

namespace {

std::string shape_str(int r, int c) {
  return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
}

void check_dims(int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw UsageError("matrix dimensions must be positive, got " + shape_str(rows, cols));
  }
}

}  // namespace

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  check_dims(rows, cols);
  data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  check_dims(rows, cols);
  if (data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match " + shape_str(rows, cols));
  }
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: incompatible shapes " + shape_str(a.rows(), a.cols()) +
                     " x " + shape_str(b.rows(), b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  // i-k-j order: unit-stride inner loop, and out(i,j) still accumulates
  // over k ascending
  for (int i = 0; i < a.rows(); ++i) {
    double* out_row = out.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const double* b_row = b.row(k);
      for (int j = 0; j < b.cols(); ++j) {
        out_row[j] += aik * b_row[j];
      }
    }
  }
  return out;
}

Matrix gaussian_matrix(Rng& rng, int rows, int cols, double stddev) {
  if (!(stddev > 0.0)) throw UsageError("gaussian_matrix: stddev must be > 0");
  Matrix out(rows, cols);
  for (double& v : out.data()) v = rng.gaussian(stddev);
  return out;
}

void softmax(std::span<const double> e, std::span<double> out) {
  if (e.empty()) throw UsageError("softmax: empty input");
  if (out.size() != e.size()) {
    throw ShapeError("softmax: output length " + std::to_string(out.size()) +
                     " does not match input length " + std::to_string(e.size()));
  }
  double m = e[0];
  for (double v : e) m = std::max(m, v);
  double denom = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    out[i] = std::exp(e[i] - m);
    denom += out[i];
  }
  for (double& v : out) v /= denom;
}

std::vector<double> softmax(std::span<const double> e) {
  std::vector<double> out(e.size());
  softmax(e, out);
  return out;
}

Matrix lrelu(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data()) v = lrelu(v);
  return out;
}

}  // namespace ffattn
