#include <cmath>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "numeric.hpp"

using namespace ffattn;

namespace {

// independent oracle: plain accumulate-into-scalar triple loop
Matrix matmul_oracle(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      double sum = 0.0;
      for (int k = 0; k < a.cols(); ++k) sum += a(i, k) * b(k, j);
      out(i, j) = sum;
    }
  }
  return out;
}

Matrix identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

}  // namespace

TEST_SUITE("numeric") {

TEST_CASE("matrix invariants") {
  Matrix m(3, 4);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 4);
  CHECK(m.size() == 12);
  for (double v : m.data()) CHECK(v == 0.0);
  CHECK_THROWS_AS(Matrix(0, 3), UsageError);
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), ShapeError);
}

TEST_CASE("matmul identity") {
  Rng rng(7, 0);
  Matrix m = gaussian_matrix(rng, 3, 3, 1.0);
  Matrix out = matmul(identity(3), m);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(out(i, j) == m(i, j));
}

TEST_CASE("matmul hand example") {
  Matrix a(2, 2, {1, 2, 3, 4});
  Matrix b(2, 1, {1, 1});
  Matrix out = matmul(a, b);
  CHECK(out(0, 0) == 3.0);
  CHECK(out(1, 0) == 7.0);
}

TEST_CASE("matmul matches triple-loop oracle") {
  Rng rng(11, 1);
  Matrix a = gaussian_matrix(rng, 5, 7, 1.0);
  Matrix b = gaussian_matrix(rng, 7, 3, 1.0);
  Matrix got = matmul(a, b);
  Matrix want = matmul_oracle(a, b);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(got(i, j) - want(i, j)) < 1e-12);
}

TEST_CASE("matmul shape error names both shapes") {
  Matrix a(2, 3);
  Matrix b(2, 3);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("(2x3)"), ShapeError);
}

TEST_CASE("matmul associativity on random triples") {
  Rng rng(13, 2);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix a = gaussian_matrix(rng, 4, 6, 1.0);
    Matrix b = gaussian_matrix(rng, 6, 5, 1.0);
    Matrix c = gaussian_matrix(rng, 5, 3, 1.0);
    Matrix left = matmul(matmul(a, b), c);
    Matrix right = matmul(a, matmul(b, c));
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double scale = std::max({std::abs(left(i, j)), std::abs(right(i, j)), 1.0});
        CHECK(std::abs(left(i, j) - right(i, j)) / scale < 1e-9);
      }
    }
  }
}

TEST_CASE("gaussian_matrix statistics") {
  Rng rng(42, 3);
  Matrix m = gaussian_matrix(rng, 100, 100, 0.1);
  double mean = 0.0;
  for (double v : m.data()) mean += v;
  mean /= m.size();
  double var = 0.0;
  for (double v : m.data()) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (m.size() - 1));
  CHECK(mean > -0.005);
  CHECK(mean < 0.005);
  CHECK(sd > 0.097);
  CHECK(sd < 0.103);
}

TEST_CASE("gaussian_matrix rejects non-positive std") {
  Rng rng(1, 0);
  CHECK_THROWS_AS(gaussian_matrix(rng, 2, 2, 0.0), UsageError);
  CHECK_THROWS_AS(gaussian_matrix(rng, 2, 2, -1.0), UsageError);
}

TEST_CASE("gaussian_matrix determinism") {
  Rng a(99, 5);
  Rng b(99, 5);
  Matrix ma = gaussian_matrix(a, 8, 9, 0.5);
  Matrix mb = gaussian_matrix(b, 8, 9, 0.5);
  CHECK(ma.data() == mb.data());
}

TEST_CASE("softmax uniform case") {
  std::vector<double> e = {0.0, 0.0, 0.0, 0.0};
  auto a = softmax(e);
  for (double v : a) CHECK(v == 0.25);
}

TEST_CASE("softmax closed form") {
  std::vector<double> e = {0.0, std::log(3.0)};
  auto a = softmax(e);
  CHECK(a[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("softmax large inputs do not overflow") {
  std::vector<double> e = {1000.0, 1000.0};
  auto a = softmax(e);
  CHECK(a[0] == 0.5);
  CHECK(a[1] == 0.5);
}

TEST_CASE("softmax shift invariance") {
  Rng rng(5, 9);
  std::vector<double> e(17);
  for (double& v : e) v = rng.uniform(-3.0, 3.0);
  for (double shift : {1.0, -7.5, 123.25}) {
    std::vector<double> shifted = e;
    for (double& v : shifted) v += shift;
    auto a = softmax(e);
    auto b = softmax(shifted);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::abs(a[i] - b[i]) < 1e-12);
      CHECK(a[i] > 0.0);
      CHECK(a[i] < 1.0);
      sum += a[i];
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("softmax empty input") {
  std::vector<double> e;
  CHECK_THROWS_AS(softmax(e), UsageError);
}

TEST_CASE("lrelu values") {
  CHECK(lrelu(2.0) == 2.0);
  CHECK(lrelu(-1.0) == -0.01);
  CHECK(lrelu(0.0) == 0.0);
  CHECK(lrelu_deriv(3.0) == 1.0);
  CHECK(lrelu_deriv(-3.0) == 0.01);
  CHECK(lrelu_deriv(0.0) == 1.0);
}

TEST_CASE("lrelu piecewise bounds") {
  Rng rng(3, 4);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-50.0, 50.0);
    const double y = lrelu(x);
    CHECK(y >= 0.01 * x);
    CHECK(y >= x - std::abs(x));
  }
}

TEST_CASE("lrelu elementwise over matrix") {
  Matrix m(1, 3, {-2.0, 0.0, 5.0});
  Matrix out = lrelu(m);
  CHECK(out(0, 0) == -0.02);
  CHECK(out(0, 1) == 0.0);
  CHECK(out(0, 2) == 5.0);
}

}  // TEST_SUITE
