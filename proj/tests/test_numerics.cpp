#include "dga/numerics.hpp"

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dga/rng.hpp"
#include "oracles.hpp"

using namespace dga;

TEST_CASE("matmul identity and small products") {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  CHECK(matmul(Matrix::Identity(2, 2), a) == a);

  Matrix row(1, 2), col(2, 1);
  row << 1, 2;
  col << 3, 4;
  const Matrix prod = matmul(row, col);
  CHECK(prod.rows() == 1);
  CHECK(prod.cols() == 1);
  CHECK(prod(0, 0) == 11.0);
}

TEST_CASE("matmul matches the triple-loop reference") {
  Rng rng(11);
  Matrix a(5, 7), b(7, 3);
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) a(i, j) = rng.uniform(-1, 1);
  for (Index j = 0; j < b.cols(); ++j)
    for (Index i = 0; i < b.rows(); ++i) b(i, j) = rng.uniform(-1, 1);
  const Matrix got = matmul(a, b);
  const Matrix want = oracle::matmul_naive(a, b);
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("matmul rejects mismatched shapes, carrying both") {
  const Matrix a = Matrix::Zero(2, 3);
  const Matrix b = Matrix::Zero(2, 3);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x3"), ShapeError);
}

TEST_CASE("matmul associativity on random conformable triples") {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n1 = 2 + static_cast<Index>(rng.below(5));
    const Index n2 = 2 + static_cast<Index>(rng.below(5));
    const Index n3 = 2 + static_cast<Index>(rng.below(5));
    const Index n4 = 2 + static_cast<Index>(rng.below(5));
    auto fill = [&rng](Index r, Index c) {
      Matrix m(r, c);
      for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) m(i, j) = rng.uniform(-2, 2);
      return m;
    };
    const Matrix a = fill(n1, n2), b = fill(n2, n3), c = fill(n3, n4);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    const double rel = (left - right).norm() / std::max(1.0, right.norm());
    CHECK(rel < 1e-9);
  }
}

TEST_CASE("stable_log_sigmoid") {
  CHECK(stable_log_sigmoid(0.0) == doctest::Approx(-std::numbers::ln2).epsilon(1e-12));

  const double at_1000 = stable_log_sigmoid(1000.0);
  CHECK(std::isfinite(at_1000));
  CHECK(at_1000 <= 0.0);
  CHECK(at_1000 > -1e-300);
  CHECK(at_1000 == doctest::Approx(-std::log1p(std::exp(-1000.0))).epsilon(1e-12));

  CHECK(stable_log_sigmoid(-50.0) == doctest::Approx(-50.0).epsilon(1e-9));
}

TEST_CASE("log_sum_exp basics") {
  const double ln1 = 0.0;
  CHECK(log_sum_exp(std::vector<double>{ln1, ln1}) ==
        doctest::Approx(std::numbers::ln2).epsilon(1e-12));
  CHECK(log_sum_exp(std::vector<double>{-1000.0, -1000.0}) ==
        doctest::Approx(-1000.0 + std::numbers::ln2).epsilon(1e-12));

  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(log_sum_exp(std::vector<double>{ninf, ninf}) == ninf);
  CHECK_THROWS_AS(log_sum_exp(std::vector<double>{}), DomainError);
}

TEST_CASE("log_sum_exp matches a 128-bit accumulated sum") {
  Rng rng(101);
  std::vector<double> values(100);
  for (double& v : values) {
    v = rng.uniform(-30.0, 10.0);
  }
  CHECK(log_sum_exp(values) ==
        doctest::Approx(oracle::log_sum_exp_quad(values)).epsilon(1e-10));
}

TEST_CASE("log_sum_exp shift invariance") {
  Rng rng(17);
  std::vector<double> values(37);
  for (double& v : values) {
    v = rng.uniform(-5.0, 5.0);
  }
  const double base = log_sum_exp(values);
  for (double c : {1.5, -300.0, 250.0}) {
    std::vector<double> shifted = values;
    for (double& v : shifted) {
      v += c;
    }
    CHECK(log_sum_exp(shifted) - c == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("equal seeds give bit-identical streams") {
  Rng a(123456789), b(123456789);
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(a.next_u64() == b.next_u64());
  }
  Rng c(1), d(1);
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(c.uniform01() == d.uniform01());
  }
  // split children are themselves deterministic
  Rng e(9), f(9);
  Rng ce = e.split(), cf = f.split();
  CHECK(ce.next_u64() == cf.next_u64());
  CHECK(e.next_u64() == f.next_u64());
}

TEST_CASE("Rng::below stays in range and covers values") {
  Rng rng(3);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++seen[static_cast<int>(v)];
  }
  for (int count : seen) {
    CHECK(count > 800);  // roughly uniform
  }
  CHECK_THROWS_AS(rng.below(0), DomainError);
}

TEST_CASE("uniform01 lies in [0,1)") {
  Rng rng(44);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}
