#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "stoc/la.hpp"

using namespace stoc;

TEST_CASE("tridiagonal multiply and SPD check") {
  TriDiagonalMatrix m(3);
  m.diag = {2.0, 2.0, 2.0};
  m.sub = {-1.0, -1.0};
  m.super = {-1.0, -1.0};
  CHECK(m.is_symmetric());
  CHECK(tridiagonal_is_spd(m));

  const std::vector<double> x = {1.0, 2.0, 3.0};
  std::vector<double> y(3);
  m.multiply(x.data(), y.data());
  CHECK(y[0] == doctest::Approx(0.0));
  CHECK(y[1] == doctest::Approx(0.0));
  CHECK(y[2] == doctest::Approx(4.0));

  m.diag[0] = -1.0;
  CHECK_FALSE(tridiagonal_is_spd(m));
}

TEST_CASE("sparse assembly accumulates duplicates deterministically") {
  std::vector<SparseSymMatrix::Triplet> t = {{0, 1, 0.5}, {0, 0, 1.0}, {1, 0, 0.5}, {0, 1, 0.25}, {1, 1, 2.0}};
  const SparseSymMatrix m = SparseSymMatrix::from_triplets(2, t);
  CHECK(m.entry(0, 0) == doctest::Approx(1.0));
  CHECK(m.entry(0, 1) == doctest::Approx(0.75));
  CHECK(m.entry(1, 0) == doctest::Approx(0.5));
  CHECK(m.nnz() == 4);
  CHECK(m.structurally_symmetric());
}

TEST_CASE("sparse matvec counts applications") {
  std::vector<SparseSymMatrix::Triplet> t = {{0, 0, 2.0}, {1, 1, 3.0}};
  const SparseSymMatrix m = SparseSymMatrix::from_triplets(2, t);
  std::vector<double> x = {1.0, 1.0}, y(2);
  CHECK(m.multiply_count() == 0);
  m.multiply(x.data(), y.data());
  m.multiply(x.data(), y.data());
  CHECK(m.multiply_count() == 2);
}

TEST_CASE("generalized eigensolve returns M-orthonormal ascending pairs") {
  // A = [[2,1],[1,2]], M = diag-ish tridiagonal
  DenseSymMatrix a(2);
  a(0, 0) = 2.0;
  a(0, 1) = 1.0;
  a(1, 0) = 1.0;
  a(1, 1) = 2.0;
  TriDiagonalMatrix m(2);
  m.diag = {1.0, 2.0};
  m.sub = {0.25};
  m.super = {0.25};

  std::vector<double> lam;
  DenseMatrix c;
  generalized_sym_eig(a, m, lam, c);
  CHECK(lam[0] < lam[1]);

  const DenseMatrix md = m.to_dense();
  for (std::size_t p = 0; p < 2; ++p)
    for (std::size_t q = 0; q < 2; ++q) {
      double ctmc = 0.0, res = 0.0;
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) ctmc += c(i, p) * md(i, j) * c(j, q);
      CHECK(ctmc == doctest::Approx(p == q ? 1.0 : 0.0).epsilon(1e-12));
      for (std::size_t i = 0; i < 2; ++i) {
        double av = 0.0, mv = 0.0;
        for (std::size_t j = 0; j < 2; ++j) {
          av += a(i, j) * c(j, q);
          mv += md(i, j) * c(j, q);
        }
        res = std::max(res, std::abs(av - lam[q] * mv));
        (void)p;
      }
      CHECK(res < 1e-12);
    }
}

TEST_CASE("dense SPD solve matches elimination oracle") {
  const std::size_t n = 12;
  DenseMatrix a(n, n);
  const auto r = oracles::random_vector(n * n, 77);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      a(i, j) = r[i * n + j];
      a(j, i) = a(i, j);
    }
  for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n);
  const auto b = oracles::random_vector(n, 3);

  const auto x_lapack = solve_spd_dense(a, b);
  const auto x_oracle = oracles::dense_solve(a, b);
  for (std::size_t i = 0; i < n; ++i) CHECK(x_lapack[i] == doctest::Approx(x_oracle[i]).epsilon(1e-10));
}
