#include <doctest.h>

#include "impartial/errors.hpp"
#include "impartial/linalg.hpp"
#include "oracles.hpp"

#include <limits>

using namespace impartial;

TEST_CASE("least squares agrees with the normal equations on full-rank designs") {
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index n = 40 + trial, p = 1 + trial % 6;
    const Matrix A = oracle::gaussian(rng, n, p);
    const Vector y = oracle::gaussian(rng, n, 1);
    const auto fit = solve_least_squares(A, y);
    const Vector ref = (A.transpose() * A).ldlt().solve(A.transpose() * y);
    CHECK(oracle::rel_err(fit.coefficients, ref) < 1e-10);
    CHECK(fit.rank == p);
    CHECK(fit.dropped_columns.empty());
    CHECK(oracle::rel_err(fit.fitted + fit.residuals, y) < 1e-14);
    // Residuals are orthogonal to every column.
    CHECK((A.transpose() * fit.residuals).norm() < 1e-9);
  }
}

TEST_CASE("aliased columns are dropped with zero coefficients") {
  Rng rng(3);
  Matrix A = oracle::gaussian(rng, 50, 3);
  Matrix B(50, 4);
  B << A.col(0), A.col(1), A.col(0) * 2.0 - A.col(1), A.col(2);
  const Vector y = oracle::gaussian(rng, 50, 1);
  const auto fit = solve_least_squares(B, y);
  CHECK(fit.rank == 3);
  REQUIRE(fit.dropped_columns.size() == 1);
  CHECK(fit.coefficients[fit.dropped_columns[0]] == 0.0);
  // Same fitted values as the full-rank basis.
  const auto ref = solve_least_squares(A, y);
  CHECK(oracle::rel_err(fit.fitted, ref.fitted) < 1e-10);
}

TEST_CASE("zero-column design fits nothing") {
  const Matrix A(5, 0);
  const Vector y = Vector::LinSpaced(5, 1, 5);
  const auto fit = solve_least_squares(A, y);
  CHECK(fit.coefficients.size() == 0);
  CHECK(fit.fitted.isZero());
  CHECK(fit.residuals == y);
  CHECK(fit.rank == 0);
}

TEST_CASE("least squares rejects bad input") {
  Matrix A = Matrix::Ones(4, 2);
  CHECK_THROWS_AS(solve_least_squares(A, Vector::Ones(3)), ContractError);
  A(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_least_squares(A, Vector::Ones(4)), InputError);
  A(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_least_squares(A, Vector::Ones(4)), InputError);
}

TEST_CASE("multi-response solve matches column-by-column fits") {
  Rng rng(5);
  const Matrix A = oracle::gaussian(rng, 30, 4);
  const Matrix Y = oracle::gaussian(rng, 30, 3);
  const Matrix coef = solve_least_squares_multi(A, Y);
  REQUIRE(coef.rows() == 4);
  REQUIRE(coef.cols() == 3);
  for (Eigen::Index j = 0; j < 3; ++j) {
    CHECK(oracle::rel_err(coef.col(j), solve_least_squares(A, Y.col(j)).coefficients) < 1e-12);
  }
}

TEST_CASE("projection matches the explicit hat matrix and is idempotent") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix M = oracle::gaussian(rng, 60, 1 + trial % 4);
    const Matrix V = oracle::gaussian(rng, 60, 3);
    const auto p = project(M, V);
    const Matrix H = oracle::hat(M);
    CHECK(oracle::rel_err(p.projected, H * V) < 1e-10);
    CHECK(oracle::rel_err(p.projected + p.orthogonal, V) < 1e-14);
    CHECK((M.transpose() * p.orthogonal).norm() < 1e-9);
    CHECK(oracle::rel_err(project(M, p.projected).projected, p.projected) < 1e-10);
    CHECK(project(M, p.orthogonal).projected.norm() < 1e-9);
  }
}

TEST_CASE("projection onto an empty basis keeps everything orthogonal") {
  const Matrix V = Matrix::Ones(4, 2);
  const auto p = project(Matrix(4, 0), V);
  CHECK(p.projected.isZero());
  CHECK(p.orthogonal == V);
}

TEST_CASE("column centering") {
  Matrix m(3, 2);
  m << 1, 7, 2, 7, 6, 7;
  const auto c = column_center(m);
  CHECK(c.means[0] == doctest::Approx(3.0));
  CHECK(c.means[1] == doctest::Approx(7.0));
  CHECK(c.centered.col(0).sum() == doctest::Approx(0.0));
  // Constant columns come out exactly zero.
  CHECK(c.centered.col(1).isZero(0.0));
}

TEST_CASE("hcat concatenates and checks row counts") {
  const Matrix a = Matrix::Ones(3, 1), b = Matrix::Zero(3, 2), e(3, 0);
  const Matrix c = hcat({&a, &e, &b});
  CHECK(c.cols() == 3);
  CHECK(c(2, 0) == 1.0);
  CHECK(c(2, 2) == 0.0);
  const Matrix bad = Matrix::Ones(2, 1);
  CHECK_THROWS_AS(hcat({&a, &bad}), ContractError);
}

TEST_CASE("rank threshold scales with the larger dimension") {
  CHECK(rank_threshold(100, 3) == doctest::Approx(100 * std::numeric_limits<double>::epsilon()));
  CHECK(rank_threshold(2, 9) == doctest::Approx(9 * std::numeric_limits<double>::epsilon()));
}
