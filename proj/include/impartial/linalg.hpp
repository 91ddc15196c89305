#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace impartial {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Result of an ordinary least-squares fit without implicit intercept.
///
/// `coefficients` has one entry per design column; columns found to be
/// linearly dependent on earlier pivots are listed in `dropped_columns` and
/// carry a zero coefficient.
struct LeastSquaresFit {
  Vector coefficients;
  Vector fitted;
  Vector residuals;
  Eigen::Index rank = 0;
  std::vector<Eigen::Index> dropped_columns;
};

/// H_M V and (I - H_M) V for a basis M and target V.
struct ProjectionPair {
  Matrix projected;
  Matrix orthogonal;
};

struct CenteredMatrix {
  Matrix centered;
  Vector means;
};

/// Minimizes ||response - design * b|| with a column-pivoted QR. Aliased
/// columns are dropped (zero coefficient) rather than rejected.
/// Throws ContractError on dimension mismatch, InputError on non-finite input.
LeastSquaresFit solve_least_squares(const Matrix& design, const Vector& response);

/// Multi-response variant: one least-squares fit per column of `responses`,
/// sharing the factorization. Returns the coefficient matrix (cols(design) x cols(responses)).
Matrix solve_least_squares_multi(const Matrix& design, const Matrix& responses);

/// Projects every column of `target` onto the column space of `basis`.
/// The n x n hat matrix is never formed.
ProjectionPair project(const Matrix& basis, const Matrix& target);

/// Subtracts column means. Constant columns become all-zero.
CenteredMatrix column_center(const Matrix& m);

/// Horizontal concatenation of blocks with equal row counts (0-column blocks allowed).
Matrix hcat(std::initializer_list<const Matrix*> blocks);

/// Rank tolerance used by every factorization in the library:
/// max(rows, cols) * machine epsilon, relative to the largest pivot.
double rank_threshold(Eigen::Index rows, Eigen::Index cols);

bool all_finite(const Matrix& m);

}  // namespace impartial
