#include "impartial/linalg.hpp"

#include "impartial/errors.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace impartial {

namespace {

Eigen::ColPivHouseholderQR<Matrix> factorize(const Matrix& design) {
  Eigen::ColPivHouseholderQR<Matrix> qr(design.rows(), design.cols());
  qr.setThreshold(rank_threshold(design.rows(), design.cols()));
  qr.compute(design);
  return qr;
}

// Thin orthonormal basis for span(design); rank columns.
Matrix orthonormal_basis(const Eigen::ColPivHouseholderQR<Matrix>& qr, Eigen::Index rows) {
  const Eigen::Index rank = qr.rank();
  Matrix q = Matrix::Identity(rows, rank);
  q.applyOnTheLeft(qr.householderQ());
  return q;
}

}  // namespace

double rank_threshold(Eigen::Index rows, Eigen::Index cols) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

LeastSquaresFit solve_least_squares(const Matrix& design, const Vector& response) {
  if (design.rows() < 1) {
    throw ContractError("solve_least_squares: design has no rows");
  }
  if (design.rows() != response.size()) {
    throw ContractError("solve_least_squares: design has " + std::to_string(design.rows()) +
                        " rows but response has " + std::to_string(response.size()));
  }
  if (!design.allFinite() || !response.allFinite()) {
    throw InputError("solve_least_squares: non-finite value in input");
  }

  LeastSquaresFit fit;
  fit.coefficients = Vector::Zero(design.cols());
  if (design.cols() == 0) {
    fit.fitted = Vector::Zero(design.rows());
    fit.residuals = response;
    return fit;
  }

  const auto qr = factorize(design);
  fit.rank = qr.rank();

  // Qᵀy restricted to the first `rank` rows, then back-substitution on R11.
  Vector qty = response;
  qty.applyOnTheLeft(qr.householderQ().transpose());
  Vector basic = Vector::Zero(design.cols());
  if (fit.rank > 0) {
    basic.head(fit.rank) = qr.matrixR()
                               .topLeftCorner(fit.rank, fit.rank)
                               .triangularView<Eigen::Upper>()
                               .solve(qty.head(fit.rank));
  }
  fit.coefficients = qr.colsPermutation() * basic;

  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index k = fit.rank; k < design.cols(); ++k) {
    fit.dropped_columns.push_back(perm(k));
  }
  std::sort(fit.dropped_columns.begin(), fit.dropped_columns.end());

  // Fitted values from the orthogonal factor: Q [Qᵀy_head; 0].
  Vector head = Vector::Zero(design.rows());
  head.head(fit.rank) = qty.head(fit.rank);
  head.applyOnTheLeft(qr.householderQ());
  fit.fitted = head;
  fit.residuals = response - fit.fitted;
  return fit;
}

Matrix solve_least_squares_multi(const Matrix& design, const Matrix& responses) {
  if (design.rows() != responses.rows()) {
    throw ContractError("solve_least_squares_multi: row mismatch");
  }
  if (!design.allFinite() || !responses.allFinite()) {
    throw InputError("solve_least_squares_multi: non-finite value in input");
  }
  Matrix coef = Matrix::Zero(design.cols(), responses.cols());
  if (design.cols() == 0 || responses.cols() == 0) return coef;

  const auto qr = factorize(design);
  const Eigen::Index rank = qr.rank();
  if (rank == 0) return coef;
  Matrix qty = responses;
  qty.applyOnTheLeft(qr.householderQ().transpose());
  Matrix basic = Matrix::Zero(design.cols(), responses.cols());
  basic.topRows(rank) =
      qr.matrixR().topLeftCorner(rank, rank).triangularView<Eigen::Upper>().solve(qty.topRows(rank));
  return qr.colsPermutation() * basic;
}

ProjectionPair project(const Matrix& basis, const Matrix& target) {
  if (basis.rows() != target.rows()) {
    throw ContractError("project: basis has " + std::to_string(basis.rows()) +
                        " rows but target has " + std::to_string(target.rows()));
  }
  ProjectionPair out;
  if (basis.cols() == 0) {
    out.projected = Matrix::Zero(target.rows(), target.cols());
    out.orthogonal = target;
    return out;
  }
  const auto qr = factorize(basis);
  const Matrix q = orthonormal_basis(qr, basis.rows());
  out.projected = q * (q.transpose() * target);
  out.orthogonal = target - out.projected;
  return out;
}

CenteredMatrix column_center(const Matrix& m) {
  if (m.rows() < 1) {
    throw ContractError("column_center: matrix has no rows");
  }
  CenteredMatrix out;
  out.means = m.colwise().mean().transpose();
  out.centered = m.rowwise() - out.means.transpose();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (m.col(j).minCoeff() == m.col(j).maxCoeff()) {
      out.means(j) = m(0, j);
      out.centered.col(j).setZero();
    }
  }
  return out;
}

Matrix hcat(std::initializer_list<const Matrix*> blocks) {
  Eigen::Index rows = -1;
  Eigen::Index cols = 0;
  for (const Matrix* b : blocks) {
    if (b->cols() == 0 && b->rows() == 0) continue;
    if (rows < 0) rows = b->rows();
    if (b->rows() != rows) throw ContractError("hcat: row mismatch between blocks");
    cols += b->cols();
  }
  if (rows < 0) rows = 0;
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const Matrix* b : blocks) {
    if (b->cols() == 0) continue;
    out.middleCols(at, b->cols()) = *b;
    at += b->cols();
  }
  return out;
}

}  // namespace impartial
