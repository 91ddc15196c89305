// Reference implementations used only by the tests. They take a different
// numerical route from the library (normal equations, explicit hat matrices,
// per-row loops) so agreement means something.
#pragma once

#include "impartial/dataset.hpp"
#include "impartial/linalg.hpp"
#include "impartial/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using impartial::Matrix;
using impartial::Vector;

inline Matrix gaussian(impartial::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

inline Matrix centered(const Matrix& m) {
  if (m.cols() == 0) return m;
  return m.rowwise() - m.colwise().mean();
}

/// OLS slopes of y on centered A via the normal equations.
inline Vector ols_slopes(const Matrix& A, const Vector& y) {
  if (A.cols() == 0) return Vector();
  const Matrix Ac = centered(A);
  return (Ac.transpose() * Ac).ldlt().solve(Ac.transpose() * (y.array() - y.mean()).matrix());
}

/// Explicit n x n hat matrix of the column span of A.
inline Matrix hat(const Matrix& A) {
  if (A.cols() == 0) return Matrix::Zero(A.rows(), A.rows());
  return A * (A.transpose() * A).ldlt().solve(A.transpose());
}

/// Correlated random design: binary S, X driven by S, W driven by S and X,
/// response linear in everything plus noise. Blocks are centered in place.
inline impartial::EncodedDesign random_design(impartial::Rng& rng, Eigen::Index n, Eigen::Index ps,
                                              Eigen::Index px, Eigen::Index pw,
                                              Eigen::Index pb = 0) {
  impartial::EncodedDesign d;
  Matrix S(n, ps);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < ps; ++j) S(i, j) = rng.bernoulli(0.3 + 0.1 * static_cast<double>(j)) ? 1.0 : 0.0;
  }
  Matrix X = S * gaussian(rng, ps, px) + gaussian(rng, n, px);
  Matrix W = S * gaussian(rng, ps, pw) + X * gaussian(rng, px, pw) * 0.5 + gaussian(rng, n, pw);
  Matrix B = S * gaussian(rng, ps, pb) + gaussian(rng, n, pb);
  Vector y = S * gaussian(rng, ps, 1) + X * gaussian(rng, px, 1) + W * gaussian(rng, pw, 1) +
             B * gaussian(rng, pb, 1) + gaussian(rng, n, 1);
  y.array() += 2.0;
  auto fill = [](Matrix& m, Vector& means, std::vector<std::string>& names, const char* prefix) {
    means = m.cols() ? Vector(m.colwise().mean().transpose()) : Vector();
    m = centered(m);
    for (Eigen::Index j = 0; j < m.cols(); ++j) names.push_back(prefix + std::to_string(j + 1));
  };
  fill(S, d.s_means, d.s_names, "s");
  fill(X, d.x_means, d.x_names, "x");
  fill(W, d.w_means, d.w_names, "w");
  fill(B, d.b_means, d.b_names, "b");
  d.S = S;
  d.X = X;
  d.W = W;
  d.B = B;
  d.y = y;
  d.s_group_labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::string key;
    for (Eigen::Index j = 0; j < ps; ++j) {
      if (j) key += '|';
      key += S(i, j) + d.s_means[j] > 0.5 ? "1" : "0";
    }
    d.s_group_labels[static_cast<std::size_t>(i)] = key;
  }
  return d;
}

/// Plain sample correlation (n denominators cancel); 0 when either side is constant.
inline double cor(const Vector& a, const Vector& b) {
  const double ma = a.mean(), mb = b.mean();
  double sab = 0, saa = 0, sbb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 1e-12 * a.size() || sbb <= 1e-12 * b.size()) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

inline double mean_of_group(const Vector& v, const std::vector<std::string>& labels, const std::string& g) {
  double s = 0;
  int n = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == g) {
      s += v[static_cast<Eigen::Index>(i)];
      ++n;
    }
  }
  return s / n;
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace oracle
