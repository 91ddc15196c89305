#include "impartial/metrics.hpp"

#include "impartial/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace impartial {

namespace {

constexpr double kVarianceFloor = 1e-12;

void check_lengths(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw ContractError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() == 0) throw ContractError(std::string(what) + ": empty input");
}

// Sample moments with 1/n normalization on centered copies.
struct Moments {
  Matrix centered;  // columns minus their means
  Vector mean;
  Vector sd;        // 0 where variance <= floor
};

Moments moments(const Matrix& m) {
  Moments out;
  const auto n = static_cast<double>(m.rows());
  out.mean = m.colwise().mean().transpose();
  out.centered = m.rowwise() - out.mean.transpose();
  out.sd = Vector::Zero(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double var = out.centered.col(j).squaredNorm() / n;
    if (var > kVarianceFloor) out.sd(j) = std::sqrt(var);
  }
  return out;
}

// Cross-correlations between columns of a and b (a.cols() x b.cols()).
Matrix cross_cor(const Moments& a, const Moments& b) {
  const auto n = static_cast<double>(a.centered.rows());
  Matrix c = a.centered.transpose() * b.centered / n;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      const double denom = a.sd(i) * b.sd(j);
      c(i, j) = denom > 0.0 ? c(i, j) / denom : 0.0;
    }
  }
  return c;
}

}  // namespace

std::string_view to_string(ImpartialityMode mode) {
  switch (mode) {
    case ImpartialityMode::FEO: return "feo";
    case ImpartialityMode::SEO: return "seo";
    case ImpartialityMode::Design: return "design";
  }
  return "seo";
}

ImpartialityMode parse_impartiality_mode(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "feo") return ImpartialityMode::FEO;
  if (t == "seo" || t == "fseo") return ImpartialityMode::SEO;
  if (t == "design" || t == "total") return ImpartialityMode::Design;
  throw VariantError("unknown impartiality mode '" + std::string(text) + "' (expected feo|seo|design)");
}

double rsse(const Vector& predictions, const Vector& truth) {
  check_lengths(predictions, truth, "rsse");
  return std::sqrt((predictions - truth).squaredNorm());
}

double rmse(const Vector& predictions, const Vector& truth) {
  check_lengths(predictions, truth, "rmse");
  return std::sqrt((predictions - truth).squaredNorm() / static_cast<double>(truth.size()));
}

GroupMeans group_means(const Vector& predictions, const std::vector<std::string>& labels) {
  if (static_cast<std::size_t>(predictions.size()) != labels.size()) {
    throw ContractError("group_means: predictions and group labels differ in length");
  }
  GroupMeans sums;
  std::vector<double> counts;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find_if(sums.begin(), sums.end(), [&](const auto& p) { return p.first == labels[i]; });
    if (it == sums.end()) {
      sums.emplace_back(labels[i], 0.0);
      counts.push_back(0.0);
      it = sums.end() - 1;
    }
    it->second += predictions(static_cast<Eigen::Index>(i));
    counts[static_cast<std::size_t>(it - sums.begin())] += 1.0;
  }
  for (std::size_t g = 0; g < sums.size(); ++g) sums[g].second /= counts[g];
  return sums;
}

double discrimination_score(const Vector& predictions, const std::vector<std::string>& labels,
                            std::string_view positive, std::string_view negative) {
  const GroupMeans means = group_means(predictions, labels);
  const auto lookup = [&](std::string_view label) {
    for (const auto& [name, value] : means) {
      if (name == label) return value;
    }
    throw ContractError("discrimination_score: unknown group label '" + std::string(label) + "'");
  };
  return lookup(positive) - lookup(negative);
}

double max_pairwise_ds(const Vector& predictions, const std::vector<std::string>& labels) {
  const GroupMeans means = group_means(predictions, labels);
  double best = 0.0;
  for (const auto& a : means) {
    for (const auto& b : means) best = std::max(best, std::abs(a.second - b.second));
  }
  return best;
}

std::pair<std::string, std::string> default_group_pair(const std::vector<std::string>& labels) {
  std::vector<std::string> levels;
  for (const auto& l : labels) {
    if (std::find(levels.begin(), levels.end(), l) == levels.end()) levels.push_back(l);
    if (levels.size() == 2) break;
  }
  if (levels.size() < 2) throw ContractError("need at least two sensitive groups for a discrimination score");
  return {levels[1], levels[0]};
}

ImpartialityBreakdown impartiality_breakdown(const Vector& predictions, const EncodedDesign& design,
                                             const Vector& residual_target, ImpartialityMode mode) {
  check_lengths(predictions, residual_target, "impartiality_score");
  if (predictions.size() != design.rows()) {
    throw ContractError("impartiality_score: predictions and design differ in length");
  }
  if (design.S.cols() == 0) throw ContractError("impartiality_score: design has no sensitive columns");

  Matrix x, w;
  switch (mode) {
    case ImpartialityMode::FEO:
      x = hcat({&design.X, &design.W});
      w = Matrix(design.rows(), 0);
      break;
    case ImpartialityMode::SEO:
      x = Matrix(design.rows(), 0);
      w = hcat({&design.X, &design.W});
      break;
    case ImpartialityMode::Design:
      x = design.X;
      w = design.W;
      break;
  }

  const Vector resid = residual_target - predictions;
  const Moments mu = moments(resid);
  const Moments ms = moments(design.S);
  const Moments mx = moments(x);
  const Moments mw = moments(w);

  // Sensitive columns with usable variance enter Cor(s)^{-1}; others contribute 0.
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < design.S.cols(); ++j) {
    if (ms.sd(j) > 0.0) active.push_back(j);
  }
  const auto pa = static_cast<Eigen::Index>(active.size());
  Matrix cor_s = cross_cor(ms, ms);
  Matrix cor_s_active(pa, pa);
  for (Eigen::Index i = 0; i < pa; ++i) {
    for (Eigen::Index j = 0; j < pa; ++j) cor_s_active(i, j) = cor_s(active[i], active[j]);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(pa, pa);
  if (pa > 0) {
    qr.setThreshold(1e-10);
    qr.compute(cor_s_active);
    if (qr.rank() < pa) {
      std::string names;
      for (Eigen::Index k = qr.rank(); k < pa; ++k) {
        const auto col = active[qr.colsPermutation().indices()(k)];
        if (!names.empty()) names += ", ";
        names += col < static_cast<Eigen::Index>(design.s_names.size())
                     ? design.s_names[static_cast<std::size_t>(col)]
                     : std::to_string(col);
      }
      throw InputError("impartiality_score: sensitive correlation matrix is singular; aliased column(s): " + names);
    }
  }

  // Row vector Cor(u, s) Cor(s)^{-1} over the active sensitive columns.
  const Matrix cor_us_all = cross_cor(mu, ms);  // 1 x p_s
  Vector cor_us(pa);
  for (Eigen::Index i = 0; i < pa; ++i) cor_us(i) = cor_us_all(0, active[i]);
  // Cor(s) is symmetric, so Cor(s)^{-1} r is the transpose of r^T Cor(s)^{-1}.
  const Vector weights = pa > 0 ? Vector(qr.solve(cor_us)) : Vector();

  ImpartialityBreakdown out;

  // Mean condition.
  const double lhs = mu.sd(0) > 0.0 ? mu.mean(0) / mu.sd(0) : 0.0;
  double rhs = 0.0;
  for (Eigen::Index i = 0; i < pa; ++i) rhs += weights(i) * ms.mean(active[i]) / ms.sd(active[i]);
  out.mean_term = std::abs(lhs - rhs);

  const auto covariate_terms = [&](const Moments& mv) {
    const Matrix cor_uv = cross_cor(mu, mv);  // 1 x p
    const Matrix cor_sv = cross_cor(ms, mv);  // p_s x p
    Vector terms(mv.centered.cols());
    for (Eigen::Index j = 0; j < terms.size(); ++j) {
      double implied = 0.0;
      for (Eigen::Index i = 0; i < pa; ++i) implied += weights(i) * cor_sv(active[i], j);
      terms(j) = std::abs(cor_uv(0, j) - implied);
    }
    return terms;
  };
  out.legitimate_terms = covariate_terms(mx);
  out.suspect_terms = covariate_terms(mw);

  // eta = Yhat - L(Yhat | x): residual of the centered predictions on centered x.
  const Vector pred_c = predictions.array() - predictions.mean();
  const Vector eta = mx.centered.cols() > 0 ? solve_least_squares(mx.centered, pred_c).residuals : pred_c;
  const Moments me = moments(eta);
  out.eta_terms = cross_cor(me, ms).row(0).transpose().cwiseAbs();

  const double total = out.mean_term + out.legitimate_terms.sum() + out.suspect_terms.sum() +
                       out.eta_terms.sum();
  const auto count = 1 + x.cols() + w.cols() + design.S.cols();
  out.score = total / static_cast<double>(count);
  return out;
}

double impartiality_score(const Vector& predictions, const EncodedDesign& design,
                          const Vector& residual_target, ImpartialityMode mode) {
  return impartiality_breakdown(predictions, design, residual_target, mode).score;
}

MetricsReport evaluate(const Vector& predictions, const Vector& truth, const EncodedDesign& design,
                       ImpartialityMode mode, std::string_view positive, std::string_view negative) {
  MetricsReport r;
  r.n = predictions.size();
  r.rmse = rmse(predictions, truth);
  r.rsse = rsse(predictions, truth);
  r.per_group_means = group_means(predictions, design.s_group_labels);
  if (positive.empty() || negative.empty()) {
    const auto pair = default_group_pair(design.s_group_labels);
    r.ds = discrimination_score(predictions, design.s_group_labels, pair.first, pair.second);
  } else {
    r.ds = discrimination_score(predictions, design.s_group_labels, positive, negative);
  }
  r.is_mode = mode;
  r.is_score = impartiality_score(predictions, design, truth, mode);
  return r;
}

ComparisonReport compare_estimators(const ImpartialPrediction& a, const ImpartialPrediction& b,
                                    const std::vector<std::string>& group_labels) {
  check_lengths(a.values, b.values, "compare_estimators");
  ComparisonReport r;
  r.difference = a.values - b.values;
  r.mean_difference = r.difference.mean();
  r.mean_abs_difference = r.difference.cwiseAbs().mean();
  r.group_mean_difference = group_means(r.difference, group_labels);
  return r;
}

}  // namespace impartial
