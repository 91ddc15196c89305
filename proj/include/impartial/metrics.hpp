#pragma once

#include "impartial/dataset.hpp"
#include "impartial/estimators.hpp"
#include "impartial/linalg.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace impartial {

/// Which non-sensitive covariates the impartiality conditions treat as
/// legitimate (x) and which as suspect (w).
///   FEO:    x = [X | W], w = {}
///   SEO:    x = {},      w = [X | W]
///   Design: x = X,       w = W       (the roles declared in the schema)
/// Black-box columns (B) are never scored as covariates.
enum class ImpartialityMode { FEO, SEO, Design };

std::string_view to_string(ImpartialityMode mode);
ImpartialityMode parse_impartiality_mode(std::string_view text);

using GroupMeans = std::vector<std::pair<std::string, double>>;

double rmse(const Vector& predictions, const Vector& truth);
double rsse(const Vector& predictions, const Vector& truth);

/// Mean prediction over rows labelled `positive` minus the mean over rows
/// labelled `negative`. Throws ContractError if either label is absent.
double discrimination_score(const Vector& predictions, const std::vector<std::string>& group_labels,
                            std::string_view positive, std::string_view negative);

/// Largest |DS| over all ordered pairs of observed groups.
double max_pairwise_ds(const Vector& predictions, const std::vector<std::string>& group_labels);

/// Per-group mean predictions, groups in first-appearance order.
GroupMeans group_means(const Vector& predictions, const std::vector<std::string>& group_labels);

/// Absolute violation of each moment condition of the impartiality definition.
struct ImpartialityBreakdown {
  double mean_term = 0.0;   // standardized residual mean vs. its sensitive-implied value
  Vector legitimate_terms;  // one per legitimate column
  Vector suspect_terms;     // one per suspect column
  Vector eta_terms;         // Cor(Yhat - L(Yhat | x), s), one per sensitive column
  double score = 0.0;       // sum of all terms / (1 + p_x + p_w + p_s)
};

/// Evaluates the conditions with sample moments on `design`. Variances at or
/// below 1e-12 make the affected correlations 0. Throws ContractError when S is
/// empty and InputError when the sensitive correlation matrix is singular.
ImpartialityBreakdown impartiality_breakdown(const Vector& predictions, const EncodedDesign& design,
                                             const Vector& residual_target, ImpartialityMode mode);

double impartiality_score(const Vector& predictions, const EncodedDesign& design,
                          const Vector& residual_target, ImpartialityMode mode);

struct MetricsReport {
  double rmse = 0.0;
  double rsse = 0.0;
  double ds = 0.0;
  double is_score = 0.0;
  ImpartialityMode is_mode = ImpartialityMode::SEO;
  GroupMeans per_group_means;
  Eigen::Index n = 0;
};

/// DS uses (`positive`, `negative`); pass empty labels to fall back to the
/// second and first observed groups respectively.
MetricsReport evaluate(const Vector& predictions, const Vector& truth, const EncodedDesign& design,
                       ImpartialityMode mode, std::string_view positive = {},
                       std::string_view negative = {});

/// Differences a - b, overall and per sensitive group.
struct ComparisonReport {
  Vector difference;
  double mean_difference = 0.0;
  double mean_abs_difference = 0.0;
  GroupMeans group_mean_difference;
};

ComparisonReport compare_estimators(const ImpartialPrediction& a, const ImpartialPrediction& b,
                                    const std::vector<std::string>& group_labels);

/// Default (positive, negative) group pair: second and first observed labels.
std::pair<std::string, std::string> default_group_pair(const std::vector<std::string>& group_labels);

}  // namespace impartial
