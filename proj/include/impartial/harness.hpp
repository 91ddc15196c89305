#pragma once

#include "impartial/dataset.hpp"
#include "impartial/estimators.hpp"
#include "impartial/forest.hpp"
#include "impartial/linalg.hpp"
#include "impartial/metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace impartial {

struct GeneratedData {
  Dataset data;
  Schema schema;
};

/// Loan-repayment toy data: columns `default` (0/1 response), `edu` (low/high)
/// and `group` (s-/s+), 1000 rows with fixed cell counts.
Dataset gen_simple_example();
/// Schema for gen_simple_example with `edu` given `edu_role`.
Schema simple_example_schema(CovariateRole edu_role = CovariateRole::Legitimate);

/// Linear Gaussian structural model s -> {x_o, x_u, w} -> y, with x_u -> w.
/// Sensitive columns are independent Bernoulli(1/2) indicators; x_u is used to
/// generate y and w and then dropped. Edge matrices are (parents x children).
struct DagSpec {
  Eigen::Index p_s = 1;
  Eigen::Index p_x = 2;   // observed legitimate covariates
  Eigen::Index p_xu = 1;  // unobserved legitimate covariates
  Eigen::Index p_w = 1;
  std::size_t n = 1000;
  bool fair = true;
  std::uint64_t seed = 1;

  Matrix s_to_x, s_to_xu, s_to_w, xu_to_w;
  Vector x_to_y, xu_to_y, w_to_y, s_to_y;
  double noise_x = 1.0, noise_w = 1.0, noise_y = 1.0;
};

/// Spec with every edge set to a default strength: s->x, s->xu, s->w .8,
/// xu->w .6, x->y and xu->y 1, and for unrestricted data s->y .5 and w->y .3.
DagSpec make_dag_spec(Eigen::Index p_s, Eigen::Index p_x, Eigen::Index p_xu, Eigen::Index p_w,
                      bool fair, std::size_t n = 1000, std::uint64_t seed = 1);

/// Columns s1.., x1.., w1.., y. Throws ContractError on mismatched or invalid
/// dimensions, non-positive noise, or nonzero s->y / w->y edges under `fair`.
GeneratedData gen_dag(const DagSpec& spec);

/// Synthetic stand-in for the red/white wine-quality table: 11 physico-chemical
/// columns, categorical `type` (red/white, roughly a quarter red, nearly
/// predictable from the chemistry) and a continuous `quality` response with a
/// nonlinear alcohol effect. The white-minus-red mean gap is about .24 while
/// the ceteris-paribus white effect is about -.14.
GeneratedData gen_wine_like(std::size_t n = 6497, std::uint64_t seed = 1);

struct BiasSpec {
  std::string target_group;  // sensitive group label, e.g. "white"
  double fraction = 0.7;
  double shift = 1.0;
  std::uint64_t seed = 0;
};

/// Rows chosen for biasing: round(fraction x group size) members of the target
/// group, sampled without replacement, in ascending order.
std::vector<std::size_t> bias_rows(const std::vector<std::string>& group_labels, const BiasSpec& spec);

/// Adds `shift` to the response of the rows chosen by bias_rows. Throws
/// ContractError for an unknown group or a fraction outside [0, 1].
Dataset inject_bias(const Dataset& data, const Schema& schema, const BiasSpec& spec);

/// Propensity-stratified baseline: a linear probability model of the (single,
/// binary) sensitive indicator on [X | W | B], training-quantile bins, and a
/// separate all-suspect FSEO fit inside each bin.
struct CaldersModel {
  struct Bin {
    bool fallback = true;  // predict `mean_response` instead of the bin fit
    double mean_response = 0.0;
    TotalModelFit fit;
    Vector s_means, c_means;  // bin-local centering of S and [X | W | B]
  };
  double propensity_mean = 0.0;
  Vector propensity_coef;
  std::vector<double> edges;  // upper_bound(edges, p) is the bin index
  std::vector<Bin> bins;
  Eigen::Index p_s = 0, p_c = 0;
  std::uint64_t fingerprint = 0;
};

CaldersModel fit_calders(const EncodedDesign& train, std::size_t bins = 5);
Vector calders_propensity(const CaldersModel& model, const EncodedDesign& design);
ImpartialPrediction predict_calders(const CaldersModel& model, const EncodedDesign& design);
/// In-sample Calders predictions for `data`.
ImpartialPrediction calders_baseline(const Dataset& data, const Schema& schema, std::size_t bins = 5);

/// Estimators compared by the validation protocol. The schema is rewritten per
/// arm: FEO-type arms see every covariate as legitimate, SEO-type arms see
/// every covariate as suspect, and Total uses the declared roles.
enum class Arm {
  OLS,         // Full model
  FEO,
  SEO,         // FSEO, all covariates suspect
  Calders,
  Marginal,
  ExcludeS,
  Total,
  Forest,      // raw bagged-tree predictions
  FEOForest,   // Total with the forest as a black-box column, covariates legitimate
  SEOForest,   // BlackBoxCorrected, covariates suspect
};

std::string_view to_string(Arm arm);
/// Table heading, e.g. "Sub. EO RF".
std::string_view display_name(Arm arm);
/// Accepts ols|feo|seo|calders|marginal|exclude-s|total|rf|feo-rf|seo-rf.
Arm parse_arm(std::string_view text);
/// Mode the arm's IS is measured in.
ImpartialityMode impartiality_mode_for(Arm arm);

struct ExperimentConfig {
  int folds = 5;
  int repetitions = 20;
  std::vector<Arm> arms{Arm::OLS, Arm::FEO, Arm::SEO, Arm::Calders};
  std::uint64_t master_seed = 1;
  std::size_t calders_bins = 5;
  ForestConfig forest;
  /// 0 uses IMPARTIAL_THREADS when set, otherwise the hardware concurrency.
  unsigned threads = 0;
};

struct FoldMetrics {
  int repetition = 0;
  int fold = 0;
  double rmse_biased = 0.0;
  double rmse_raw = 0.0;
  double ds = 0.0;  // target group minus everyone else, on test predictions
  double is = 0.0;
};

struct ArmSummary {
  Arm arm = Arm::OLS;
  ImpartialityMode is_mode = ImpartialityMode::SEO;
  double rmse_biased = 0.0;
  double rmse_raw = 0.0;
  double ds = 0.0;
  /// Mean over repetitions of the IS of the pooled out-of-fold predictions.
  double is = 0.0;
  /// Mean of the per-fold IS values; carries a sampling floor of order
  /// 1/sqrt(test rows) per covariate term.
  double is_per_fold = 0.0;
  std::vector<FoldMetrics> folds;  // (repetition, fold) order
};

struct ExperimentResult {
  std::string target_group;
  int folds = 0;
  int repetitions = 0;
  double raw_gap = 0.0;     // target-minus-rest response mean, raw data
  double biased_gap = 0.0;  // same on the biased data, averaged over repetitions
  std::vector<ArmSummary> arms;
};

/// Per repetition: bias the data with a derived seed and permute rows into
/// folds; per fold: train every arm on biased training rows and score on the
/// held-out rows against both raw and biased responses. Each repetition's
/// out-of-fold predictions are also pooled over all rows and scored for IS,
/// which is the reported IS. IS residuals use the
/// biased held-out response, the target the models were fitted to; the raw
/// response differs from it by a group-dependent level shift that the mean
/// condition would flag for every estimator. Results do not depend on the
/// thread count.
ExperimentResult kfold_validate(const Dataset& data, const Schema& schema,
                                const ExperimentConfig& config, const BiasSpec& bias);

void write_experiment_table(std::ostream& out, const ExperimentResult& result);
/// One row per arm x metric: arm,metric,value.
void write_experiment_csv(std::ostream& out, const ExperimentResult& result);

unsigned resolve_thread_count(unsigned requested);

}  // namespace impartial
