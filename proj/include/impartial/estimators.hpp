#pragma once

#include "impartial/dataset.hpp"
#include "impartial/linalg.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace impartial {

enum class EstimatorVariant {
  Full,
  ExcludeS,
  Marginal,
  FEO,
  FSEO,
  Total,
  BlackBoxCorrected,
  CaldersBaseline,
};

std::string_view to_string(EstimatorVariant variant);
/// Accepts full|exclude-s|marginal|feo|fseo|total|blackbox-corrected|calders (case-insensitive).
EstimatorVariant parse_variant(std::string_view text);

/// One joint least-squares fit on the centered blocks [S | X | W | B] plus the
/// auxiliary regressions every estimator variant is derived from.
///
/// The black-box block B is handled exactly like W; `lambda_*_for_w` have one
/// column per column of [W | B].
struct TotalModelFit {
  double beta0 = 0.0;  // mean of the training response
  Vector beta_s, beta_x, beta_w, beta_b;

  Matrix lambda_sx_for_w;  // (p_s + p_x) x (p_w + p_b): [W|B] regressed on [S, X]
  Matrix lambda_s_for_w;   // p_s x (p_w + p_b): [W|B] regressed on S alone
  Matrix lambda_x_for_s;   // p_x x p_s: S regressed on X alone

  // Restricted regression on [X | W | B] (sensitive block excluded).
  Vector restricted_beta_x;
  Vector restricted_beta_wb;

  std::vector<std::string> s_names, x_names, w_names, b_names;
  Vector s_means, x_means, w_means, b_means;
  /// Indices into the concatenated [S | X | W | B] columns that were aliased.
  std::vector<Eigen::Index> dropped_columns;
  Eigen::Index n = 0;
  std::uint64_t fingerprint = 0;

  Eigen::Index p_s() const { return beta_s.size(); }
  Eigen::Index p_x() const { return beta_x.size(); }
  Eigen::Index p_w() const { return beta_w.size(); }
  Eigen::Index p_b() const { return beta_b.size(); }
  /// [beta_w; beta_b]
  Vector beta_wb() const;
  /// Rows of lambda_sx_for_w belonging to S.
  Matrix lambda_s_joint() const { return lambda_sx_for_w.topRows(p_s()); }
  Matrix lambda_x_joint() const { return lambda_sx_for_w.bottomRows(p_x()); }
};

struct ImpartialPrediction {
  EstimatorVariant variant = EstimatorVariant::Full;
  Vector values;
  std::uint64_t training_fingerprint = 0;
};

/// Throws ContractError for zero rows or when every block is empty; warns when
/// the design has at least as many columns as rows.
TotalModelFit fit_total(const EncodedDesign& design);

/// Applies `variant` to `design`, whose blocks must have been centered with the
/// training means (use the training Encoder). Throws VariantError for FEO with
/// a nonempty suspect block, FSEO with a nonempty legitimate block, and
/// CaldersBaseline (which is produced by the harness).
ImpartialPrediction predict(const TotalModelFit& fit, const EncodedDesign& design,
                            EstimatorVariant variant);

/// Replaces W (and B) by their residuals after projecting off S, moving them
/// into the legitimate block. With S empty this is a no-op with a warning.
EncodedDesign residualize_suspect(const EncodedDesign& design);

/// Appends raw external prediction columns to B. They are centered with
/// `means` when given (training means for out-of-sample use), otherwise with
/// their own means.
EncodedDesign append_blackbox(const EncodedDesign& design, const Matrix& predictions,
                              const Vector* means = nullptr);

struct BlackBoxCorrection {
  TotalModelFit fit;
  ImpartialPrediction prediction;
};

/// Treats external predictions as suspect covariates of the total model and
/// returns the BlackBoxCorrected in-sample predictions. Throws ContractError on
/// a row mismatch and InputError on non-finite predictions.
BlackBoxCorrection correct_blackbox(const EncodedDesign& design, const Matrix& external_predictions);

/// FNV-1a over the response and every block, used to tag predictions.
std::uint64_t design_fingerprint(const EncodedDesign& design);

}  // namespace impartial
