#pragma once

#include "impartial/dataset.hpp"
#include "impartial/estimators.hpp"

#include <string_view>

namespace impartial {

enum class DecompositionMode { FEO, FSEO, Total };

std::string_view to_string(DecompositionMode mode);
DecompositionMode parse_decomposition_mode(std::string_view text);

/// Per-row split of the full-model fitted values.
///
/// Each block's contribution is split into the part lying in the span of the
/// other covariate blocks and the part orthogonal to them:
///   - sensitive:  di (shared) + dt (unique)
///   - legitimate: sd_plus (shared) + unique_x
///   - suspect:    sd_minus_mixed (shared) + unique_w
/// For FEO the conditioning sets are X for S and S for X; for FSEO W for S and S
/// for W; for Total each block is conditioned on the other two.
struct ComponentReport {
  DecompositionMode mode = DecompositionMode::Total;
  Vector intercept, dt, di, sd_plus, sd_minus_mixed, unique_x, unique_w;

  Vector total() const;

  struct Summary {
    double sum = 0.0;
    double norm = 0.0;
  };
  Summary summary(const Vector& component) const;
};

/// Marginal (restricted) legitimate coefficients = direct + indirect.
struct CoefDecomposition {
  Vector marginal;
  Vector direct;
  Vector indirect;
  Matrix lambda_x;  // p_x x p_s, from regressing S on X
};

/// Requires empty W and B (VariantError otherwise).
CoefDecomposition decompose_coefficients(const TotalModelFit& fit, const EncodedDesign& design);

/// Throws VariantError when `mode` does not fit the nonempty blocks:
/// FEO needs [W|B] empty, FSEO needs X empty.
ComponentReport decompose(const TotalModelFit& fit, const EncodedDesign& design,
                          DecompositionMode mode);

struct RedliningSummary {
  double disparate_treatment = 0.0;    // ||dt||
  double informative_redlining = 0.0;  // ||di||
  double sd_minus = 0.0;               // ||sd_minus_mixed||
  /// ||di + sd_minus_mixed||, the redlining carried by suspect covariates.
  double uninformative_redlining = 0.0;
};

/// Euclidean norms of the redlining components. FEO reports have no sd_minus
/// term and are rejected with VariantError.
RedliningSummary redlining_report(const ComponentReport& report);

}  // namespace impartial
