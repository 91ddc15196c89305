#include "impartial/decomposition.hpp"

#include "impartial/errors.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace impartial {

std::string_view to_string(DecompositionMode mode) {
  switch (mode) {
    case DecompositionMode::FEO: return "feo";
    case DecompositionMode::FSEO: return "fseo";
    case DecompositionMode::Total: return "total";
  }
  return "total";
}

DecompositionMode parse_decomposition_mode(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "feo") return DecompositionMode::FEO;
  if (t == "fseo" || t == "seo") return DecompositionMode::FSEO;
  if (t == "total") return DecompositionMode::Total;
  throw VariantError("unknown decomposition mode '" + std::string(text) + "' (expected feo|fseo|total)");
}

Vector ComponentReport::total() const {
  return intercept + dt + di + sd_plus + sd_minus_mixed + unique_x + unique_w;
}

ComponentReport::Summary ComponentReport::summary(const Vector& component) const {
  return {component.sum(), component.norm()};
}

CoefDecomposition decompose_coefficients(const TotalModelFit& fit, const EncodedDesign& design) {
  if (design.W.cols() > 0 || design.B.cols() > 0 || fit.p_w() > 0 || fit.p_b() > 0) {
    throw VariantError("coefficient decomposition is defined only without suspect covariates");
  }
  CoefDecomposition out;
  out.marginal = fit.restricted_beta_x;
  out.direct = fit.beta_x;
  out.lambda_x = fit.lambda_x_for_s;
  out.indirect = fit.lambda_x_for_s * fit.beta_s;
  return out;
}

ComponentReport decompose(const TotalModelFit& fit, const EncodedDesign& d, DecompositionMode mode) {
  const Matrix wb = d.suspect_block();
  if (d.S.cols() != fit.p_s() || d.X.cols() != fit.p_x() || wb.cols() != fit.p_w() + fit.p_b()) {
    throw ContractError("decompose: design blocks do not match the fitted model");
  }
  if (mode == DecompositionMode::FEO && wb.cols() > 0) {
    throw VariantError("FEO decomposition requires an empty suspect block; use mode 'total'");
  }
  if (mode == DecompositionMode::FSEO && d.X.cols() > 0) {
    throw VariantError("FSEO decomposition requires an empty legitimate block; use mode 'total'");
  }

  const Eigen::Index n = d.rows();
  ComponentReport r;
  r.mode = mode;
  r.intercept = Vector::Constant(n, fit.beta0);
  r.dt = r.di = r.sd_plus = r.sd_minus_mixed = r.unique_x = r.unique_w = Vector::Zero(n);

  // Shared and unique parts of `block * beta` relative to span(condition).
  const auto split = [](const Matrix& condition, const Matrix& block, const Vector& beta,
                        Vector& shared, Vector& unique) {
    if (block.cols() == 0) return;
    const ProjectionPair pp = project(condition, block);
    shared = pp.projected * beta;
    unique = pp.orthogonal * beta;
  };

  const Vector beta_wb = fit.beta_wb();
  switch (mode) {
    case DecompositionMode::FEO:
      split(d.X, d.S, fit.beta_s, r.di, r.dt);
      split(d.S, d.X, fit.beta_x, r.sd_plus, r.unique_x);
      break;
    case DecompositionMode::FSEO:
      split(wb, d.S, fit.beta_s, r.di, r.dt);
      split(d.S, wb, beta_wb, r.sd_minus_mixed, r.unique_w);
      break;
    case DecompositionMode::Total: {
      const Matrix xw = hcat({&d.X, &wb});
      const Matrix sw = hcat({&d.S, &wb});
      const Matrix xs = hcat({&d.X, &d.S});
      split(xw, d.S, fit.beta_s, r.di, r.dt);
      split(sw, d.X, fit.beta_x, r.sd_plus, r.unique_x);
      split(xs, wb, beta_wb, r.sd_minus_mixed, r.unique_w);
      break;
    }
  }
  return r;
}

RedliningSummary redlining_report(const ComponentReport& report) {
  if (report.mode == DecompositionMode::FEO) {
    throw VariantError("redlining report needs an FSEO or Total decomposition (sd_minus is undefined under FEO)");
  }
  RedliningSummary s;
  s.disparate_treatment = report.dt.norm();
  s.informative_redlining = report.di.norm();
  s.sd_minus = report.sd_minus_mixed.norm();
  s.uninformative_redlining = (report.di + report.sd_minus_mixed).norm();
  return s;
}

}  // namespace impartial
