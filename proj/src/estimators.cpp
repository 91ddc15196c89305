#include "impartial/estimators.hpp"

#include "impartial/diagnostics.hpp"
#include "impartial/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>

namespace impartial {

namespace {

void hash_bytes(std::uint64_t& h, const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

void hash_matrix(std::uint64_t& h, const Matrix& m) {
  const std::int64_t dims[2] = {m.rows(), m.cols()};
  hash_bytes(h, dims, sizeof dims);
  hash_bytes(h, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

void check_provenance(const TotalModelFit& fit, const EncodedDesign& d) {
  const auto same = [](const std::vector<std::string>& a, const std::vector<std::string>& b,
                       Eigen::Index cols) {
    return a == b && static_cast<Eigen::Index>(a.size()) == cols;
  };
  if (!same(fit.s_names, d.s_names, d.S.cols()) || !same(fit.x_names, d.x_names, d.X.cols()) ||
      !same(fit.w_names, d.w_names, d.W.cols()) || !same(fit.b_names, d.b_names, d.B.cols())) {
    throw ContractError("design columns do not match the columns the model was fitted on");
  }
}

}  // namespace

std::string_view to_string(EstimatorVariant variant) {
  switch (variant) {
    case EstimatorVariant::Full: return "full";
    case EstimatorVariant::ExcludeS: return "exclude-s";
    case EstimatorVariant::Marginal: return "marginal";
    case EstimatorVariant::FEO: return "feo";
    case EstimatorVariant::FSEO: return "fseo";
    case EstimatorVariant::Total: return "total";
    case EstimatorVariant::BlackBoxCorrected: return "blackbox-corrected";
    case EstimatorVariant::CaldersBaseline: return "calders";
  }
  return "full";
}

EstimatorVariant parse_variant(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::replace(t.begin(), t.end(), '_', '-');
  if (t == "full" || t == "ols") return EstimatorVariant::Full;
  if (t == "exclude-s" || t == "excludes") return EstimatorVariant::ExcludeS;
  if (t == "marginal") return EstimatorVariant::Marginal;
  if (t == "feo") return EstimatorVariant::FEO;
  if (t == "fseo" || t == "seo") return EstimatorVariant::FSEO;
  if (t == "total") return EstimatorVariant::Total;
  if (t == "blackbox-corrected" || t == "corrected") return EstimatorVariant::BlackBoxCorrected;
  if (t == "calders") return EstimatorVariant::CaldersBaseline;
  throw VariantError("unknown estimator variant '" + std::string(text) + "'");
}

Vector TotalModelFit::beta_wb() const {
  Vector out(p_w() + p_b());
  out << beta_w, beta_b;
  return out;
}

std::uint64_t design_fingerprint(const EncodedDesign& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  hash_matrix(h, d.y);
  for (const Matrix* m : {&d.S, &d.X, &d.W, &d.B}) hash_matrix(h, *m);
  return h;
}

TotalModelFit fit_total(const EncodedDesign& d) {
  const Eigen::Index n = d.rows();
  if (n == 0) throw ContractError("fit_total: design has no rows");
  const Eigen::Index p = d.S.cols() + d.X.cols() + d.W.cols() + d.B.cols();
  if (p == 0) throw ContractError("fit_total: every covariate block is empty");
  if (n <= p + 1) {
    warn("fit_total: " + std::to_string(n) + " rows for " + std::to_string(p) +
         " columns plus intercept; coefficients are not identified");
  }

  TotalModelFit fit;
  fit.n = n;
  fit.beta0 = d.y.mean();
  fit.s_names = d.s_names;
  fit.x_names = d.x_names;
  fit.w_names = d.w_names;
  fit.b_names = d.b_names;
  fit.s_means = d.s_means;
  fit.x_means = d.x_means;
  fit.w_means = d.w_means;
  fit.b_means = d.b_means;
  fit.fingerprint = design_fingerprint(d);

  const Matrix full = hcat({&d.S, &d.X, &d.W, &d.B});
  const Vector yc = d.y.array() - fit.beta0;
  const LeastSquaresFit ls = solve_least_squares(full, yc);
  fit.dropped_columns = ls.dropped_columns;
  if (!ls.dropped_columns.empty()) {
    warn("fit_total: " + std::to_string(ls.dropped_columns.size()) +
         " aliased column(s) dropped with zero coefficient");
  }
  Eigen::Index at = 0;
  fit.beta_s = ls.coefficients.segment(at, d.S.cols());
  at += d.S.cols();
  fit.beta_x = ls.coefficients.segment(at, d.X.cols());
  at += d.X.cols();
  fit.beta_w = ls.coefficients.segment(at, d.W.cols());
  at += d.W.cols();
  fit.beta_b = ls.coefficients.segment(at, d.B.cols());

  const Matrix wb = d.suspect_block();
  const Matrix sx = hcat({&d.S, &d.X});
  fit.lambda_sx_for_w = solve_least_squares_multi(sx, wb);
  fit.lambda_s_for_w = solve_least_squares_multi(d.S, wb);
  fit.lambda_x_for_s = solve_least_squares_multi(d.X, d.S);

  const Matrix xwb = hcat({&d.X, &wb});
  const LeastSquaresFit restricted = solve_least_squares(xwb, yc);
  fit.restricted_beta_x = restricted.coefficients.head(d.X.cols());
  fit.restricted_beta_wb = restricted.coefficients.tail(wb.cols());
  return fit;
}

ImpartialPrediction predict(const TotalModelFit& fit, const EncodedDesign& d,
                            EstimatorVariant variant) {
  check_provenance(fit, d);
  const Eigen::Index n = d.rows();
  const Matrix wb = d.suspect_block();
  const Vector beta_wb = fit.beta_wb();

  ImpartialPrediction out;
  out.variant = variant;
  out.training_fingerprint = fit.fingerprint;
  Vector v = Vector::Constant(n, fit.beta0);

  switch (variant) {
    case EstimatorVariant::Full:
      v += d.S * fit.beta_s + d.X * fit.beta_x + wb * beta_wb;
      break;
    case EstimatorVariant::ExcludeS:
      v += d.X * fit.restricted_beta_x + wb * fit.restricted_beta_wb;
      break;
    case EstimatorVariant::Marginal:
      break;
    case EstimatorVariant::FEO:
      if (wb.cols() > 0) {
        throw VariantError("FEO requires an empty suspect block; use the 'total' variant");
      }
      v += d.X * fit.beta_x;
      break;
    case EstimatorVariant::FSEO:
      if (d.X.cols() > 0) {
        throw VariantError("FSEO requires an empty legitimate block; use the 'total' variant");
      }
      v += (wb - d.S * fit.lambda_s_for_w) * beta_wb;
      break;
    case EstimatorVariant::Total:
    case EstimatorVariant::BlackBoxCorrected:
      // X beta_x + W_hat beta_w + W_unique beta_w, with W_hat = X Lambda_x and
      // W_unique = W - S Lambda_s - X Lambda_x from the joint [S, X] regression.
      v += d.X * fit.beta_x + (wb - d.S * fit.lambda_s_joint()) * beta_wb;
      break;
    case EstimatorVariant::CaldersBaseline:
      throw VariantError("calders predictions come from the propensity-stratified baseline, not the total model");
  }
  if (!v.allFinite()) throw InputError("predict: non-finite prediction");
  out.values = std::move(v);
  return out;
}

EncodedDesign residualize_suspect(const EncodedDesign& d) {
  if (d.S.cols() == 0) {
    warn("residualize_suspect: sensitive block is empty; design returned unchanged");
    return d;
  }
  EncodedDesign out = d;
  const Matrix wb = d.suspect_block();
  const Matrix resid = project(d.S, wb).orthogonal;
  out.X = hcat({&d.X, &resid});
  out.x_names = d.x_names;
  for (const auto& name : d.w_names) out.x_names.push_back(name + "|s");
  for (const auto& name : d.b_names) out.x_names.push_back(name + "|s");
  out.x_means.resize(out.X.cols());
  out.x_means << d.x_means, Vector::Zero(resid.cols());
  out.W = Matrix(d.rows(), 0);
  out.B = Matrix(d.rows(), 0);
  out.w_names.clear();
  out.b_names.clear();
  out.w_means = Vector();
  out.b_means = Vector();
  return out;
}

EncodedDesign append_blackbox(const EncodedDesign& d, const Matrix& predictions, const Vector* means) {
  if (predictions.rows() != d.rows()) {
    throw ContractError("external predictions have " + std::to_string(predictions.rows()) +
                        " rows, design has " + std::to_string(d.rows()));
  }
  if (!predictions.allFinite()) throw InputError("external predictions contain non-finite values");
  Vector m;
  if (means) {
    if (means->size() != predictions.cols()) {
      throw ContractError("black-box centering means do not match prediction columns");
    }
    m = *means;
  } else {
    m = column_center(predictions).means;
  }
  Matrix centered = predictions.rowwise() - m.transpose();
  for (Eigen::Index j = 0; j < centered.cols(); ++j) {
    if (predictions.col(j).minCoeff() == predictions.col(j).maxCoeff() && m(j) == predictions(0, j)) {
      centered.col(j).setZero();
    }
  }
  EncodedDesign out = d;
  out.B = hcat({&d.B, &centered});
  out.b_means.resize(out.B.cols());
  out.b_means << d.b_means, m;
  const auto base = d.b_names.size();
  for (Eigen::Index j = 0; j < predictions.cols(); ++j) {
    out.b_names.push_back("blackbox" + std::to_string(base + static_cast<std::size_t>(j) + 1));
  }
  return out;
}

BlackBoxCorrection correct_blackbox(const EncodedDesign& design, const Matrix& external_predictions) {
  const EncodedDesign augmented = append_blackbox(design, external_predictions);
  BlackBoxCorrection out;
  out.fit = fit_total(augmented);
  out.prediction = predict(out.fit, augmented, EstimatorVariant::BlackBoxCorrected);
  return out;
}

}  // namespace impartial
