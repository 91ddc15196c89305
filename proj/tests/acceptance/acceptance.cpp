// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "impartial/decomposition.hpp"
#include "impartial/diagnostics.hpp"
#include "impartial/estimators.hpp"
#include "impartial/harness.hpp"
#include "impartial/metrics.hpp"
#include "impartial/random.hpp"
#include "oracles.hpp"
#include "wine_checks.hpp"

#include <algorithm>
#include <functional>
#include <iostream>

using namespace impartial;
using acceptance::fmt;
using acceptance::Line;

namespace {

double rel(const Matrix& a, const Matrix& b) { return oracle::rel_err(a, b); }

EncodedDesign without_suspect(EncodedDesign d) {
  d.W = Matrix(d.rows(), 0);
  d.w_names.clear();
  d.w_means = Vector();
  return d;
}

EncodedDesign without_legitimate(EncodedDesign d) {
  d.X = Matrix(d.rows(), 0);
  d.x_names.clear();
  d.x_means = Vector();
  return d;
}

// ------------------------------------------------------------------ 1

Line table1() {
  const Dataset data = gen_simple_example();
  const std::size_t cells[] = {0, 450, 600, 700};  // (low,s-) (low,s+) (high,s-) (high,s+)
  struct Row {
    const char* name;
    EstimatorVariant variant;
    CovariateRole edu;
    double values[4];
    double cell_tol;
    double ds;
    double rsse;
  };
  const Row rows[] = {
      {"Full", EstimatorVariant::Full, CovariateRole::Legitimate, {.5, .4, .2, .1}, .005, -.25, 13.84},
      {"Exclude-s", EstimatorVariant::ExcludeS, CovariateRole::Legitimate, {.475, .475, .125, .125}, .005, -.17, 13.91},
      {"FEO", EstimatorVariant::FEO, CovariateRole::Legitimate, {.455, .455, .155, .155}, .005, -.15, 13.93},
      {"SEO", EstimatorVariant::FSEO, CovariateRole::Suspect, {.39, .535, .09, .235}, .005, 0.0, 14.37},
      // Printed as .35; the exact marginal mean is .335.
      {"Marginal", EstimatorVariant::Marginal, CovariateRole::Legitimate, {.35, .35, .35, .35}, .02, 0.0, 14.93},
  };
  double worst_cell = 0, marginal_err = 0, worst_ds = 0, worst_rsse = 0;
  bool ok = true;
  for (const auto& r : rows) {
    const Schema schema = simple_example_schema(r.edu);
    const EncodedDesign d = encode(data, schema);
    const Vector p = predict(fit_total(d), d, r.variant).values;
    for (int c = 0; c < 4; ++c) {
      const double err = std::abs(p(static_cast<Eigen::Index>(cells[c])) - r.values[c]);
      double& slot = r.variant == EstimatorVariant::Marginal ? marginal_err : worst_cell;
      slot = std::max(slot, err);
      ok = ok && err <= r.cell_tol;
    }
    const double ds = discrimination_score(p, d.s_group_labels, "s+", "s-");
    const double rs = rsse(p, d.y);
    worst_ds = std::max(worst_ds, std::abs(ds - r.ds));
    worst_rsse = std::max(worst_rsse, std::abs(rs - r.rsse));
  }
  ok = ok && worst_ds <= .01 && worst_rsse <= .02;
  return {ok, "16 cells max err " + fmt("%.4f", worst_cell) + " (tol .005), marginal row err " +
                  fmt("%.4f", marginal_err) + " (tol .02), DS max err " +
                  fmt("%.4f", worst_ds) + " (tol .01), RSSE max err " + fmt("%.4f", worst_rsse) + " (tol .02)"};
}

// ------------------------------------------------------------------ 2

Line identities() {
  Rng rng(2024);
  double eq5 = 0, sum_id = 0, idem = 0, orth = 0;
  for (int k = 0; k < 100; ++k) {
    const auto ps = static_cast<Eigen::Index>(1 + rng.below(3));
    const auto px = static_cast<Eigen::Index>(1 + rng.below(4));
    const auto pw = static_cast<Eigen::Index>(rng.below(4));
    const EncodedDesign d = oracle::random_design(rng, 200, ps, px, pw);

    // Marginal = direct + indirect, marginal from an independent normal-equations fit.
    const EncodedDesign dx = without_suspect(d);
    const CoefDecomposition cd = decompose_coefficients(fit_total(dx), dx);
    const Vector marginal = oracle::ols_slopes(dx.X, dx.y);
    eq5 = std::max(eq5, rel(cd.direct + cd.indirect, marginal));

    // Components sum to the full-model fit, checked against the explicit hat matrix.
    const TotalModelFit fit = fit_total(d);
    const ComponentReport r = decompose(fit, d, DecompositionMode::Total);
    const Matrix all = hcat({&d.S, &d.X, &d.W});
    const Vector fitted = oracle::hat(all) * d.y + Vector::Constant(d.rows(), d.y.mean());
    sum_id = std::max(sum_id, rel(r.total(), fitted));

    // Projection idempotence and orthogonality.
    const Matrix basis = hcat({&d.X, &d.W});
    const ProjectionPair pp = project(basis, d.S);
    idem = std::max(idem, rel(project(basis, pp.projected).projected, pp.projected));
    orth = std::max(orth, (basis.transpose() * pp.orthogonal).norm() / (basis.norm() * d.S.norm()));
  }
  const bool ok = eq5 <= 1e-8 && sum_id <= 1e-8 && idem <= 1e-8 && orth <= 1e-8;
  return {ok, "100 designs n=200: marginal=direct+indirect " + fmt("%.1e", eq5) + ", component sum " +
                  fmt("%.1e", sum_id) + ", idempotence " + fmt("%.1e", idem) + ", orthogonality " +
                  fmt("%.1e", orth) + " (tol 1e-8)"};
}

// ------------------------------------------------------------------ 3

Line construction() {
  Rng rng(77);
  double is_feo = 0, is_fseo = 0, is_total_seo = 0, is_bbc = 0, is_total_design = 0, ds_fseo = 0;
  bool flip_exact = true;
  for (int k = 0; k < 50; ++k) {
    const auto ps = static_cast<Eigen::Index>(1 + rng.below(2));
    const auto px = static_cast<Eigen::Index>(1 + rng.below(3));
    const auto pw = static_cast<Eigen::Index>(1 + rng.below(3));
    const EncodedDesign full = oracle::random_design(rng, 300, ps, px, pw);

    const EncodedDesign feo_d = without_suspect(full);
    const TotalModelFit feo_fit = fit_total(feo_d);
    const Vector feo = predict(feo_fit, feo_d, EstimatorVariant::FEO).values;
    is_feo = std::max(is_feo, impartiality_score(feo, feo_d, feo_d.y, ImpartialityMode::FEO));

    // Flipping every sensitive indicator leaves FEO predictions untouched.
    EncodedDesign flipped = feo_d;
    flipped.S = -feo_d.S;
    flip_exact = flip_exact && predict(feo_fit, flipped, EstimatorVariant::FEO).values == feo;

    const EncodedDesign seo_d = without_legitimate(full);
    const TotalModelFit seo_fit = fit_total(seo_d);
    const Vector fseo = predict(seo_fit, seo_d, EstimatorVariant::FSEO).values;
    is_fseo = std::max(is_fseo, impartiality_score(fseo, seo_d, seo_d.y, ImpartialityMode::SEO));
    // DS per sensitive indicator; joint cells of several indicators are not
    // equalized by main effects alone.
    for (Eigen::Index j = 0; j < seo_d.S.cols(); ++j) {
      std::vector<std::string> labels(static_cast<std::size_t>(seo_d.rows()));
      for (Eigen::Index i = 0; i < seo_d.rows(); ++i) {
        labels[static_cast<std::size_t>(i)] = seo_d.S(i, j) + seo_d.s_means(j) > 0.5 ? "1" : "0";
      }
      ds_fseo = std::max(ds_fseo, std::abs(discrimination_score(fseo, labels, "1", "0")));
    }
    const Vector total_seo = predict(seo_fit, seo_d, EstimatorVariant::Total).values;
    is_total_seo = std::max(is_total_seo, impartiality_score(total_seo, seo_d, seo_d.y, ImpartialityMode::SEO));

    const Vector external = seo_d.y + oracle::gaussian(rng, seo_d.rows(), 1).col(0) + 0.5 * seo_d.S.rowwise().sum();
    const auto bbc = correct_blackbox(seo_d, external);
    is_bbc = std::max(is_bbc, impartiality_score(bbc.prediction.values, seo_d, seo_d.y, ImpartialityMode::SEO));

    const Vector total = predict(fit_total(full), full, EstimatorVariant::Total).values;
    is_total_design = std::max(is_total_design, impartiality_score(total, full, full.y, ImpartialityMode::Design));
  }
  const double worst_is = std::max({is_feo, is_fseo, is_total_seo, is_bbc, is_total_design});
  const bool ok = worst_is <= 1e-8 && ds_fseo <= 1e-10 && flip_exact;
  return {ok, "50 designs: IS FEO[feo] " + fmt("%.1e", is_feo) + ", FSEO[seo] " + fmt("%.1e", is_fseo) +
                  ", Total[seo] " + fmt("%.1e", is_total_seo) + ", BlackBoxCorrected[seo] " + fmt("%.1e", is_bbc) +
                  ", Total[design] " + fmt("%.1e", is_total_design) + " (tol 1e-8); FSEO DS " +
                  fmt("%.1e", ds_fseo) + " (tol 1e-10); FEO flip " + (flip_exact ? "exact" : "CHANGED")};
}

// ------------------------------------------------------------------ 4

Line residualize_refit() {
  Rng rng(4);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const auto ps = static_cast<Eigen::Index>(1 + rng.below(3));
    const auto px = static_cast<Eigen::Index>(rng.below(4));
    const auto pw = static_cast<Eigen::Index>(1 + rng.below(3));
    const EncodedDesign d = oracle::random_design(rng, 200, ps, px, pw);
    const TotalModelFit fit = fit_total(d);
    const EncodedDesign r = residualize_suspect(d);
    const TotalModelFit refit = fit_total(r);
    worst = std::max(worst, rel(refit.beta_x.tail(d.W.cols()), fit.beta_w));
  }
  return {worst <= 1e-8, "100 designs: max relative change of beta_w " + fmt("%.1e", worst) + " (tol 1e-8)"};
}

// ------------------------------------------------------------------ 5

Line residual_conditions() {
  double worst = 0;
  int designs = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ps = static_cast<Eigen::Index>(1 + seed % 2);
    const auto px = static_cast<Eigen::Index>(1 + seed % 3);
    const auto pw = static_cast<Eigen::Index>(1 + seed % 2);
    const GeneratedData g = gen_dag(make_dag_spec(ps, px, 1, pw, true, 500, seed));
    const EncodedDesign d = encode(g.data, g.schema);
    const Vector total = predict(fit_total(d), d, EstimatorVariant::Total).values;
    const ImpartialityBreakdown b = impartiality_breakdown(total, d, d.y, ImpartialityMode::Design);
    const double m = std::max({b.mean_term, b.legitimate_terms.size() ? b.legitimate_terms.maxCoeff() : 0.0,
                               b.suspect_terms.size() ? b.suspect_terms.maxCoeff() : 0.0});
    worst = std::max(worst, m);
    ++designs;
  }
  return {worst <= 1e-8, std::to_string(designs) + " fair-DAG samples n=500: max residual-condition discrepancy " +
                             fmt("%.1e", worst) + " (tol 1e-8)"};
}

// ------------------------------------------------------------------ 8

Line noise_robustness() {
  const GeneratedData g = gen_dag(make_dag_spec(1, 2, 1, 1, false, 100000, 8));
  const EncodedDesign declared = encode(g.data, g.schema);
  const EncodedDesign legit = encode(g.data, with_covariate_role(g.schema, CovariateRole::Legitimate));
  const EncodedDesign suspect = encode(g.data, with_covariate_role(g.schema, CovariateRole::Suspect));
  struct Case {
    const char* name;
    const EncodedDesign* design;
    EstimatorVariant variant;
    ImpartialityMode mode;
  };
  const Case cases[] = {{"Full", &legit, EstimatorVariant::Full, ImpartialityMode::SEO},
                        {"FEO", &legit, EstimatorVariant::FEO, ImpartialityMode::FEO},
                        {"FSEO", &suspect, EstimatorVariant::FSEO, ImpartialityMode::SEO},
                        {"Total", &declared, EstimatorVariant::Total, ImpartialityMode::Design}};
  Rng rng(88);
  double worst = 0;
  std::string detail;
  for (const auto& c : cases) {
    const Vector p = predict(fit_total(*c.design), *c.design, c.variant).values;
    const double sd = std::sqrt((p.array() - p.mean()).square().mean());
    Vector noisy = p;
    for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy(i) += 0.1 * sd * rng.normal();
    const double delta = std::abs(impartiality_score(noisy, *c.design, c.design->y, c.mode) -
                                  impartiality_score(p, *c.design, c.design->y, c.mode));
    worst = std::max(worst, delta);
    detail += std::string(detail.empty() ? "" : ", ") + c.name + " " + fmt("%.1e", delta);
  }
  return {worst < .01, "n=1e5, noise sd .1 sd(Yhat): |IS change| " + detail + " (tol .01)"};
}

}  // namespace

int main() {
  // Rank-deficiency notes from the Calders bins and black-box fits are expected here.
  std::vector<std::string> warnings;
  set_warning_handler([&](std::string_view m) {
    if (std::find(warnings.begin(), warnings.end(), m) == warnings.end()) warnings.emplace_back(m);
  });

  int failures = 0;
  const auto report = [&](int id, const char* name, const std::function<Line()>& body, double limit_s = 0.0) {
    acceptance::Stopwatch sw;
    Line l;
    try {
      l = body();
    } catch (const std::exception& e) {
      l = {false, std::string("exception: ") + e.what()};
    }
    const double secs = sw.seconds();
    if (limit_s > 0 && secs >= limit_s) {
      l.pass = false;
      l.detail += "; runtime over limit";
    }
    if (!l.pass) ++failures;
    std::cout << (l.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << l.detail << "  ("
              << fmt("%.2f", secs) << " s" << (limit_s > 0 ? ", limit " + fmt("%g", limit_s) + " s" : "") << ")"
              << std::endl;
  };

  report(1, "Loan example golden values", table1, 1.0);
  report(2, "Algebraic identities", identities, 5.0);
  report(3, "Construction guarantees", construction);
  report(4, "Residualize-then-refit", residualize_refit);
  report(5, "Residual conditions on fair-DAG data", residual_conditions);

  // Criteria 6 and 7 on the synthetic wine-like table; the reference linear-model
  // cells need the public data and are checked by acceptance_wine.
  const GeneratedData wine = gen_wine_like(6497, 1);
  acceptance::WineRun run;
  report(6, "Wine protocol properties (synthetic wine-like data)", [&] {
    run = acceptance::run_wine_protocol(wine.data, wine.schema);
    return acceptance::wine_properties(run);
  });
  for (const auto& row : acceptance::wine_table_rows(run)) std::cout << "      " << row << '\n';
  report(7, "Bias mechanics (synthetic wine-like data)",
         [&] { return acceptance::bias_mechanics(wine.data, wine.schema, "white"); });
  report(8, "Noise robustness of IS", noise_robustness);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed")
            << '\n';
  return failures == 0 ? 0 : 1;
}
