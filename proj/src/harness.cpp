#include "impartial/harness.hpp"

#include "impartial/csv.hpp"
#include "impartial/diagnostics.hpp"
#include "impartial/errors.hpp"
#include "impartial/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <optional>
#include <ostream>
#include <thread>

namespace impartial {

// ---------------------------------------------------------------- generators

Dataset gen_simple_example() {
  struct Cell {
    const char* edu;
    const char* group;
    int defaults;
    int repaid;
  };
  constexpr Cell cells[] = {
      {"low", "s-", 225, 225},
      {"low", "s+", 60, 90},
      {"high", "s-", 20, 80},
      {"high", "s+", 30, 270},
  };
  std::vector<double> y;
  std::vector<std::string> edu, group;
  for (const auto& c : cells) {
    for (int i = 0; i < c.defaults + c.repaid; ++i) {
      y.push_back(i < c.defaults ? 1.0 : 0.0);
      edu.emplace_back(c.edu);
      group.emplace_back(c.group);
    }
  }
  Dataset d;
  d.add_numeric("default", std::move(y));
  d.add_categorical("edu", std::move(edu), {"low", "high"});
  d.add_categorical("group", std::move(group), {"s-", "s+"});
  return d;
}

Schema simple_example_schema(CovariateRole edu_role) {
  Schema s;
  s.columns = {
      {"default", CovariateRole::Response, ColumnKind::Numeric},
      {"edu", edu_role, ColumnKind::Categorical},
      {"group", CovariateRole::Sensitive, ColumnKind::Categorical},
  };
  return s;
}

DagSpec make_dag_spec(Eigen::Index p_s, Eigen::Index p_x, Eigen::Index p_xu, Eigen::Index p_w,
                      bool fair, std::size_t n, std::uint64_t seed) {
  if (p_s < 1 || p_x < 0 || p_xu < 0 || p_w < 0) {
    throw ContractError("DAG spec: need p_s >= 1 and non-negative p_x, p_xu, p_w");
  }
  DagSpec spec;
  spec.p_s = p_s;
  spec.p_x = p_x;
  spec.p_xu = p_xu;
  spec.p_w = p_w;
  spec.n = n;
  spec.fair = fair;
  spec.seed = seed;
  spec.s_to_x = Matrix::Constant(p_s, p_x, 0.8);
  spec.s_to_xu = Matrix::Constant(p_s, p_xu, 0.8);
  spec.s_to_w = Matrix::Constant(p_s, p_w, 0.8);
  spec.xu_to_w = Matrix::Constant(p_xu, p_w, 0.6);
  spec.x_to_y = Vector::Ones(p_x);
  spec.xu_to_y = Vector::Ones(p_xu);
  spec.w_to_y = Vector::Constant(p_w, fair ? 0.0 : 0.3);
  spec.s_to_y = Vector::Constant(p_s, fair ? 0.0 : 0.5);
  return spec;
}

namespace {

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ContractError(std::string("DAG spec: ") + name + " must be " + std::to_string(rows) +
                        " x " + std::to_string(cols) + ", got " + std::to_string(m.rows()) +
                        " x " + std::to_string(m.cols()));
  }
}

void check_shape(const Vector& v, Eigen::Index size, const char* name) {
  if (v.size() != size) {
    throw ContractError(std::string("DAG spec: ") + name + " must have " + std::to_string(size) +
                        " entries, got " + std::to_string(v.size()));
  }
}

}  // namespace

GeneratedData gen_dag(const DagSpec& spec) {
  if (spec.p_s < 1 || spec.p_x < 0 || spec.p_xu < 0 || spec.p_w < 0) {
    throw ContractError("DAG spec: need p_s >= 1 and non-negative p_x, p_xu, p_w");
  }
  if (spec.n < 2) throw ContractError("DAG spec: need at least 2 rows");
  if (!(spec.noise_x > 0.0) || !(spec.noise_w > 0.0) || !(spec.noise_y > 0.0)) {
    throw ContractError("DAG spec: noise scales must be positive");
  }
  check_shape(spec.s_to_x, spec.p_s, spec.p_x, "s_to_x");
  check_shape(spec.s_to_xu, spec.p_s, spec.p_xu, "s_to_xu");
  check_shape(spec.s_to_w, spec.p_s, spec.p_w, "s_to_w");
  check_shape(spec.xu_to_w, spec.p_xu, spec.p_w, "xu_to_w");
  check_shape(spec.x_to_y, spec.p_x, "x_to_y");
  check_shape(spec.xu_to_y, spec.p_xu, "xu_to_y");
  check_shape(spec.w_to_y, spec.p_w, "w_to_y");
  check_shape(spec.s_to_y, spec.p_s, "s_to_y");
  if (spec.fair && (spec.s_to_y.any() || spec.w_to_y.any())) {
    throw ContractError("DAG spec: fair data cannot have direct s->y or w->y edges");
  }

  const auto n = static_cast<Eigen::Index>(spec.n);
  Matrix S(n, spec.p_s), X(n, spec.p_x), XU(n, spec.p_xu), W(n, spec.p_w);
  Vector y(n);
  Rng rng(spec.seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < spec.p_s; ++k) S(i, k) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const Eigen::RowVectorXd s = S.row(i);
    for (Eigen::Index k = 0; k < spec.p_x; ++k) {
      X(i, k) = s.dot(spec.s_to_x.col(k)) + spec.noise_x * rng.normal();
    }
    for (Eigen::Index k = 0; k < spec.p_xu; ++k) {
      XU(i, k) = s.dot(spec.s_to_xu.col(k)) + spec.noise_x * rng.normal();
    }
    const Eigen::RowVectorXd xu = XU.row(i);
    for (Eigen::Index k = 0; k < spec.p_w; ++k) {
      W(i, k) = s.dot(spec.s_to_w.col(k)) + xu.dot(spec.xu_to_w.col(k)) +
                spec.noise_w * rng.normal();
    }
    y[i] = X.row(i).dot(spec.x_to_y) + xu.dot(spec.xu_to_y) + W.row(i).dot(spec.w_to_y) +
           s.dot(spec.s_to_y) + spec.noise_y * rng.normal();
  }

  GeneratedData out;
  auto add = [&](const std::string& name, const Eigen::Ref<const Vector>& values, CovariateRole role) {
    out.data.add_numeric(name, std::vector<double>(values.data(), values.data() + values.size()));
    out.schema.columns.push_back({name, role, ColumnKind::Numeric});
  };
  for (Eigen::Index k = 0; k < spec.p_s; ++k) add("s" + std::to_string(k + 1), S.col(k), CovariateRole::Sensitive);
  for (Eigen::Index k = 0; k < spec.p_x; ++k) add("x" + std::to_string(k + 1), X.col(k), CovariateRole::Legitimate);
  for (Eigen::Index k = 0; k < spec.p_w; ++k) add("w" + std::to_string(k + 1), W.col(k), CovariateRole::Suspect);
  add("y", y, CovariateRole::Response);
  return out;
}

GeneratedData gen_wine_like(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ContractError("wine-like generator: need at least 2 rows");
  struct Feature {
    const char* name;
    double mean;
    double sd;
    double white_shift;  // white-minus-red difference in sd units
    double weight;       // effect of the within-type variation on quality
  };
  constexpr Feature features[] = {
      {"fixed acidity", 7.2, 1.3, -1.0, 0.05},
      {"volatile acidity", 0.34, 0.16, -1.3, -0.25},
      {"citric acid", 0.32, 0.15, 0.6, 0.05},
      {"residual sugar", 5.4, 4.8, 1.0, 0.10},
      {"chlorides", 0.056, 0.035, -1.4, -0.05},
      {"free sulfur dioxide", 30.5, 17.7, 1.3, 0.12},
      {"total sulfur dioxide", 115.7, 56.5, 2.2, -0.06},
      {"density", 0.9947, 0.003, -0.5, -0.10},
      {"pH", 3.22, 0.16, -0.9, 0.05},
      {"sulphates", 0.53, 0.15, -1.0, 0.12},
      {"alcohol", 10.5, 1.19, 0.0, 0.30},
  };
  constexpr std::size_t alcohol = 10;
  constexpr double type_gap = 0.24;
  constexpr double curvature = 0.245;
  constexpr double noise_sd = 0.64;

  Rng rng(seed);
  const auto n_red = static_cast<std::size_t>(std::llround(static_cast<double>(n) * 1599.0 / 6497.0));
  std::vector<std::string> type(n, "white");
  std::fill(type.begin(), type.begin() + static_cast<std::ptrdiff_t>(n_red), "red");
  rng.shuffle(std::span<std::string>(type));
  const double p_white = 1.0 - static_cast<double>(n_red) / static_cast<double>(n);

  std::vector<std::vector<double>> columns(std::size(features), std::vector<double>(n));
  std::vector<double> quality(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double white = (type[i] == "white" ? 1.0 : 0.0) - p_white;
    double q = 5.82 + type_gap * white;
    for (std::size_t j = 0; j < std::size(features); ++j) {
      const auto& f = features[j];
      const double u = rng.normal();
      columns[j][i] = f.mean + f.sd * (f.white_shift * white + u);
      q += f.weight * u;
      if (j == alcohol) q += curvature * (u * u - 1.0);
    }
    quality[i] = q + noise_sd * rng.normal();
  }

  GeneratedData out;
  for (std::size_t j = 0; j < std::size(features); ++j) {
    out.data.add_numeric(features[j].name, std::move(columns[j]));
    out.schema.columns.push_back({features[j].name, CovariateRole::Legitimate, ColumnKind::Numeric});
  }
  out.data.add_numeric("quality", std::move(quality));
  out.schema.columns.push_back({"quality", CovariateRole::Response, ColumnKind::Numeric});
  out.data.add_categorical("type", std::move(type), {"red", "white"});
  out.schema.columns.push_back({"type", CovariateRole::Sensitive, ColumnKind::Categorical});
  return out;
}

// ---------------------------------------------------------------------- bias

std::vector<std::size_t> bias_rows(const std::vector<std::string>& group_labels, const BiasSpec& spec) {
  if (!(spec.fraction >= 0.0 && spec.fraction <= 1.0)) {
    throw ContractError("bias fraction must lie in [0, 1]");
  }
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < group_labels.size(); ++i) {
    if (group_labels[i] == spec.target_group) members.push_back(i);
  }
  if (members.empty()) throw ContractError("bias target group '" + spec.target_group + "' not present");
  const auto count = static_cast<std::size_t>(
      std::llround(spec.fraction * static_cast<double>(members.size())));
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(members.size() - i));
    std::swap(members[i], members[j]);
  }
  members.resize(count);
  std::sort(members.begin(), members.end());
  return members;
}

Dataset inject_bias(const Dataset& data, const Schema& schema, const BiasSpec& spec) {
  schema.validate();
  const auto rows = bias_rows(sensitive_group_labels(data, schema), spec);
  Dataset out = data;
  auto& y = out.column(schema.response().name).values;
  for (auto r : rows) y[r] += spec.shift;
  return out;
}

// ------------------------------------------------------------------- Calders

namespace {

Matrix calders_covariates(const EncodedDesign& d) { return hcat({&d.X, &d.W, &d.B}); }

std::vector<std::string> calders_names(const EncodedDesign& d) {
  std::vector<std::string> names = d.x_names;
  names.insert(names.end(), d.w_names.begin(), d.w_names.end());
  names.insert(names.end(), d.b_names.begin(), d.b_names.end());
  return names;
}

template <typename Rows>
EncodedDesign bin_design(const EncodedDesign& d, const Matrix& C, const Rows& rows,
                         const Vector& s_means, const Vector& c_means) {
  const auto m = static_cast<Eigen::Index>(rows.size());
  EncodedDesign b;
  b.y.resize(m);
  b.S.resize(m, d.S.cols());
  b.W.resize(m, C.cols());
  b.X.resize(m, 0);
  b.B.resize(m, 0);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
    b.y[i] = d.y.size() ? d.y[r] : 0.0;
    b.S.row(i) = d.S.row(r) - s_means.transpose();
    b.W.row(i) = C.row(r) - c_means.transpose();
  }
  b.s_names = d.s_names;
  b.w_names = calders_names(d);
  b.s_means = s_means;
  b.w_means = c_means;
  b.x_means = Vector();
  b.b_means = Vector();
  return b;
}

std::size_t bin_of(const std::vector<double>& edges, double p) {
  return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), p) - edges.begin());
}

}  // namespace

Vector calders_propensity(const CaldersModel& model, const EncodedDesign& design) {
  const Matrix C = calders_covariates(design);
  if (C.cols() != model.p_c || design.S.cols() != model.p_s) {
    throw ContractError("Calders baseline: design columns do not match the fitted model");
  }
  Vector p = Vector::Constant(design.rows(), model.propensity_mean);
  if (C.cols() > 0) p += C * model.propensity_coef;
  return p;
}

CaldersModel fit_calders(const EncodedDesign& train, std::size_t bins) {
  if (bins < 1) throw ContractError("Calders baseline: need at least one bin");
  if (train.rows() == 0) throw ContractError("Calders baseline: empty training data");
  if (train.S.cols() != 1) {
    throw ContractError("Calders baseline needs exactly one binary sensitive indicator, got " +
                        std::to_string(train.S.cols()) + " sensitive columns");
  }
  {
    std::vector<double> v(train.S.data(), train.S.data() + train.S.size());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (v.size() > 2) throw ContractError("Calders baseline needs a binary sensitive attribute");
  }

  CaldersModel model;
  const Matrix C = calders_covariates(train);
  model.p_s = 1;
  model.p_c = C.cols();
  model.propensity_mean = train.s_means.size() ? train.s_means[0] : 0.0;
  model.propensity_coef = C.cols() ? solve_least_squares(C, train.S.col(0)).coefficients : Vector();
  model.fingerprint = design_fingerprint(train);

  const Vector p = calders_propensity(model, train);
  std::vector<double> sorted(p.data(), p.data() + p.size());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();
  if (hi - lo > 1e-9 * std::max(1.0, std::abs(hi))) {
    for (std::size_t k = 1; k < bins; ++k) model.edges.push_back(sorted[k * sorted.size() / bins]);
    model.edges.erase(std::unique(model.edges.begin(), model.edges.end()), model.edges.end());
  }

  std::vector<std::vector<std::size_t>> members(model.edges.size() + 1);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    members[bin_of(model.edges, p[i])].push_back(static_cast<std::size_t>(i));
  }
  const double global_mean = train.y.mean();
  for (std::size_t k = 0; k < members.size(); ++k) {
    CaldersModel::Bin bin;
    const auto& rows = members[k];
    bin.mean_response = global_mean;
    if (rows.empty()) {
      model.bins.push_back(std::move(bin));
      continue;
    }
    double sum = 0.0, s_min = train.S(static_cast<Eigen::Index>(rows[0]), 0), s_max = s_min;
    Vector c_sum = Vector::Zero(C.cols());
    for (auto r : rows) {
      const auto ri = static_cast<Eigen::Index>(r);
      sum += train.y[ri];
      s_min = std::min(s_min, train.S(ri, 0));
      s_max = std::max(s_max, train.S(ri, 0));
      c_sum += C.row(ri).transpose();
    }
    const double m = static_cast<double>(rows.size());
    bin.mean_response = sum / m;
    if (s_max - s_min <= 1e-12) {
      warn("Calders baseline: propensity bin " + std::to_string(k + 1) +
           " holds a single sensitive class; predicting the bin mean response");
      model.bins.push_back(std::move(bin));
      continue;
    }
    double s_sum = 0.0;
    for (auto r : rows) s_sum += train.S(static_cast<Eigen::Index>(r), 0);
    bin.s_means = Vector::Constant(1, s_sum / m);
    bin.c_means = c_sum / m;
    bin.fit = fit_total(bin_design(train, C, rows, bin.s_means, bin.c_means));
    bin.fallback = false;
    model.bins.push_back(std::move(bin));
  }
  return model;
}

ImpartialPrediction predict_calders(const CaldersModel& model, const EncodedDesign& design) {
  const Vector p = calders_propensity(model, design);
  const Matrix C = calders_covariates(design);
  std::vector<std::vector<std::size_t>> members(model.bins.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    members[bin_of(model.edges, p[i])].push_back(static_cast<std::size_t>(i));
  }
  ImpartialPrediction out;
  out.variant = EstimatorVariant::CaldersBaseline;
  out.training_fingerprint = model.fingerprint;
  out.values = Vector::Zero(design.rows());
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto& rows = members[k];
    if (rows.empty()) continue;
    const auto& bin = model.bins[k];
    if (bin.fallback) {
      for (auto r : rows) out.values[static_cast<Eigen::Index>(r)] = bin.mean_response;
      continue;
    }
    const auto sub = bin_design(design, C, rows, bin.s_means, bin.c_means);
    const Vector v = predict(bin.fit, sub, EstimatorVariant::FSEO).values;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.values[static_cast<Eigen::Index>(rows[i])] = v[static_cast<Eigen::Index>(i)];
    }
  }
  return out;
}

ImpartialPrediction calders_baseline(const Dataset& data, const Schema& schema, std::size_t bins) {
  const auto design = encode(data, schema);
  return predict_calders(fit_calders(design, bins), design);
}

// ---------------------------------------------------------------------- arms

std::string_view to_string(Arm arm) {
  switch (arm) {
    case Arm::OLS: return "ols";
    case Arm::FEO: return "feo";
    case Arm::SEO: return "seo";
    case Arm::Calders: return "calders";
    case Arm::Marginal: return "marginal";
    case Arm::ExcludeS: return "exclude-s";
    case Arm::Total: return "total";
    case Arm::Forest: return "rf";
    case Arm::FEOForest: return "feo-rf";
    case Arm::SEOForest: return "seo-rf";
  }
  return "?";
}

std::string_view display_name(Arm arm) {
  switch (arm) {
    case Arm::OLS: return "OLS";
    case Arm::FEO: return "Formal EO";
    case Arm::SEO: return "Sub. EO";
    case Arm::Calders: return "Calders";
    case Arm::Marginal: return "Marginal";
    case Arm::ExcludeS: return "Exclude-s";
    case Arm::Total: return "Total";
    case Arm::Forest: return "RF";
    case Arm::FEOForest: return "Formal EO RF";
    case Arm::SEOForest: return "Sub. EO RF";
  }
  return "?";
}

Arm parse_arm(std::string_view text) {
  for (Arm a : {Arm::OLS, Arm::FEO, Arm::SEO, Arm::Calders, Arm::Marginal, Arm::ExcludeS,
                Arm::Total, Arm::Forest, Arm::FEOForest, Arm::SEOForest}) {
    if (text == to_string(a)) return a;
  }
  throw ContractError("unknown estimator arm '" + std::string(text) +
                      "' (expected ols, feo, seo, calders, marginal, exclude-s, total, rf, feo-rf, seo-rf)");
}

ImpartialityMode impartiality_mode_for(Arm arm) {
  switch (arm) {
    case Arm::FEO:
    case Arm::FEOForest:
    case Arm::ExcludeS:
      return ImpartialityMode::FEO;
    case Arm::Total:
      return ImpartialityMode::Design;
    default:
      return ImpartialityMode::SEO;
  }
}

// ---------------------------------------------------------------- experiment

unsigned resolve_thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("IMPARTIAL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    warn(std::string("ignoring IMPARTIAL_THREADS='") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

constexpr std::uint64_t kBiasStream = 0xb1a5;
constexpr std::uint64_t kFoldStream = 0xf01d;
constexpr std::uint64_t kForestStream = 0xf0e5;

double target_gap(const Vector& v, const std::vector<std::string>& labels, const std::string& target) {
  double in = 0.0, out = 0.0;
  std::size_t n_in = 0, n_out = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == target) {
      in += v[static_cast<Eigen::Index>(i)];
      ++n_in;
    } else {
      out += v[static_cast<Eigen::Index>(i)];
      ++n_out;
    }
  }
  if (n_in == 0 || n_out == 0) {
    throw ContractError("group '" + target + "' or its complement is missing from a test fold");
  }
  return in / static_cast<double>(n_in) - out / static_cast<double>(n_out);
}

bool uses(const ExperimentConfig& c, std::initializer_list<Arm> arms) {
  return std::any_of(c.arms.begin(), c.arms.end(), [&](Arm a) {
    return std::find(arms.begin(), arms.end(), a) != arms.end();
  });
}

struct Repetition {
  double biased_gap = 0.0;
  std::vector<std::vector<FoldMetrics>> per_arm;  // [arm][fold]
  std::vector<double> pooled_is;                  // [arm]
};

Repetition run_repetition(const Dataset& data, const Schema& schema, const ExperimentConfig& config,
                          const BiasSpec& bias, int r) {
  const auto rep = static_cast<std::uint64_t>(r);
  BiasSpec spec = bias;
  spec.seed = derive_seed(config.master_seed ^ bias.seed, rep, kBiasStream);
  const Dataset biased = inject_bias(data, schema, spec);
  const std::string& response = schema.response().name;

  Repetition out;
  out.per_arm.resize(config.arms.size());
  {
    const auto& yb = biased.column(response).values;
    out.biased_gap = target_gap(Eigen::Map<const Vector>(yb.data(), static_cast<Eigen::Index>(yb.size())),
                                sensitive_group_labels(biased, schema), bias.target_group);
  }

  Rng rng(derive_seed(config.master_seed, rep, kFoldStream));
  const auto perm = permutation(data.rows(), rng);
  const Schema legit = with_covariate_role(schema, CovariateRole::Legitimate);
  const Schema suspect = with_covariate_role(schema, CovariateRole::Suspect);
  const bool need_suspect = uses(config, {Arm::SEO, Arm::Calders, Arm::SEOForest});
  const bool need_declared = uses(config, {Arm::Total});
  const bool need_forest = uses(config, {Arm::Forest, Arm::FEOForest, Arm::SEOForest});
  const std::size_t n = data.rows();
  const auto k = static_cast<std::size_t>(config.folds);
  // Out-of-fold predictions in original row order, one column per arm.
  Matrix pooled(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(config.arms.size()));

  for (int f = 0; f < config.folds; ++f) {
    const auto fu = static_cast<std::size_t>(f);
    std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(fu * n / k),
                                  perm.begin() + static_cast<std::ptrdiff_t>((fu + 1) * n / k));
    std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(fu * n / k));
    train.insert(train.end(), perm.begin() + static_cast<std::ptrdiff_t>((fu + 1) * n / k), perm.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());

    const Dataset train_b = biased.select_rows(train);
    const Dataset test_raw = data.select_rows(test);
    const auto& yb_all = biased.column(response).values;
    Vector y_biased(static_cast<Eigen::Index>(test.size()));
    for (std::size_t i = 0; i < test.size(); ++i) y_biased[static_cast<Eigen::Index>(i)] = yb_all[test[i]];

    const Encoder enc_legit = Encoder::fit(train_b, legit);
    const EncodedDesign tr_legit = enc_legit.transform(train_b);
    const EncodedDesign te_legit = enc_legit.transform(test_raw);
    const TotalModelFit fit_legit = fit_total(tr_legit);

    std::optional<Encoder> enc_susp;
    std::optional<EncodedDesign> tr_susp, te_susp;
    std::optional<TotalModelFit> fit_susp;
    if (need_suspect) {
      enc_susp = Encoder::fit(train_b, suspect);
      tr_susp = enc_susp->transform(train_b);
      te_susp = enc_susp->transform(test_raw);
      fit_susp = fit_total(*tr_susp);
    }
    std::optional<EncodedDesign> te_decl;
    std::optional<TotalModelFit> fit_decl;
    if (need_declared) {
      const Encoder enc = Encoder::fit(train_b, schema);
      te_decl = enc.transform(test_raw);
      fit_decl = fit_total(enc.transform(train_b));
    }
    Vector forest_train, forest_test;
    if (need_forest) {
      ForestConfig fc = config.forest;
      fc.seed = derive_seed(config.master_seed ^ config.forest.seed, rep,
                            kForestStream + static_cast<std::uint64_t>(f));
      const auto forest = BaggedForest::fit(tree_features(tr_legit), tr_legit.y, fc);
      forest_train = forest.out_of_bag();
      forest_test = forest.predict(tree_features(te_legit));
    }

    for (std::size_t a = 0; a < config.arms.size(); ++a) {
      const Arm arm = config.arms[a];
      Vector pred;
      switch (arm) {
        case Arm::OLS: pred = predict(fit_legit, te_legit, EstimatorVariant::Full).values; break;
        case Arm::FEO: pred = predict(fit_legit, te_legit, EstimatorVariant::FEO).values; break;
        case Arm::Marginal: pred = predict(fit_legit, te_legit, EstimatorVariant::Marginal).values; break;
        case Arm::ExcludeS: pred = predict(fit_legit, te_legit, EstimatorVariant::ExcludeS).values; break;
        case Arm::SEO: pred = predict(*fit_susp, *te_susp, EstimatorVariant::FSEO).values; break;
        case Arm::Calders:
          pred = predict_calders(fit_calders(*tr_susp, config.calders_bins), *te_susp).values;
          break;
        case Arm::Total: pred = predict(*fit_decl, *te_decl, EstimatorVariant::Total).values; break;
        case Arm::Forest: pred = forest_test; break;
        case Arm::FEOForest:
        case Arm::SEOForest: {
          const bool feo = arm == Arm::FEOForest;
          const EncodedDesign& tr = feo ? tr_legit : *tr_susp;
          const EncodedDesign& te = feo ? te_legit : *te_susp;
          const EncodedDesign tr_bb = append_blackbox(tr, forest_train);
          const EncodedDesign te_bb = append_blackbox(te, forest_test, &tr_bb.b_means);
          const TotalModelFit fit = fit_total(tr_bb);
          pred = predict(fit, te_bb, feo ? EstimatorVariant::Total : EstimatorVariant::BlackBoxCorrected).values;
          break;
        }
      }
      const ImpartialityMode mode = impartiality_mode_for(arm);
      const EncodedDesign& score_design = mode == ImpartialityMode::Design ? *te_decl : te_legit;
      FoldMetrics m;
      m.repetition = r;
      m.fold = f;
      m.rmse_raw = rmse(pred, te_legit.y);
      m.rmse_biased = rmse(pred, y_biased);
      m.ds = target_gap(pred, te_legit.s_group_labels, bias.target_group);
      m.is = impartiality_score(pred, score_design, y_biased, mode);
      out.per_arm[a].push_back(m);
      for (std::size_t i = 0; i < test.size(); ++i) {
        pooled(static_cast<Eigen::Index>(test[i]), static_cast<Eigen::Index>(a)) = pred(static_cast<Eigen::Index>(i));
      }
    }
  }

  // IS of the pooled out-of-fold predictions against the whole biased response.
  // Covariates are unaffected by the bias, so the raw data supplies the design.
  const auto& yb = biased.column(response).values;
  const Vector y_biased_all = Eigen::Map<const Vector>(yb.data(), static_cast<Eigen::Index>(n));
  std::optional<EncodedDesign> all_legit, all_decl;
  out.pooled_is.resize(config.arms.size());
  for (std::size_t a = 0; a < config.arms.size(); ++a) {
    const ImpartialityMode mode = impartiality_mode_for(config.arms[a]);
    std::optional<EncodedDesign>& design = mode == ImpartialityMode::Design ? all_decl : all_legit;
    if (!design) design = encode(data, mode == ImpartialityMode::Design ? schema : legit);
    out.pooled_is[a] = impartiality_score(pooled.col(static_cast<Eigen::Index>(a)), *design, y_biased_all, mode);
  }
  return out;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

ExperimentResult kfold_validate(const Dataset& data, const Schema& schema,
                                const ExperimentConfig& config, const BiasSpec& bias) {
  schema.validate();
  if (config.folds < 2) throw ContractError("validation needs at least 2 folds");
  if (config.repetitions < 1) throw ContractError("validation needs at least 1 repetition");
  if (config.arms.empty()) throw ContractError("validation needs at least one estimator arm");
  if (static_cast<std::size_t>(config.folds) > data.rows()) {
    throw ContractError("fold count " + std::to_string(config.folds) + " exceeds the " +
                        std::to_string(data.rows()) + " available rows");
  }
  if (schema.with_role(CovariateRole::Sensitive).empty()) {
    throw ContractError("validation needs a sensitive column");
  }

  const auto reps = static_cast<std::size_t>(config.repetitions);
  std::vector<Repetition> results(reps);
  std::vector<std::exception_ptr> errors(reps);
  const unsigned threads = std::min<unsigned>(resolve_thread_count(config.threads),
                                              static_cast<unsigned>(reps));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      try {
        results[r] = run_repetition(data, schema, config, bias, static_cast<int>(r));
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentResult out;
  out.target_group = bias.target_group;
  out.folds = config.folds;
  out.repetitions = config.repetitions;
  {
    const auto& y = data.column(schema.response().name).values;
    out.raw_gap = target_gap(Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size())),
                             sensitive_group_labels(data, schema), bias.target_group);
  }
  for (const auto& rep : results) out.biased_gap += rep.biased_gap / static_cast<double>(reps);
  for (std::size_t a = 0; a < config.arms.size(); ++a) {
    ArmSummary s;
    s.arm = config.arms[a];
    s.is_mode = impartiality_mode_for(s.arm);
    for (const auto& rep : results) {
      s.folds.insert(s.folds.end(), rep.per_arm[a].begin(), rep.per_arm[a].end());
    }
    const auto count = static_cast<double>(s.folds.size());
    for (const auto& m : s.folds) {
      s.rmse_biased += m.rmse_biased / count;
      s.rmse_raw += m.rmse_raw / count;
      s.ds += m.ds / count;
      s.is_per_fold += m.is / count;
    }
    for (const auto& rep : results) s.is += rep.pooled_is[a] / static_cast<double>(reps);
    out.arms.push_back(std::move(s));
  }
  return out;
}

void write_experiment_table(std::ostream& out, const ExperimentResult& result) {
  out << result.repetitions << " repetitions x " << result.folds << "-fold cross-validation\n";
  out << "group gap (" << result.target_group << " - rest): raw " << fmt6(result.raw_gap)
      << ", biased " << fmt6(result.biased_gap) << "\n\n";
  std::vector<std::string> head{""};
  for (const auto& a : result.arms) head.emplace_back(display_name(a.arm));
  std::vector<std::vector<std::string>> rows{head};
  auto add = [&](const std::string& label, auto get) {
    std::vector<std::string> row{label};
    for (const auto& a : result.arms) row.push_back(fmt6(get(a)));
    rows.push_back(std::move(row));
  };
  add("RMSE-biased", [](const ArmSummary& a) { return a.rmse_biased; });
  add("RMSE-raw", [](const ArmSummary& a) { return a.rmse_raw; });
  add("DS", [](const ArmSummary& a) { return a.ds; });
  add("IS", [](const ArmSummary& a) { return a.is; });
  {
    std::vector<std::string> row{"IS mode"};
    for (const auto& a : result.arms) row.emplace_back(to_string(a.is_mode));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      out << (c == 0 ? row[c] + pad : "  " + pad + row[c]);
    }
    out << '\n';
  }
}

void write_experiment_csv(std::ostream& out, const ExperimentResult& result) {
  csv::write_row(out, {"arm", "metric", "value"});
  for (const auto& a : result.arms) {
    const std::string name(to_string(a.arm));
    csv::write_row(out, {name, "rmse_biased", csv::format_full(a.rmse_biased)});
    csv::write_row(out, {name, "rmse_raw", csv::format_full(a.rmse_raw)});
    csv::write_row(out, {name, "ds", csv::format_full(a.ds)});
    csv::write_row(out, {name, "is", csv::format_full(a.is)});
    csv::write_row(out, {name, "is_per_fold", csv::format_full(a.is_per_fold)});
  }
}

}  // namespace impartial
