#include "impartial/cli.hpp"

#include "impartial/csv.hpp"
#include "impartial/dataset.hpp"
#include "impartial/decomposition.hpp"
#include "impartial/diagnostics.hpp"
#include "impartial/errors.hpp"
#include "impartial/estimators.hpp"
#include "impartial/harness.hpp"
#include "impartial/metrics.hpp"

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <ostream>
#include <sstream>
#include <tuple>

namespace impartial::cli {

namespace fs = std::filesystem;

namespace {

// Failure to open or write a file; maps to exit code 1 like ingestion errors.
class IoError : public Error {
 public:
  using Error::Error;
};

struct CliConfig {
  std::string data;
  std::string schema;
  std::string out;
  std::string coefficients;
  std::string predictions;
  std::string variant = "total";
  std::string mode;
  std::string roles = "declared";
  std::string positive, negative;
  std::string generator;
  std::string arms = "ols,feo,seo,calders";
  std::uint64_t seed = 1;
  int folds = 5;
  int reps = 20;
  std::string bias_group;
  double bias_frac = 0.7;
  double bias_shift = 1.0;
  int trees = 50;
  unsigned threads = 0;
  std::size_t bins = 5;
  std::size_t n = 0;
  long ps = 1, px = 2, pxu = 1, pw = 1;
  bool fair = false;
};

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Two-column aligned text table.
void write_pairs(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  for (const auto& [k, v] : rows) out << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

void finish(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw IoError("failed writing '" + path + "'");
}

// Output paths must not alias any input file.
void guard_outputs(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  for (const auto& o : outputs) {
    if (o.empty()) continue;
    for (const auto& i : inputs) {
      if (i.empty()) continue;
      std::error_code ec;
      if (fs::weakly_canonical(o, ec) == fs::weakly_canonical(i, ec)) {
        throw ContractError("output '" + o + "' would overwrite input '" + i + "'");
      }
    }
  }
}

Schema load_roles(const CliConfig& c) {
  Schema schema = load_schema(c.schema);
  if (c.roles == "legitimate") return with_covariate_role(schema, CovariateRole::Legitimate);
  if (c.roles == "suspect") return with_covariate_role(schema, CovariateRole::Suspect);
  return schema;
}

// Reads an external predictions CSV: the `prediction` column when present,
// otherwise every column.
Matrix read_predictions(const std::string& path, std::size_t expected_rows) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open predictions file '" + path + "'");
  const csv::Table t = csv::read(in, path);
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] == "prediction") cols = {j};
  }
  if (cols.empty()) {
    for (std::size_t j = 0; j < t.header.size(); ++j) cols.push_back(j);
  }
  if (t.rows.size() != expected_rows) {
    throw IngestionError(path + ": " + std::to_string(t.rows.size()) + " prediction rows, data has " +
                         std::to_string(expected_rows));
  }
  Matrix m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      double v = 0.0;
      if (!csv::parse_double(t.rows[i][cols[k]], v) || !std::isfinite(v)) {
        throw IngestionError(path + ":" + std::to_string(t.line_numbers[i]) + ": column '" +
                             t.header[cols[k]] + "': not a finite number: '" + t.rows[i][cols[k]] + "'");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
    }
  }
  return m;
}

void write_predictions(const std::string& path, const Vector& values) {
  auto f = open_output(path);
  csv::write_row(f, {"prediction"});
  for (Eigen::Index i = 0; i < values.size(); ++i) csv::write_row(f, {csv::format_full(values(i))});
  finish(f, path);
}

void write_coefficients(std::ostream& out, const TotalModelFit& fit, EstimatorVariant variant, bool as_csv) {
  std::vector<std::array<std::string, 3>> rows;
  const auto add = [&](const char* block, const std::vector<std::string>& names, const Vector& beta) {
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      rows.push_back({block, names[static_cast<std::size_t>(j)],
                      as_csv ? csv::format_full(beta(j)) : fmt6(beta(j))});
    }
  };
  rows.push_back({"intercept", "(intercept)", as_csv ? csv::format_full(fit.beta0) : fmt6(fit.beta0)});
  if (variant == EstimatorVariant::ExcludeS) {
    add("x", fit.x_names, fit.restricted_beta_x);
    std::vector<std::string> wb = fit.w_names;
    wb.insert(wb.end(), fit.b_names.begin(), fit.b_names.end());
    add("w", wb, fit.restricted_beta_wb);
  } else if (variant != EstimatorVariant::Marginal) {
    add("s", fit.s_names, fit.beta_s);
    add("x", fit.x_names, fit.beta_x);
    add("w", fit.w_names, fit.beta_w);
    add("b", fit.b_names, fit.beta_b);
  }
  if (as_csv) {
    csv::write_row(out, {"block", "column", "value"});
    for (const auto& r : rows) csv::write_row(out, {r[0], r[1], r[2]});
    return;
  }
  std::size_t w0 = 5, w1 = 6;
  for (const auto& r : rows) {
    w0 = std::max(w0, r[0].size());
    w1 = std::max(w1, r[1].size());
  }
  out << std::left << std::setw(static_cast<int>(w0) + 2) << "block" << std::setw(static_cast<int>(w1) + 2)
      << "column" << "value\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(w0) + 2) << r[0] << std::setw(static_cast<int>(w1) + 2) << r[1]
        << r[2] << '\n';
  }
}

struct AuditRows {
  std::vector<std::pair<std::string, double>> values;
  ImpartialityMode mode = ImpartialityMode::SEO;
  std::string ds_label;
};

AuditRows audit_rows(const Vector& predictions, const EncodedDesign& design, ImpartialityMode mode,
                     const CliConfig& c) {
  std::string pos = c.positive, neg = c.negative;
  if (pos.empty() != neg.empty()) throw ContractError("--positive and --negative must be given together");
  if (pos.empty()) std::tie(pos, neg) = default_group_pair(design.s_group_labels);
  const MetricsReport r = evaluate(predictions, design.y, design, mode, pos, neg);
  AuditRows a;
  a.mode = mode;
  a.ds_label = pos + " - " + neg;
  a.values = {{"n", static_cast<double>(r.n)}, {"rmse", r.rmse}, {"rsse", r.rsse}, {"ds", r.ds}, {"is", r.is_score}};
  for (const auto& [g, m] : r.per_group_means) a.values.emplace_back("mean[" + g + "]", m);
  return a;
}

std::vector<std::pair<std::string, std::string>> audit_text(const AuditRows& a) {
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& [k, v] : a.values) {
    std::string label = k;
    if (k == "n") label = "n";
    else if (k == "rmse") label = "RMSE";
    else if (k == "rsse") label = "RSSE";
    else if (k == "ds") label = "DS (" + a.ds_label + ")";
    else if (k == "is") label = "IS [" + std::string(to_string(a.mode)) + "]";
    rows.emplace_back(label, fmt6(v));
  }
  return rows;
}

void write_audit_csv(std::ostream& out, const AuditRows& a) {
  csv::write_row(out, {"metric", "value"});
  for (const auto& [k, v] : a.values) csv::write_row(out, {k, csv::format_full(v)});
  csv::write_row(out, {"is_mode", std::string(to_string(a.mode))});
}

// In-sample predictions of a named variant.
Vector variant_predictions(const Dataset& data, const Schema& schema, const EncodedDesign& design,
                           EstimatorVariant variant, std::size_t bins, TotalModelFit* fit_out) {
  if (variant == EstimatorVariant::CaldersBaseline) return calders_baseline(data, schema, bins).values;
  TotalModelFit fit = fit_total(design);
  Vector values = predict(fit, design, variant).values;
  if (fit_out) *fit_out = std::move(fit);
  return values;
}

int cmd_fit(const CliConfig& c, std::ostream& out) {
  const EstimatorVariant variant = parse_variant(c.variant);
  guard_outputs({c.data, c.schema}, {c.out, c.coefficients});
  const Schema schema = load_roles(c);
  const Dataset data = load_csv(c.data, schema);
  const EncodedDesign design = encode(data, schema);
  TotalModelFit fit;
  const Vector values = variant_predictions(data, schema, design, variant, c.bins, &fit);
  write_predictions(c.out, values);
  if (variant == EstimatorVariant::CaldersBaseline) {
    out << "calders baseline: " << values.size() << " predictions written to " << c.out << '\n';
    return kOk;
  }
  if (!c.coefficients.empty()) {
    auto f = open_output(c.coefficients);
    write_coefficients(f, fit, variant, true);
    finish(f, c.coefficients);
  } else {
    out << "variant " << to_string(variant) << ", n = " << design.rows() << '\n';
    write_coefficients(out, fit, variant, false);
  }
  return kOk;
}

int cmd_audit(const CliConfig& c, std::ostream& out) {
  if (c.predictions.empty() == c.variant.empty()) {
    throw ContractError("audit needs exactly one of --predictions or --variant");
  }
  const ImpartialityMode mode = parse_impartiality_mode(c.mode.empty() ? "seo" : c.mode);
  std::optional<EstimatorVariant> variant;
  if (!c.variant.empty()) variant = parse_variant(c.variant);
  guard_outputs({c.data, c.schema, c.predictions}, {c.out});
  const Schema schema = load_roles(c);
  const Dataset data = load_csv(c.data, schema);
  const EncodedDesign design = encode(data, schema);
  Vector predictions;
  if (variant) {
    predictions = variant_predictions(data, schema, design, *variant, c.bins, nullptr);
  } else {
    predictions = read_predictions(c.predictions, data.rows()).col(0);
  }
  const AuditRows a = audit_rows(predictions, design, mode, c);
  write_pairs(out, audit_text(a));
  if (!c.out.empty()) {
    auto f = open_output(c.out);
    write_audit_csv(f, a);
    finish(f, c.out);
  }
  return kOk;
}

int cmd_decompose(const CliConfig& c, std::ostream& out) {
  const DecompositionMode mode = parse_decomposition_mode(c.mode.empty() ? "total" : c.mode);
  guard_outputs({c.data, c.schema}, {c.out});
  const Schema schema = load_roles(c);
  const Dataset data = load_csv(c.data, schema);
  const EncodedDesign design = encode(data, schema);
  const TotalModelFit fit = fit_total(design);
  const ComponentReport r = decompose(fit, design, mode);
  const Vector fitted = r.total();

  std::vector<std::pair<std::string, const Vector*>> cols{{"intercept", &r.intercept}, {"dt", &r.dt}, {"di", &r.di}};
  if (mode != DecompositionMode::FSEO) cols.emplace_back("sd_plus", &r.sd_plus);
  if (mode != DecompositionMode::FEO) cols.emplace_back("sd_minus_mixed", &r.sd_minus_mixed);
  if (mode != DecompositionMode::FSEO) cols.emplace_back("unique_x", &r.unique_x);
  if (mode != DecompositionMode::FEO) cols.emplace_back("unique_w", &r.unique_w);
  cols.emplace_back("fitted", &fitted);

  if (!c.out.empty()) {
    auto f = open_output(c.out);
    std::vector<std::string> header;
    for (const auto& col : cols) header.push_back(col.first);
    csv::write_row(f, header);
    std::vector<std::string> row(cols.size());
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
      for (std::size_t k = 0; k < cols.size(); ++k) row[k] = csv::format_full((*cols[k].second)(i));
      csv::write_row(f, row);
    }
    finish(f, c.out);
  }

  out << "decomposition mode " << to_string(mode) << ", n = " << design.rows() << '\n';
  std::size_t width = 9;
  for (const auto& col : cols) width = std::max(width, col.first.size());
  out << std::left << std::setw(static_cast<int>(width) + 2) << "component" << std::setw(14) << "sum" << "norm\n";
  for (const auto& [name, v] : cols) {
    const auto s = r.summary(*v);
    out << std::left << std::setw(static_cast<int>(width) + 2) << name << std::setw(14) << fmt6(s.sum)
        << fmt6(s.norm) << '\n';
  }
  if (mode != DecompositionMode::FEO) {
    const RedliningSummary red = redlining_report(r);
    out << '\n';
    write_pairs(out, {{"disparate treatment ||dt||", fmt6(red.disparate_treatment)},
                      {"informative redlining ||di||", fmt6(red.informative_redlining)},
                      {"||sd_minus_mixed||", fmt6(red.sd_minus)},
                      {"uninformative redlining ||di + sd_minus||", fmt6(red.uninformative_redlining)}});
  }
  return kOk;
}

int cmd_correct(const CliConfig& c, std::ostream& out) {
  const ImpartialityMode mode = parse_impartiality_mode(c.mode.empty() ? "seo" : c.mode);
  guard_outputs({c.data, c.schema, c.predictions}, {c.out});
  const Schema schema = load_roles(c);
  const Dataset data = load_csv(c.data, schema);
  const EncodedDesign design = encode(data, schema);
  const Matrix external = read_predictions(c.predictions, data.rows());
  const BlackBoxCorrection corrected = correct_blackbox(design, external);
  write_predictions(c.out, corrected.prediction.values);

  const AuditRows before = audit_rows(external.col(0), design, mode, c);
  const AuditRows after = audit_rows(corrected.prediction.values, design, mode, c);
  const auto t_before = audit_text(before);
  const auto t_after = audit_text(after);
  std::size_t width = 6;
  for (const auto& r : t_after) width = std::max(width, r.first.size());
  out << std::left << std::setw(static_cast<int>(width) + 2) << "metric" << std::setw(14) << "external"
      << "corrected\n";
  for (std::size_t i = 0; i < t_after.size(); ++i) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << t_after[i].first << std::setw(14)
        << t_before[i].second << t_after[i].second << '\n';
  }
  return kOk;
}

GeneratedData simulate(const CliConfig& c) {
  if (c.generator == "simple") return {gen_simple_example(), simple_example_schema()};
  if (c.generator == "dag") {
    if (c.ps < 1 || c.px < 0 || c.pxu < 0 || c.pw < 0) throw ContractError("dag: block sizes must be >= 0 (ps >= 1)");
    return gen_dag(make_dag_spec(c.ps, c.px, c.pxu, c.pw, c.fair, c.n ? c.n : 1000, c.seed));
  }
  if (c.generator == "wine") return gen_wine_like(c.n ? c.n : 6497, c.seed);
  throw ContractError("unknown generator '" + c.generator + "' (expected simple|dag|wine)");
}

std::string default_bias_group(const std::string& generator) {
  if (generator == "simple") return "s+";
  if (generator == "wine") return "white";
  return "1";
}

int cmd_validate(const CliConfig& c, std::ostream& out) {
  if (c.generator.empty() == (c.data.empty() && c.schema.empty())) {
    throw ContractError("validate needs either --simulate or both --data and --schema");
  }
  if (c.generator.empty() && (c.data.empty() || c.schema.empty())) {
    throw ContractError("validate needs both --data and --schema");
  }
  if (c.generator.empty() && c.bias_group.empty()) throw ContractError("validate on a data file needs --bias-group");

  ExperimentConfig config;
  config.folds = c.folds;
  config.repetitions = c.reps;
  config.master_seed = c.seed;
  config.calders_bins = c.bins;
  config.threads = c.threads;
  config.forest.trees = c.trees;
  config.arms.clear();
  std::stringstream ss(c.arms);
  for (std::string name; std::getline(ss, name, ',');) {
    if (!name.empty()) config.arms.push_back(parse_arm(name));
  }
  BiasSpec bias;
  bias.target_group = c.bias_group.empty() ? default_bias_group(c.generator) : c.bias_group;
  bias.fraction = c.bias_frac;
  bias.shift = c.bias_shift;
  guard_outputs({c.data, c.schema}, {c.out});

  GeneratedData g;
  if (!c.generator.empty()) {
    g = simulate(c);
  } else {
    g.schema = load_roles(c);
    g.data = load_csv(c.data, g.schema);
  }
  const ExperimentResult result = kfold_validate(g.data, g.schema, config, bias);
  write_experiment_table(out, result);
  if (!c.out.empty()) {
    auto f = open_output(c.out);
    write_experiment_csv(f, result);
    finish(f, c.out);
  }
  return kOk;
}

int cmd_simulate(const CliConfig& c, std::ostream& out) {
  const GeneratedData g = simulate(c);
  fs::path schema_path = c.schema;
  if (schema_path.empty()) schema_path = fs::path(c.out).replace_extension(".schema");
  if (fs::weakly_canonical(schema_path) == fs::weakly_canonical(c.out)) {
    throw ContractError("schema path equals data path");
  }
  auto f = open_output(c.out);
  write_csv(f, g.data);
  finish(f, c.out);
  auto s = open_output(schema_path.string());
  write_schema(s, g.schema);
  finish(s, schema_path.string());
  out << "wrote " << g.data.rows() << " rows to " << c.out << " and schema to " << schema_path.string() << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig c;
  CLI::App app{"Impartial regression estimators, audits and validation experiments", "impartial"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  const auto data_opts = [&](CLI::App* sub, bool required) {
    auto* d = sub->add_option("--data", c.data, "Input data CSV");
    auto* s = sub->add_option("--schema", c.schema, "Schema file with column roles");
    if (required) {
      d->required();
      s->required();
    }
    sub->add_option("--roles", c.roles, "Covariate roles: declared, or force all legitimate/suspect")
        ->check(CLI::IsMember({"declared", "legitimate", "suspect"}));
  };

  auto* fit = app.add_subcommand("fit", "Fit the total model and write predictions for one variant");
  data_opts(fit, true);
  fit->add_option("--variant", c.variant, "full|exclude-s|marginal|feo|fseo|total|blackbox-corrected|calders")
      ->capture_default_str();
  fit->add_option("--out", c.out, "Predictions CSV")->required();
  fit->add_option("--coefficients", c.coefficients, "Coefficient CSV (default: text table on stdout)");
  fit->add_option("--bins", c.bins, "Propensity bins for the calders variant")->capture_default_str();

  auto* audit = app.add_subcommand("audit", "Score predictions: RMSE, DS, IS, group means");
  data_opts(audit, true);
  audit->add_option("--predictions", c.predictions, "Predictions CSV to audit");
  auto* audit_variant = audit->add_option("--variant", c.variant, "Audit in-sample predictions of this variant");
  audit->add_option("--mode", c.mode, "IS mode feo|seo|design (default seo)");
  audit->add_option("--positive", c.positive, "DS group (minuend)");
  audit->add_option("--negative", c.negative, "DS group (subtrahend)");
  audit->add_option("--out", c.out, "Metrics CSV");
  audit->add_option("--bins", c.bins, "Propensity bins for the calders variant");

  auto* dec = app.add_subcommand("decompose", "Per-row dt/di/sd components of the full-model fit");
  data_opts(dec, true);
  dec->add_option("--mode", c.mode, "feo|fseo|total (default total)");
  dec->add_option("--out", c.out, "Per-row components CSV");

  auto* cor = app.add_subcommand("correct", "Purge sensitive dependence from external predictions");
  data_opts(cor, true);
  cor->add_option("--predictions", c.predictions, "External predictions CSV, row-aligned with --data")->required();
  cor->add_option("--out", c.out, "Corrected predictions CSV")->required();
  cor->add_option("--mode", c.mode, "IS mode of the audit summary (default seo)");
  cor->add_option("--positive", c.positive, "DS group (minuend)");
  cor->add_option("--negative", c.negative, "DS group (subtrahend)");

  auto* val = app.add_subcommand("validate", "Repeated k-fold bias experiment");
  data_opts(val, false);
  val->add_option("--simulate", c.generator, "Use generated data: simple|dag|wine");
  val->add_option("--folds", c.folds)->capture_default_str()->check(CLI::Range(2, 1000000));
  val->add_option("--reps", c.reps)->capture_default_str()->check(CLI::Range(1, 1000000));
  val->add_option("--seed", c.seed)->capture_default_str();
  val->add_option("--bias-group", c.bias_group, "Sensitive group whose responses are shifted");
  val->add_option("--bias-frac", c.bias_frac)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  val->add_option("--bias-shift", c.bias_shift)->capture_default_str();
  val->add_option("--arms", c.arms, "Comma list of ols,feo,seo,calders,marginal,exclude-s,total,rf,feo-rf,seo-rf")
      ->capture_default_str();
  val->add_option("--trees", c.trees, "Trees in the bagged forest")->capture_default_str()->check(CLI::PositiveNumber);
  val->add_option("--threads", c.threads, "Worker threads (0: IMPARTIAL_THREADS or hardware)");
  val->add_option("--bins", c.bins)->capture_default_str();
  val->add_option("--out", c.out, "Results CSV (arm,metric,value)");
  val->add_option("--n", c.n, "Rows for generated data");
  val->add_option("--ps", c.ps)->capture_default_str();
  val->add_option("--px", c.px)->capture_default_str();
  val->add_option("--pxu", c.pxu)->capture_default_str();
  val->add_option("--pw", c.pw)->capture_default_str();
  val->add_flag("--fair", c.fair, "DAG without s->y and w->y edges");

  auto* sim = app.add_subcommand("simulate", "Write a generated dataset and its schema");
  sim->add_option("generator", c.generator, "simple|dag|wine")->required();
  sim->add_option("--out", c.out, "Data CSV")->required();
  sim->add_option("--schema", c.schema, "Schema output (default: --out with .schema extension)");
  sim->add_option("--seed", c.seed)->capture_default_str();
  sim->add_option("--n", c.n, "Rows (dag default 1000, wine default 6497)");
  sim->add_option("--ps", c.ps)->capture_default_str();
  sim->add_option("--px", c.px)->capture_default_str();
  sim->add_option("--pxu", c.pxu)->capture_default_str();
  sim->add_option("--pw", c.pw)->capture_default_str();
  sim->add_flag("--fair", c.fair, "DAG without s->y and w->y edges");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  // A variant given to audit overrides the fit default; without one audit reads --predictions.
  if (audit->parsed() && audit_variant->count() == 0) c.variant.clear();

  // Repeated warnings (one per fold or bin) are shown once.
  std::set<std::string, std::less<>> seen;
  WarningHandler previous = set_warning_handler([&err, &seen](std::string_view m) {
    if (seen.insert(std::string(m)).second) err << "warning: " << m << '\n';
  });
  int code = kOk;
  try {
    if (fit->parsed()) code = cmd_fit(c, out);
    else if (audit->parsed()) code = cmd_audit(c, out);
    else if (dec->parsed()) code = cmd_decompose(c, out);
    else if (cor->parsed()) code = cmd_correct(c, out);
    else if (val->parsed()) code = cmd_validate(c, out);
    else if (sim->parsed()) code = cmd_simulate(c, out);
  } catch (const VariantError& e) {
    err << "error: " << e.what() << '\n';
    code = kUsageError;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    code = kUsageError;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    code = kUsageError;
  } catch (const IngestionError& e) {
    err << "input error: " << e.what() << '\n';
    code = kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = kDataError;
  }
  set_warning_handler(std::move(previous));
  return code;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"impartial"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace impartial::cli
