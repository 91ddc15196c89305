#include "impartial/dataset.hpp"

#include "impartial/csv.hpp"
#include "impartial/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

namespace impartial {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_covariate(CovariateRole role) {
  return role != CovariateRole::Response && role != CovariateRole::Ignore;
}

}  // namespace

std::string_view to_string(CovariateRole role) {
  switch (role) {
    case CovariateRole::Response: return "response";
    case CovariateRole::Sensitive: return "sensitive";
    case CovariateRole::Legitimate: return "legitimate";
    case CovariateRole::Suspect: return "suspect";
    case CovariateRole::BlackBoxEstimate: return "blackbox";
    case CovariateRole::Ignore: return "ignore";
  }
  return "ignore";
}

CovariateRole parse_role(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "response") return CovariateRole::Response;
  if (t == "sensitive") return CovariateRole::Sensitive;
  if (t == "legitimate") return CovariateRole::Legitimate;
  if (t == "suspect") return CovariateRole::Suspect;
  if (t == "blackbox") return CovariateRole::BlackBoxEstimate;
  if (t == "ignore") return CovariateRole::Ignore;
  throw SchemaError("unknown role '" + std::string(text) +
                    "' (expected response|sensitive|legitimate|suspect|blackbox|ignore)");
}

CovariateRole interaction_role(CovariateRole a, CovariateRole b) {
  if (!is_covariate(a) || !is_covariate(b)) {
    throw SchemaError("interactions may only join sensitive, legitimate, suspect or blackbox columns");
  }
  if (a == b) return a;
  const auto suspect_like = [](CovariateRole r) {
    return r == CovariateRole::Suspect || r == CovariateRole::BlackBoxEstimate;
  };
  if (suspect_like(a) || suspect_like(b)) return CovariateRole::Suspect;
  // Only sensitive x legitimate remains.
  return CovariateRole::Legitimate;
}

// ---------------------------------------------------------------- Schema

const SchemaColumn* Schema::find(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const SchemaColumn& Schema::response() const {
  for (const auto& c : columns) {
    if (c.role == CovariateRole::Response) return c;
  }
  throw SchemaError("schema declares no response column");
}

std::vector<const SchemaColumn*> Schema::with_role(CovariateRole role) const {
  std::vector<const SchemaColumn*> out;
  for (const auto& c : columns) {
    if (c.role == role) out.push_back(&c);
  }
  return out;
}

void Schema::validate() const {
  std::set<std::string> seen;
  int responses = 0;
  for (const auto& c : columns) {
    if (c.name.empty()) throw SchemaError("schema column with empty name");
    if (!seen.insert(c.name).second) throw SchemaError("duplicate schema column '" + c.name + "'");
    if (c.role == CovariateRole::Response) {
      ++responses;
      if (c.kind != ColumnKind::Numeric) {
        throw SchemaError("response column '" + c.name + "' must be numeric");
      }
    }
  }
  if (responses != 1) {
    throw SchemaError("schema must declare exactly one response column, found " +
                      std::to_string(responses));
  }
  for (const auto& it : interactions) {
    for (const auto* name : {&it.left, &it.right}) {
      const SchemaColumn* col = find(*name);
      if (!col) throw SchemaError("interaction references unknown column '" + *name + "'");
      if (!is_covariate(col->role)) {
        throw SchemaError("interaction references " + std::string(to_string(col->role)) +
                          " column '" + *name + "'");
      }
    }
  }
}

Schema parse_schema(std::istream& in, std::string_view source_name) {
  Schema schema;
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw SchemaError(std::string(source_name) + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail("expected 'name = role[,categorical]'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) fail("missing column name");

    if (key == "interact") {
      const auto star = value.find('*');
      if (star == std::string::npos) fail("expected 'interact = nameA * nameB'");
      Interaction it{trim(std::string_view(value).substr(0, star)),
                     trim(std::string_view(value).substr(star + 1))};
      if (it.left.empty() || it.right.empty()) fail("interaction needs two column names");
      schema.interactions.push_back(std::move(it));
      continue;
    }

    SchemaColumn col;
    col.name = key;
    std::string_view rest = value;
    const auto comma = rest.find(',');
    try {
      col.role = parse_role(rest.substr(0, comma));
    } catch (const SchemaError& e) {
      fail(e.what());
    }
    if (comma != std::string_view::npos) {
      const std::string kind = lower(trim(rest.substr(comma + 1)));
      if (kind == "categorical") {
        col.kind = ColumnKind::Categorical;
      } else if (kind == "numeric") {
        col.kind = ColumnKind::Numeric;
      } else {
        fail("unknown column kind '" + kind + "' (expected categorical or numeric)");
      }
    }
    schema.columns.push_back(std::move(col));
  }
  schema.validate();
  return schema;
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open schema file " + path.string());
  return parse_schema(in, path.string());
}

void write_schema(std::ostream& out, const Schema& schema) {
  for (const auto& c : schema.columns) {
    out << c.name << " = " << to_string(c.role);
    if (c.kind == ColumnKind::Categorical) out << ",categorical";
    out << '\n';
  }
  for (const auto& it : schema.interactions) {
    out << "interact = " << it.left << " * " << it.right << '\n';
  }
}

Schema with_covariate_role(const Schema& schema, CovariateRole role) {
  Schema out = schema;
  for (auto& c : out.columns) {
    if (c.role == CovariateRole::Legitimate || c.role == CovariateRole::Suspect) c.role = role;
  }
  return out;
}

// ---------------------------------------------------------------- Dataset

void Dataset::check_rows(std::size_t n, std::string_view name) {
  if (has_column(name)) throw ContractError("duplicate column '" + std::string(name) + "'");
  if (!columns_.empty() && n != rows_) {
    throw ContractError("column '" + std::string(name) + "' has " + std::to_string(n) +
                        " rows, dataset has " + std::to_string(rows_));
  }
  rows_ = n;
}

void Dataset::add_numeric(std::string name, std::vector<double> values) {
  check_rows(values.size(), name);
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::Numeric;
  c.values = std::move(values);
  columns_.push_back(std::move(c));
}

void Dataset::add_categorical(std::string name, std::vector<std::string> labels,
                              std::vector<std::string> levels) {
  check_rows(labels.size(), name);
  if (levels.empty()) {
    for (const auto& l : labels) {
      if (std::find(levels.begin(), levels.end(), l) == levels.end()) levels.push_back(l);
    }
  }
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::Categorical;
  c.labels = std::move(labels);
  c.levels = std::move(levels);
  columns_.push_back(std::move(c));
}

const Column& Dataset::column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return c;
  }
  throw ContractError("dataset has no column '" + std::string(name) + "'");
}

Column& Dataset::column(std::string_view name) {
  return const_cast<Column&>(std::as_const(*this).column(name));
}

bool Dataset::has_column(std::string_view name) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.name == name; });
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  Dataset out;
  out.rows_ = rows.size();
  for (const auto& c : columns_) {
    Column sub;
    sub.name = c.name;
    sub.kind = c.kind;
    sub.levels = c.levels;
    if (c.kind == ColumnKind::Numeric) {
      sub.values.reserve(rows.size());
      for (auto r : rows) sub.values.push_back(c.values.at(r));
    } else {
      sub.labels.reserve(rows.size());
      for (auto r : rows) sub.labels.push_back(c.labels.at(r));
    }
    out.columns_.push_back(std::move(sub));
  }
  return out;
}

std::string Dataset::cell_text(const Column& column, std::size_t row) const {
  if (column.kind == ColumnKind::Categorical) return column.labels[row];
  return csv::format_shortest(column.values[row]);
}

Dataset read_csv(std::istream& in, const Schema& schema, std::string_view source_name) {
  schema.validate();
  const csv::Table table = csv::read(in, source_name);
  const std::string source(source_name);

  Dataset data;
  for (const auto& sc : schema.columns) {
    if (sc.role == CovariateRole::Ignore) continue;
    const auto it = std::find(table.header.begin(), table.header.end(), sc.name);
    if (it == table.header.end()) {
      throw IngestionError(source + ": missing column '" + sc.name + "' declared in schema");
    }
    const auto j = static_cast<std::size_t>(it - table.header.begin());
    const auto where = [&](std::size_t i) {
      return source + ": line " + std::to_string(table.line_numbers[i]) + ", column '" + sc.name + "'";
    };
    if (sc.kind == ColumnKind::Numeric) {
      std::vector<double> values(table.rows.size());
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::string& cell = table.rows[i][j];
        if (trim(cell).empty()) throw IngestionError(where(i) + ": missing value");
        if (!csv::parse_double(cell, values[i])) {
          throw IngestionError(where(i) + ": cannot parse '" + cell + "' as a number");
        }
        if (!std::isfinite(values[i])) throw IngestionError(where(i) + ": non-finite value");
      }
      data.add_numeric(sc.name, std::move(values));
    } else {
      std::vector<std::string> labels(table.rows.size());
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        labels[i] = trim(table.rows[i][j]);
        if (labels[i].empty()) throw IngestionError(where(i) + ": missing value");
      }
      data.add_categorical(sc.name, std::move(labels));
    }
  }
  if (data.rows() == 0) throw IngestionError(source + ": no data rows");
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open data file " + path.string());
  return read_csv(in, schema, path.string());
}

void write_csv(std::ostream& out, const Dataset& data) {
  std::vector<std::string> fields;
  for (const auto& c : data.columns()) fields.push_back(c.name);
  csv::write_row(out, fields);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    fields.clear();
    for (const auto& c : data.columns()) fields.push_back(data.cell_text(c, i));
    csv::write_row(out, fields);
  }
}

// ---------------------------------------------------------------- Encoding

Matrix EncodedDesign::suspect_block() const { return hcat({&W, &B}); }

std::vector<std::string> EncodedDesign::group_levels() const {
  std::vector<std::string> levels;
  for (const auto& l : s_group_labels) {
    if (std::find(levels.begin(), levels.end(), l) == levels.end()) levels.push_back(l);
  }
  return levels;
}

Encoder Encoder::fit(const Dataset& data, const Schema& schema) {
  schema.validate();
  Encoder enc;
  enc.schema_ = schema;

  const auto block_of = [](CovariateRole role) {
    switch (role) {
      case CovariateRole::Sensitive: return BlockId::S;
      case CovariateRole::Legitimate: return BlockId::X;
      case CovariateRole::Suspect: return BlockId::W;
      default: return BlockId::B;
    }
  };

  std::map<std::string, std::size_t> source_index;
  for (const auto& sc : schema.columns) {
    if (!is_covariate(sc.role)) continue;
    if (!data.has_column(sc.name)) {
      throw IngestionError("dataset is missing column '" + sc.name + "' declared in schema");
    }
    const Column& col = data.column(sc.name);
    if (col.kind != sc.kind) {
      throw SchemaError("column '" + sc.name + "' kind differs between schema and dataset");
    }
    source_index[sc.name] = enc.sources_.size();
    enc.sources_.push_back({sc.name, sc.kind, col.levels});
    enc.terms_.push_back({block_of(sc.role), {enc.sources_.size() - 1}});
  }
  for (const auto& it : schema.interactions) {
    const CovariateRole role =
        interaction_role(schema.find(it.left)->role, schema.find(it.right)->role);
    enc.terms_.push_back({block_of(role), {source_index.at(it.left), source_index.at(it.right)}});
  }
  if (!data.has_column(schema.response().name)) {
    throw IngestionError("dataset is missing response column '" + schema.response().name + "'");
  }

  for (BlockId b : {BlockId::S, BlockId::X, BlockId::W, BlockId::B}) {
    const Matrix raw = enc.raw_block(data, b, nullptr);
    if (data.rows() == 0) {
      enc.means_[b] = Vector::Zero(raw.cols());
    } else {
      enc.means_[b] = column_center(raw).means;
    }
  }
  return enc;
}

Matrix Encoder::raw_block(const Dataset& data, BlockId block, std::vector<std::string>* names) const {
  const auto n = static_cast<Eigen::Index>(data.rows());

  // Encoded (uncentered) columns of one source column.
  const auto expand = [&](const Source& src, std::vector<std::string>& labels) {
    const Column& col = data.column(src.column);
    if (src.kind == ColumnKind::Numeric) {
      labels = {src.column};
      return Matrix(Eigen::Map<const Vector>(col.values.data(), n));
    }
    const auto k = static_cast<Eigen::Index>(src.levels.size());
    Matrix m = Matrix::Zero(n, std::max<Eigen::Index>(k - 1, 0));
    labels.clear();
    for (Eigen::Index l = 1; l < k; ++l) labels.push_back(src.column + "=" + src.levels[l]);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& label = col.labels[static_cast<std::size_t>(i)];
      const auto pos = std::find(src.levels.begin(), src.levels.end(), label);
      if (pos == src.levels.end()) {
        throw IngestionError("column '" + src.column + "' row " + std::to_string(i + 1) +
                             ": level '" + label + "' was not seen in the training data");
      }
      const auto level = pos - src.levels.begin();
      if (level > 0) m(i, level - 1) = 1.0;
    }
    return m;
  };

  std::vector<Matrix> parts;
  std::vector<std::string> all_names;
  for (const auto& term : terms_) {
    if (term.block != block) continue;
    std::vector<std::string> a_names;
    Matrix a = expand(sources_[term.parents[0]], a_names);
    if (term.parents.size() == 1) {
      parts.push_back(std::move(a));
      all_names.insert(all_names.end(), a_names.begin(), a_names.end());
      continue;
    }
    std::vector<std::string> b_names;
    const Matrix b = expand(sources_[term.parents[1]], b_names);
    Matrix prod(n, a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      for (Eigen::Index j = 0; j < b.cols(); ++j) {
        prod.col(i * b.cols() + j) = a.col(i).cwiseProduct(b.col(j));
        all_names.push_back(a_names[static_cast<std::size_t>(i)] + "*" +
                            b_names[static_cast<std::size_t>(j)]);
      }
    }
    parts.push_back(std::move(prod));
  }

  Eigen::Index cols = 0;
  for (const auto& p : parts) cols += p.cols();
  Matrix out(n, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  if (names) *names = std::move(all_names);
  return out;
}

EncodedDesign Encoder::transform(const Dataset& data) const {
  EncodedDesign d;
  const auto& resp = data.column(schema_.response().name);
  if (resp.kind != ColumnKind::Numeric) {
    throw SchemaError("response column '" + resp.name + "' must be numeric");
  }
  d.y = Eigen::Map<const Vector>(resp.values.data(), static_cast<Eigen::Index>(resp.values.size()));

  const auto fill = [&](BlockId id, Matrix& block, std::vector<std::string>& names, Vector& means) {
    const Matrix raw = raw_block(data, id, &names);
    means = means_.at(id);
    block = raw.rowwise() - means.transpose();
  };
  fill(BlockId::S, d.S, d.s_names, d.s_means);
  fill(BlockId::X, d.X, d.x_names, d.x_means);
  fill(BlockId::W, d.W, d.w_names, d.w_means);
  fill(BlockId::B, d.B, d.b_names, d.b_means);

  d.s_group_labels = sensitive_group_labels(data, schema_);
  return d;
}

std::vector<std::string> sensitive_group_labels(const Dataset& data, const Schema& schema) {
  std::vector<const Column*> sensitive;
  for (const auto* sc : schema.with_role(CovariateRole::Sensitive)) {
    sensitive.push_back(&data.column(sc->name));
  }
  std::vector<std::string> labels(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < sensitive.size(); ++k) {
      if (k) key += '|';
      key += data.cell_text(*sensitive[k], i);
    }
    labels[i] = std::move(key);
  }
  return labels;
}

EncodedDesign encode(const Dataset& data, const Schema& schema) {
  return Encoder::fit(data, schema).transform(data);
}

}  // namespace impartial
