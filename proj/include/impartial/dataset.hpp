#pragma once

#include "impartial/linalg.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace impartial {

enum class CovariateRole { Response, Sensitive, Legitimate, Suspect, BlackBoxEstimate, Ignore };
enum class ColumnKind { Numeric, Categorical };

std::string_view to_string(CovariateRole role);
/// Accepts `response|sensitive|legitimate|suspect|blackbox|ignore`.
CovariateRole parse_role(std::string_view text);

struct SchemaColumn {
  std::string name;
  CovariateRole role = CovariateRole::Ignore;
  ColumnKind kind = ColumnKind::Numeric;
};

struct Interaction {
  std::string left;
  std::string right;
};

/// Column roles and interactions. File format, one entry per line:
///
///     # comment
///     default = response
///     edu     = legitimate, categorical
///     group   = sensitive, categorical
///     interact = edu * group
///
struct Schema {
  std::vector<SchemaColumn> columns;
  std::vector<Interaction> interactions;

  const SchemaColumn* find(std::string_view name) const;
  const SchemaColumn& response() const;
  std::vector<const SchemaColumn*> with_role(CovariateRole role) const;

  /// Throws SchemaError unless there is exactly one numeric response, names
  /// are unique and every interaction joins two non-response, non-ignored columns.
  void validate() const;
};

Schema parse_schema(std::istream& in, std::string_view source_name = "<schema>");
Schema load_schema(const std::filesystem::path& path);
void write_schema(std::ostream& out, const Schema& schema);

/// Copy of `schema` with every legitimate and suspect column reassigned to `role`.
Schema with_covariate_role(const Schema& schema, CovariateRole role);

/// Role of an interaction column given the roles of its parents.
CovariateRole interaction_role(CovariateRole a, CovariateRole b);

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<double> values;        // numeric columns
  std::vector<std::string> labels;   // categorical columns, one per row
  std::vector<std::string> levels;   // categorical levels, first-appearance order
};

/// Rectangular raw data with typed columns.
class Dataset {
 public:
  void add_numeric(std::string name, std::vector<double> values);
  /// Levels are collected in first-appearance order unless given explicitly.
  void add_categorical(std::string name, std::vector<std::string> labels,
                       std::vector<std::string> levels = {});

  std::size_t rows() const { return rows_; }
  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::string_view name) const;
  Column& column(std::string_view name);
  bool has_column(std::string_view name) const;

  /// Row subset; categorical level lists are inherited unchanged.
  Dataset select_rows(std::span<const std::size_t> rows) const;

  /// Printable value of a cell (category label or shortest numeric form).
  std::string cell_text(const Column& column, std::size_t row) const;

 private:
  void check_rows(std::size_t n, std::string_view name);

  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

/// Reads a CSV file and types its columns per `schema`. Columns absent from the
/// schema, and columns with role `ignore`, are skipped.
Dataset load_csv(const std::filesystem::path& path, const Schema& schema);
Dataset read_csv(std::istream& in, const Schema& schema, std::string_view source_name = "<csv>");
void write_csv(std::ostream& out, const Dataset& data);

/// Design blocks after one-hot expansion, interaction expansion and centering.
struct EncodedDesign {
  Vector y;
  Matrix S, X, W, B;
  std::vector<std::string> s_names, x_names, w_names, b_names;
  Vector s_means, x_means, w_means, b_means;
  /// Raw sensitive value(s) per row, joined with '|' when several columns are sensitive.
  std::vector<std::string> s_group_labels;

  Eigen::Index rows() const { return y.size(); }
  /// [W | B], the block treated as suspect by every estimator.
  Matrix suspect_block() const;
  std::vector<std::string> group_levels() const;
};

/// Learns one-hot levels and centering means from training data and applies
/// them unchanged to any later dataset.
class Encoder {
 public:
  static Encoder fit(const Dataset& data, const Schema& schema);

  EncodedDesign transform(const Dataset& data) const;
  const Schema& schema() const { return schema_; }

 private:
  enum class BlockId { S, X, W, B };
  struct Source {
    std::string column;
    ColumnKind kind;
    std::vector<std::string> levels;  // categorical: full level list, first is reference
  };
  struct Term {
    BlockId block;
    std::vector<std::size_t> parents;  // indices into sources_ (1 = main effect, 2 = interaction)
  };

  Matrix raw_block(const Dataset& data, BlockId block, std::vector<std::string>* names) const;

  Schema schema_;
  std::vector<Source> sources_;
  std::vector<Term> terms_;
  std::map<BlockId, Vector> means_;
};

EncodedDesign encode(const Dataset& data, const Schema& schema);

/// Raw sensitive value(s) per row, joined with '|' (same keys as EncodedDesign).
std::vector<std::string> sensitive_group_labels(const Dataset& data, const Schema& schema);

}  // namespace impartial
