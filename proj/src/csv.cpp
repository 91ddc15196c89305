#include "impartial/csv.hpp"

#include "impartial/errors.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>

namespace impartial::csv {

namespace {

// Reads one record starting at the current position. Returns false at EOF
// before any character was consumed.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line,
                 std::string_view source) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  const std::size_t start_line = line;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\r') {
      if (in.peek() == '\n') in.get();
      ++line;
      fields.push_back(std::move(field));
      return true;
    } else if (ch == '\n') {
      ++line;
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
    }
  }
  if (in_quotes) {
    throw IngestionError(std::string(source) + ": unterminated quoted field starting on line " +
                         std::to_string(start_line));
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

bool blank(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].empty();
}

}  // namespace

Table read(std::istream& in, std::string_view source_name) {
  Table table;
  std::size_t line = 1;
  std::vector<std::string> fields;
  if (!read_record(in, fields, line, source_name) || blank(fields)) {
    throw IngestionError(std::string(source_name) + ": missing header row");
  }
  // Strip a UTF-8 byte order mark from the first header cell.
  if (fields[0].size() >= 3 && fields[0].compare(0, 3, "\xEF\xBB\xBF") == 0) {
    fields[0].erase(0, 3);
  }
  table.header = fields;
  while (true) {
    const std::size_t record_line = line;
    if (!read_record(in, fields, line, source_name)) break;
    if (blank(fields)) continue;
    if (fields.size() != table.header.size()) {
      throw IngestionError(std::string(source_name) + ": line " + std::to_string(record_line) +
                           " has " + std::to_string(fields.size()) + " fields, header has " +
                           std::to_string(table.header.size()));
    }
    table.rows.push_back(fields);
    table.line_numbers.push_back(record_line);
  }
  return table;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

std::string format_full(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_shortest(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

}  // namespace impartial::csv
