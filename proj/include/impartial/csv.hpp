#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace impartial::csv {

/// A parsed CSV file: header plus string cells. `line_numbers[i]` is the
/// 1-based physical line on which record i starts (header is line 1).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

/// RFC-4180 reader: comma separator, double-quote quoting with "" escapes,
/// LF or CRLF line endings. Ragged records throw IngestionError.
Table read(std::istream& in, std::string_view source_name = "<input>");

/// Quotes a field only when it contains a comma, quote or line break.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Full round-trip precision (17 significant digits).
std::string format_full(double value);

/// Shortest representation that parses back to the same double.
std::string format_shortest(double value);

/// Locale-independent strict parse; false on trailing garbage or empty input.
bool parse_double(std::string_view text, double& out);

}  // namespace impartial::csv
