#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lsqtl::csv {

// Plain comma-separated text: no quoting, fields are trimmed, blank lines
// are skipped and a trailing '\r' is tolerated.
struct Row {
  std::size_t line = 0;  // 1-based line in the source
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  // Index of a header column; throws ParseError naming the file if missing.
  std::size_t column(std::string_view name) const;
};

Table read(std::istream& in);
Table read_file(const std::filesystem::path& path);

// Strict numeric parse of a whole field. Throws ParseError with `line`.
double parse_double(std::string_view field, std::size_t line, std::string_view what);
long long parse_int(std::string_view field, std::size_t line, std::string_view what);

// Shortest representation that round-trips.
std::string format_double(double v);

}  // namespace lsqtl::csv
